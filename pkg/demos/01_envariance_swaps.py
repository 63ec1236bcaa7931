"""
Envariance: phases and swaps undone from the environment
========================================================

An entangled state is envariant under a transformation of the system when
some transformation of the environment alone restores it exactly. This
script walks through the two basic cases.
"""

import math

import numpy as np

from envlab import PureState, SchmidtDecomposition, apply_local, schmidt
from envlab.envariance import (
    SwapSpec,
    envariance_residual,
    envariant_description,
    optimal_counter,
    phase_rotation_pair,
    swap_pair,
)
from envlab.sampling import random_local_unitary

# A Bell pair: two equal Schmidt coefficients.
bell = PureState.from_amplitudes([1, 0, 0, 1], (2, 2), ("S", "E"))
sd = schmidt(bell, "S")
print("Bell moduli:", sd.moduli)

###############################################################################
# Phase rotations
# ---------------
# Multiplying each Schmidt branch of S by a phase is undone by the conjugate
# phases on E, whatever the moduli are.

u_s, u_e = phase_rotation_pair(sd, [math.pi / 3, 0.0])
print("phase pair residual:", envariance_residual(bell, u_s, u_e))

###############################################################################
# Swaps
# -----
# Exchanging two branches can be countered only if their moduli match.

u_s, u_e = swap_pair(sd, SwapSpec(0, 1))
print("Bell swap residual:", envariance_residual(bell, u_s, u_e))

lopsided = SchmidtDecomposition.from_coefficients([math.sqrt(0.2), math.sqrt(0.8)]).to_state()
u_s, u_e = swap_pair(schmidt(lopsided, "S"), SwapSpec(0, 1))
print("unequal swap residual:", envariance_residual(lopsided, u_s, u_e))

# No environment unitary does better than the optimal counter; its
# certificate 0.8 measures how far the swap is from being envariant.
best = optimal_counter(lopsided, u_s)
print(f"optimal counter: certificate {best.certificate:.12f}, residual {best.residual:.12f}")

###############################################################################
# Nothing done to E shows up in S
# -------------------------------
# The moduli and the system-side Schmidt subspaces survive any unitary on E.

rng = np.random.default_rng(0)
after = apply_local(lopsided, random_local_unitary(rng, "E", 2))
same = envariant_description(lopsided, "S").agrees_with(envariant_description(after, "S"))
print("description unchanged by a random u_E:", same)
