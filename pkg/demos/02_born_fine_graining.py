"""
Probabilities from counting equal branches
==========================================

A state with unequal coefficients is turned into one with ``M`` equal
coefficients by entangling a counterweight register C and then copying it
into a fresh environment E with a controlled shift. Once every branch can be
swapped with every other, each carries probability ``1/M`` and outcome 0
gets ``m/M``.
"""

import math

import numpy as np

from envlab import schmidt
from envlab.envariance import SwapSpec, is_envariant, swap_pair
from envlab.finegrain import (
    apply_cshift,
    born_from_probability,
    build_fine_grained_state,
    rational_approximation,
)

###############################################################################
# Fine-graining by hand
# ---------------------
# ``|alpha|^2 = 2/5`` needs ``M = 5`` counter states: two for outcome 0,
# three for outcome 1.

fg = rational_approximation(0.4, 5)
print("m, M:", fg.m, fg.M)

state = build_fine_grained_state(0.9, -2.1, fg)
shifted = apply_cshift(state)
sd = schmidt(shifted, ("S", "C"))
print("moduli across SC|E:", np.round(sd.moduli[:sd.rank], 12))

swappable = all(is_envariant(shifted, *swap_pair(sd, SwapSpec(i, j)))
                for i in range(fg.M) for j in range(i + 1, fg.M))
print("all branch pairs swappable:", swappable)

###############################################################################
# The whole pipeline
# ------------------
# ``born_from_probability`` runs the same steps and reports counts.

print(born_from_probability(1 / 3, 3).to_dict())

###############################################################################
# Irrational weights
# ------------------
# For ``|alpha|^2 = 1/pi`` no finite ``M`` is exact, but the error shrinks
# like ``1/(2M)``.

p = 1 / math.pi
for M in (10, 100, 1000, 10000):
    r = born_from_probability(p, M)
    print(f"M={M:>5}  p0={r.probabilities[0]:.6f}  |error|*2M={abs(r.probabilities[0] - p) * 2 * M:.3f}"
          f"  check={r.verification}")
