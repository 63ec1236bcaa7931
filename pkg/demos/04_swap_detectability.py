"""
Swaps are visible without entanglement
======================================

On a lone system, exchanging two basis states with different phases
changes the state in a way interference can detect. Put the same
coefficients into an entangled state and the swap can be undone from the
environment, so nothing local reveals it.
"""

import math

from envlab import PureState, SchmidtDecomposition
from envlab.envariance import SwapSpec, is_envariant, swap_detectability, swap_pair

# (|1> + |2> - |3>)/sqrt(3) on a four-level system, swapping levels 1 and 3.
chi = PureState.from_amplitudes([0, 1, 1, -1], (4,), ("S",))
det = swap_detectability(chi, SwapSpec(1, 3))
print(f"overlap {det.overlap.real:+.12f}")
print(f"best single-shot discrimination {det.distinguish_prob:.10f}")
print(f"closed form {(1 + math.sqrt(8) / 3) / 2:.10f}")

# The same three coefficients as Schmidt coefficients of an S-E state.
entangled = SchmidtDecomposition.from_coefficients([1, 1, -1])
u_s, u_e = swap_pair(entangled, SwapSpec(0, 2))
print("entangled swap undone by E:", is_envariant(entangled.to_state(), u_s, u_e))
