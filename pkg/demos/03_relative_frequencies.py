"""
Relative frequencies over many trials
=====================================

Repeat the fine-grained measurement ``N`` times. Counting the ``M**N``
equal branches by how many zeros they record gives binomial weights, which
approach a Gaussian centred on ``p0 * N``.
"""

import math

import numpy as np

from envlab.frequency import (
    ensemble_counts,
    ensemble_oracle,
    ensemble_probabilities,
    gaussian_approx,
    rows_to_csv,
    table_rows,
)

# Counting by formula and by writing out the product state agree.
print("formula:", ensemble_counts(2, 1, 3).counts)
print("oracle: ", ensemble_oracle(2, 1, 3).counts)

# Counts are exact integers even when they are astronomically large.
big = ensemble_counts(50, 3, 10)
print("total branches equal 10**50:", big.total == 10 ** 50)

# A plot-ready table.
print(rows_to_csv(table_rows(4, 1, 4), ensemble_counts(4, 1, 4).total))

###############################################################################
# The Gaussian limit
# ------------------

for p0 in (0.1, 0.5):
    for N in (100, 1000, 10000):
        n = np.arange(N + 1)
        pm = ensemble_probabilities(N, p0)
        gap = np.abs(pm - gaussian_approx(N, p0, n)).max()
        mean = math.fsum(n * pm)
        print(f"p0={p0}  N={N:>5}  mean/N={mean / N:.10f}  sup gap={gap:.2e}")
