"""Seeded random states and unitaries for sweeps and tests."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .hilbert import LocalUnitary, PureState


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random ``dim x dim`` unitary."""
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def random_local_unitary(rng: np.random.Generator, target, dim: int) -> LocalUnitary:
    return LocalUnitary(target, random_unitary(rng, dim))


def random_state(rng: np.random.Generator, dims, labels) -> PureState:
    size = int(np.prod(dims))
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return PureState.from_amplitudes(v, dims, labels)


def random_moduli(rng: np.random.Generator, rank: int, min_gap: float = 0.02) -> np.ndarray:
    """Normalized descending moduli with deliberate ties.

    Values are drawn from a small palette of levels separated by at least
    ``min_gap`` before normalization, so any two moduli are either exactly
    equal or clearly different.
    """
    levels = int(rng.integers(1, rank + 1))
    while True:
        palette = np.sort(rng.uniform(0.2, 1.0, size=levels))
        if levels == 1 or np.diff(palette).min() >= min_gap:
            break
    values = palette[rng.integers(0, levels, size=rank)]
    return np.sort(values / np.linalg.norm(values))[::-1]


def random_schmidt_state(rng: np.random.Generator, moduli, d_sys: int, d_env: int,
                         labels=("S", "E")) -> PureState:
    """``(U_S (x) U_E) sum_k moduli[k] |k>|k>`` with Haar-random ``U_S``, ``U_E``."""
    moduli = np.asarray(moduli, dtype=float)
    c = np.zeros((d_sys, d_env), dtype=complex)
    c[np.arange(moduli.size), np.arange(moduli.size)] = moduli
    c = random_unitary(rng, d_sys) @ c @ random_unitary(rng, d_env).T
    return PureState(labels, (d_sys, d_env), c.reshape(-1))
