"""Relative frequencies over ensembles of fine-grained triplets.

Each of ``N`` independent ``SCE`` triplets carries ``M`` equal-modulus
branches, ``m`` of which record "0". Counting product branches with ``n``
zeros gives ``nu(n) = C(N, n) m^n (M - m)^(N - n)`` out of ``M^N``.
Counts are exact Python integers; probabilities are floats.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._config import EPS_RANK
from .errors import ValidationError
from .finegrain import apply_cshift, build_fine_grained_state_multi
from .hilbert import tensor

__all__ = [
    "EnsembleDistribution",
    "ensemble_counts",
    "ensemble_probabilities",
    "gaussian_approx",
    "ensemble_oracle",
    "triplet_state",
    "table_rows",
    "rows_to_csv",
    "ORACLE_MAX_N",
    "ORACLE_MAX_M",
]

ORACLE_MAX_N = 3
ORACLE_MAX_M = 3


@dataclass(frozen=True, eq=False)
class EnsembleDistribution:
    """Branch counts ``counts[n] = nu(n)`` and ``probabilities[n] = nu(n)/M^N``."""

    N: int
    m: int
    M: int
    counts: tuple[int, ...]
    probabilities: np.ndarray

    @property
    def total(self) -> int:
        return sum(self.counts)


def _check_mM(m: int, M: int) -> None:
    for name, v in (("m", m), ("M", M)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
            raise ValidationError(f"{name} must be an integer, got {v!r}")
    if not 1 <= m < M:
        raise ValidationError(f"need 1 <= m < M, got m={m}, M={M}")


def _check_N(N: int) -> None:
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise ValidationError(f"N must be a positive integer, got {N!r}")


def ensemble_counts(N: int, m: int, M: int) -> EnsembleDistribution:
    _check_N(N)
    _check_mM(m, M)
    N, m, M = int(N), int(m), int(M)
    counts = tuple(math.comb(N, n) * m ** n * (M - m) ** (N - n) for n in range(N + 1))
    total = M ** N
    # int / int is correctly rounded even for huge operands
    probs = np.array([c / total for c in counts])
    return EnsembleDistribution(N, m, M, counts, probs)


# Loader's saddle-point binomial: tabulated Stirling remainders for small n, series above.
_STIRLERR_SMALL = np.array([0.0] + [
    math.lgamma(n + 1) - (n + 0.5) * math.log(n) + n - 0.5 * math.log(2 * math.pi)
    for n in range(1, 16)
])


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """``log(n!) - log(sqrt(2 pi n) (n/e)^n)`` for integer ``n >= 0``."""
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n <= 15
    out[small] = _STIRLERR_SMALL[n[small].astype(int)]
    big = n[~small]
    if big.size:
        s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
        nn = big * big
        series = np.where(
            big > 500, (s0 - s1 / nn) / big,
            np.where(big > 80, (s0 - (s1 - s2 / nn) / nn) / big,
                     np.where(big > 35, (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / big,
                              (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / big)))
        out[~small] = series
    return out


def _bd0(x: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Deviance term ``x log(x/mu) + mu - x`` without cancellation near ``x = mu``."""
    x = np.asarray(x, dtype=float)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), x.shape)
    out = np.empty_like(x)
    close = np.abs(x - mu) < 0.1 * (x + mu)
    xc, mc = x[close], mu[close]
    if xc.size:
        v = (xc - mc) / (xc + mc)
        s = (xc - mc) * v
        ej = 2 * xc * v
        v2 = v * v
        # |v| < 0.1 so 30 terms are far beyond double precision
        for j in range(1, 30):
            ej = ej * v2
            s = s + ej / (2 * j + 1)
        out[close] = s
    xf, mf = x[~close], mu[~close]
    out[~close] = xf * np.log(xf / mf) + mf - xf
    return out


def _binom_logpmf(N: int, p0: float) -> np.ndarray:
    n = np.arange(N + 1, dtype=float)
    q0 = 1.0 - p0
    out = np.full(N + 1, -np.inf)
    if p0 == 0.0:
        out[0] = 0.0
        return out
    if q0 == 0.0:
        out[N] = 0.0
        return out
    out[0] = N * math.log1p(-p0)
    out[N] = N * math.log(p0)
    if N >= 2:
        k = n[1:-1]
        rest = N - k
        out[1:-1] = (_stirlerr(np.array([N]))[0] - _stirlerr(k) - _stirlerr(rest)
                     - _bd0(k, N * p0) - _bd0(rest, N * q0)
                     + 0.5 * np.log(N / (2 * np.pi * k * rest)))
    return out


def ensemble_probabilities(N: int, p0: float) -> np.ndarray:
    """Binomial ``p(n) = C(N, n) p0^n (1 - p0)^(N - n)`` for ``n = 0..N``.

    Evaluated in log space with Loader's saddle-point expansion, which stays
    accurate to a few ulps where a plain log-gamma difference loses about
    ``log10(N)`` digits.
    """
    _check_N(N)
    p0 = float(p0)
    if not 0.0 <= p0 <= 1.0:
        raise ValidationError(f"p0 must lie in [0, 1], got {p0!r}")
    return np.exp(_binom_logpmf(int(N), p0))


def gaussian_approx(N: int, p0: float, n) -> np.ndarray | float:
    """Normal density with mean ``p0 N`` and standard deviation ``sqrt(N p0 (1 - p0))``."""
    _check_N(N)
    p0 = float(p0)
    if not 0.0 < p0 < 1.0:
        raise ValidationError(f"Gaussian limit needs 0 < p0 < 1, got {p0!r}")
    sigma = math.sqrt(N * p0 * (1.0 - p0))
    z = (np.asarray(n, dtype=float) - p0 * N) / sigma
    out = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * sigma)
    return float(out) if np.ndim(out) == 0 else out


def triplet_state(m: int, M: int, phases: Sequence[float] = (0.0, 0.0)):
    """One fine-grained, c-shifted ``SCE`` triplet."""
    _check_mM(m, M)
    return apply_cshift(build_fine_grained_state_multi(phases, (m, M - m)))


def ensemble_oracle(N: int, m: int, M: int) -> EnsembleDistribution:
    """Count branches by writing out the ``N``-fold product state explicitly.

    Every basis term with nonzero amplitude is a branch; one with ``n``
    counter indices below ``m`` recorded ``n`` zeros. Small sizes only.
    """
    _check_N(N)
    _check_mM(m, M)
    if N > ORACLE_MAX_N or M > ORACLE_MAX_M:
        raise ValidationError(
            f"oracle is capped at N <= {ORACLE_MAX_N}, M <= {ORACLE_MAX_M}; got N={N}, M={M}")
    one = triplet_state(m, M)
    copies = [one.relabel([f"{lab}{ell}" for lab in one.labels]) for ell in range(1, N + 1)]
    big = tensor(copies)
    counter_axes = [big.labels.index(f"C{ell}") for ell in range(1, N + 1)]
    tally = [0] * (N + 1)
    for flat in np.flatnonzero(np.abs(big.amplitudes) > EPS_RANK):
        idx = np.unravel_index(flat, big.dims)
        zeros = sum(1 for a in counter_axes if idx[a] < m)
        tally[zeros] += 1
    total = sum(tally)
    probs = np.array([c / total for c in tally])
    return EnsembleDistribution(N, m, M, tuple(tally), probs)


def table_rows(N: int, m: int, M: int) -> list[tuple[int, int, float, float]]:
    """Rows ``(n, nu(n), p(n), gaussian(n))`` for plotting, ``p0 = m/M``."""
    dist = ensemble_counts(N, m, M)
    p0 = m / M
    gauss = gaussian_approx(N, p0, np.arange(N + 1))
    return [(n, dist.counts[n], float(dist.probabilities[n]), float(gauss[n]))
            for n in range(N + 1)]


def rows_to_csv(rows, total: int | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "count", "probability", "gaussian"])
    for n, count, prob, gauss in rows:
        w.writerow([n, count, repr(prob), repr(gauss)])
    if total is not None:
        w.writerow(["total", total, repr(math.fsum(r[2] for r in rows)), ""])
    return buf.getvalue()
