"""Born's rule by fine-graining and branch counting.

An unequal two-branch state ``a|0>|e0> + b|1>|e1>`` with ``|a|^2 ~ m/M`` is
correlated with a counterweight ``C`` so that ``|0>`` goes with ``m`` and
``|1>`` with ``M - m`` equally weighted counter states. A controlled shift
from ``C`` onto a fresh environment register ``E`` then leaves ``M``
equal-modulus branches across the ``SC|E`` cut. Once every pair of those
branches is shown to be swappable (an envariant swap), each branch gets
``1/M`` and counting gives ``p0 = m/M``.

Index conventions: counter states ``|c_k>`` are ``k = 0..M-1`` with the
first ``m`` recording "0"; the environment starts in basis state 0 and the
c-shift maps ``|c_k>|e_0> -> |c_k>|e_k>``.

Nothing here calls :func:`envlab.hilbert.reduced_density`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from ._config import EPS_EQ, EPS_NORM, EPS_RANK, EPS_RECON, dim_cap
from .envariance import SwapSpec, envariance_residual, swap_pair
from .errors import (
    DegenerateProbabilityError,
    DimensionCapError,
    EnvarianceGateError,
    ValidationError,
)
from .hilbert import LocalUnitary, PureState, SchmidtDecomposition, schmidt

__all__ = [
    "FineGraining",
    "BornResult",
    "equal_coeff_probabilities",
    "subset_probability",
    "rational_approximation",
    "rational_approximation_multi",
    "choose_denominator",
    "build_fine_grained_state",
    "build_fine_grained_state_multi",
    "apply_cshift",
    "cshift_unitary",
    "derive_born",
    "derive_born_multi",
    "born_from_probability",
    "DENSE_VERIFY_MAX",
]

LABELS = ("S", "C", "E")
# above this M the branch check runs on the branch list instead of a dense state
DENSE_VERIFY_MAX = 32
DEFAULT_TOL = 1e-3
MAX_DEFAULT_M = 10 ** 4

EXACT = "exact-rational"
BOUNDED = "bounded-approximation"


def equal_coeff_probabilities(sd: SchmidtDecomposition) -> list[float]:
    """``1/N`` for each of the ``N`` nonzero branches, 0 for absent ones.

    Raises ValidationError if the nonzero moduli are not all equal; unequal
    states go through :func:`derive_born`.
    """
    r = sd.rank
    nonzero = sd.moduli[:r]
    if r == 0 or nonzero.max() - nonzero.min() > EPS_EQ:
        raise ValidationError(
            "moduli are not all equal; use derive_born for the fine-graining route")
    return [1.0 / r] * r + [0.0] * (sd.moduli.size - r)


def subset_probability(sd: SchmidtDecomposition, subset: Sequence[int]) -> float:
    """Probability ``n/N`` of any of ``subset``'s branches (``n`` of them nonzero)."""
    probs = equal_coeff_probabilities(sd)
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise ValidationError(f"subset has repeated branches: {subset}")
    if any(k < 0 or k >= len(probs) for k in subset):
        raise ValidationError(f"subset {subset} out of range for {len(probs)} branches")
    n = sum(1 for k in subset if k < sd.rank)
    return n / sd.rank


@dataclass(frozen=True)
class FineGraining:
    """``p ~ m/M``, with ``m_lower/M <= p <= m_upper/M`` bracketing ``p``."""

    m: int
    M: int
    error_bound: float
    p: float = float("nan")
    m_lower: int = -1
    m_upper: int = -1

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.M, int)):
            raise ValidationError("m and M must be integers")
        if not 1 <= self.m <= self.M - 1:
            raise ValidationError(f"fine-graining needs 1 <= m <= M-1, got m={self.m}, M={self.M}")
        if self.error_bound < 0:
            raise ValidationError("error_bound must be nonnegative")

    @property
    def counts(self) -> tuple[int, int]:
        return (self.m, self.M - self.m)


def _check_M(M) -> int:
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 2:
        raise ValidationError(f"M must be an integer >= 2, got {M!r}")
    return int(M)


def rational_approximation(p: float, M: int) -> FineGraining:
    """Nearest ``m/M`` to ``p`` with ``1 <= m <= M-1``.

    Rounding is decided in exact arithmetic on the float value of ``p``;
    ``error_bound`` is ``|m/M - p|`` evaluated in floating point, so exactly
    representable ratios report 0. Unless clamping kicks in (``p`` within
    ``1/(2M)`` of 0 or 1) the error is at most ``1/(2M)``.
    """
    M = _check_M(M)
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        raise DegenerateProbabilityError(f"p = {p} needs no fine-graining")
    scaled = Fraction(p) * M
    m_lower = math.floor(scaled)
    m = math.floor(scaled + Fraction(1, 2))
    m = min(max(m, 1), M - 1)
    return FineGraining(m=m, M=M, error_bound=abs(m / M - p), p=p,
                        m_lower=m_lower, m_upper=m_lower + 1)


def choose_denominator(p: float, tol: float = DEFAULT_TOL,
                       max_M: int = MAX_DEFAULT_M) -> FineGraining:
    """Smallest ``M <= max_M`` whose approximation error is within ``tol``."""
    for M in range(2, max_M + 1):
        fg = rational_approximation(p, M)
        if fg.error_bound <= tol:
            return fg
    raise ValidationError(f"no M <= {max_M} approximates p = {p!r} within {tol!r}")


def rational_approximation_multi(probs: Sequence[float], M: int) -> tuple[list[int], float]:
    """Integer counts summing to ``M`` with ``counts[k]/M ~ probs[k]``.

    Largest-remainder rounding; every nonzero probability gets at least one
    branch. Returns ``(counts, max |counts[k]/M - probs[k]|)``.
    """
    M = _check_M(M)
    probs = [float(q) for q in probs]
    if any(q < 0 for q in probs) or abs(sum(probs) - 1.0) > EPS_NORM:
        raise ValidationError("probabilities must be nonnegative and sum to 1")
    support = [k for k, q in enumerate(probs) if q > 0]
    if len(support) > M:
        raise ValidationError(f"M = {M} is too small for {len(support)} nonzero outcomes")
    exact = [Fraction(q) * M for q in probs]
    counts = [math.floor(x) for x in exact]
    for k in support:
        counts[k] = max(counts[k], 1)
    # settle the total: add to the largest remainders, take from the smallest
    while sum(counts) < M:
        k = max(support, key=lambda k: (exact[k] - counts[k], -k))
        counts[k] += 1
    while sum(counts) > M:
        k = min((k for k in support if counts[k] > 1), key=lambda k: (exact[k] - counts[k], k))
        counts[k] -= 1
    err = max(abs(c / M - q) for c, q in zip(counts, probs))
    return counts, err


def _branch_list(phases: Sequence[float], counts: Sequence[int]):
    """``(s, c, amplitude)`` for every fine-grained branch, before the c-shift."""
    M = sum(counts)
    out, c = [], 0
    for s, (phi, n) in enumerate(zip(phases, counts)):
        amp = np.exp(1j * phi) / math.sqrt(M)
        for _ in range(n):
            out.append((s, c, amp))
            c += 1
    return out


def build_fine_grained_state_multi(phases: Sequence[float], counts: Sequence[int]) -> PureState:
    """``sum_s exp(i phi_s) sqrt(n_s/M) |s>|C_s>|e_0>`` over ``S (x) C (x) E``.

    ``|C_s>`` is the uniform superposition of the ``n_s`` counter states
    assigned to outcome ``s``; dims are ``(len(counts), M, M)``.
    """
    counts = [int(n) for n in counts]
    if len(phases) != len(counts):
        raise ValidationError("need one phase per outcome")
    if any(n < 0 for n in counts) or sum(counts) < 2:
        raise ValidationError(f"invalid branch counts {counts}")
    M = sum(counts)
    dims = (len(counts), M, M)
    size = math.prod(dims)
    if size > dim_cap():
        raise DimensionCapError(f"fine-grained state with M = {M} needs {size} amplitudes "
                                f"(cap {dim_cap()})")
    t = np.zeros(dims, dtype=complex)
    for s, c, amp in _branch_list(phases, counts):
        t[s, c, 0] = amp
    return PureState(LABELS, dims, t.reshape(-1))


def build_fine_grained_state(phi0: float, phi1: float, fg: FineGraining) -> PureState:
    return build_fine_grained_state_multi((phi0, phi1), fg.counts)


def _shift_index(dc: int, de: int) -> np.ndarray:
    # new[k, e] = old[k, (e - k) mod de]
    return (np.arange(de)[None, :] - np.arange(dc)[:, None]) % de


def apply_cshift(state: PureState, control: str = "C", target: str = "E") -> PureState:
    """Controlled shift ``|c_k>|e> -> |c_k>|e + k mod d_E>``.

    Requires the target register to start in its basis state 0, which turns
    this into ``|c_k>|e_0> -> |c_k>|e_k>``.
    """
    ac, ae = state.axes((control, target))
    dc, de = state.dims[ac], state.dims[ae]
    if de < dc:
        raise ValidationError(f"{target} has dimension {de}, needs at least {dc} for the c-shift")
    t = np.moveaxis(state.tensor, (ac, ae), (-2, -1))
    stray = float(np.sum(np.abs(t[..., 1:]) ** 2))
    if stray > EPS_NORM:
        raise ValidationError(
            f"{target} is not in its initial state |e_0> (weight {stray:.3e} elsewhere)")
    shifted = np.take_along_axis(t, np.broadcast_to(_shift_index(dc, de), t.shape), axis=-1)
    shifted = np.moveaxis(shifted, (-2, -1), (ac, ae))
    return PureState(state.labels, state.dims, shifted.reshape(-1))


def cshift_unitary(dc: int, de: int, labels=("C", "E")) -> LocalUnitary:
    """The c-shift as an explicit ``(dc*de)``-dimensional unitary on ``C (x) E``."""
    u = np.zeros((dc * de, dc * de))
    for k in range(dc):
        for e in range(de):
            u[k * de + (e + k) % de, k * de + e] = 1.0
    return LocalUnitary(labels, u)


@dataclass(frozen=True)
class BornResult:
    """Outcome probabilities from counting ``M`` equiprobable branches.

    ``verification`` records how the swap check ran: ``"dense"`` (Schmidt
    decomposition of the full ``SC|E`` state, every branch pair swapped),
    ``"branch-classes"`` (pairs of distinct branch coefficients, for ``M``
    too large to hold densely) or ``"none"`` (degenerate input).
    """

    probabilities: tuple[float, ...]
    branch_counts: tuple[int, ...]
    M: int
    error_bound: float
    method: str
    verification: str = "dense"

    def to_dict(self) -> dict:
        return {
            "p": list(self.probabilities),
            "counts": list(self.branch_counts),
            "M": self.M,
            "error_bound": self.error_bound,
            "method": self.method,
        }


def _verify_dense(shifted: PureState, M: int) -> None:
    sd = schmidt(shifted, ("S", "C"))
    if sd.rank != M:
        raise EnvarianceGateError(f"expected {M} branches across SC|E, found {sd.rank}")
    target = 1.0 / math.sqrt(M)
    dev = np.abs(sd.moduli[:M] - target).max()
    if dev > EPS_EQ:
        raise EnvarianceGateError(f"fine-grained moduli deviate from 1/sqrt(M) by {dev:.3e}")
    for i, j in combinations(range(M), 2):
        u_s, u_e = swap_pair(sd, SwapSpec(i, j))
        res = envariance_residual(shifted, u_s, u_e)
        if res > EPS_RECON:
            raise EnvarianceGateError(f"branches {i}, {j} are not swappable (residual {res:.3e})")


def _verify_branches(phases: Sequence[float], counts: Sequence[int]) -> None:
    """Swap check on the branch list.

    After the c-shift, branch ``k`` is ``amp_k |s_k, c_k>|e_k>`` with distinct
    ``(s_k, c_k)`` and distinct ``e_k``, so the terms already form a Schmidt
    decomposition. A swap of branches ``i, j`` touches only their two terms;
    its residual on the full state equals the residual on the normalized
    two-branch state times ``sqrt(|a_i|^2 + |a_j|^2)``, and depends only on
    the pair of coefficient values. Checking one pair per pair of distinct
    values covers all ``M(M-1)/2`` pairs.
    """
    M = sum(counts)
    branches = [(s, c, c, amp) for s, c, amp in _branch_list(phases, counts)]
    if len({(s, c) for s, c, _, _ in branches}) != M or len({e for _, _, e, _ in branches}) != M:
        raise EnvarianceGateError("fine-grained branches are not biorthogonal")
    amps = np.array([b[3] for b in branches])
    if np.abs(np.abs(amps) - 1.0 / math.sqrt(M)).max() > EPS_EQ:
        raise EnvarianceGateError("fine-grained branch moduli are not all 1/sqrt(M)")
    classes: dict[complex, int] = {}
    for a in amps:
        classes[complex(a)] = classes.get(complex(a), 0) + 1
    values = list(classes)
    pairs = [(a, b) for a, b in combinations(values, 2)]
    pairs += [(a, a) for a in values if classes[a] > 1]
    for a, b in pairs:
        pair_sd = SchmidtDecomposition.from_coefficients([a, b])
        weight = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        u_s, u_e = swap_pair(pair_sd, SwapSpec(0, 1))
        res = envariance_residual(pair_sd.to_state(), u_s, u_e) * weight
        if res > EPS_RECON:
            raise EnvarianceGateError(f"branch pair ({a}, {b}) is not swappable (residual {res:.3e})")


def _verify(phases: Sequence[float], counts: Sequence[int]) -> str:
    M = sum(counts)
    if M <= DENSE_VERIFY_MAX and len(counts) * M * M <= dim_cap():
        state = build_fine_grained_state_multi(phases, counts)
        _verify_dense(apply_cshift(state), M)
        return "dense"
    _verify_branches(phases, counts)
    return "branch-classes"


def derive_born_multi(amplitudes: Sequence[complex], M: int | None = None,
                      tol: float = DEFAULT_TOL) -> BornResult:
    """N-outcome version of :func:`derive_born`: ``p_k = m_k/M``."""
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    weights = np.abs(amps) ** 2
    if abs(weights.sum() - 1.0) > EPS_NORM:
        raise ValidationError(f"amplitudes are not normalized (sum |a|^2 = {weights.sum()!r})")
    probs = [float(w) if w > EPS_RANK else 0.0 for w in weights]
    support = [k for k, q in enumerate(probs) if q > 0]
    if len(support) == 1:
        k = support[0]
        counts = [0] * len(probs)
        counts[k] = 1
        p = [0.0] * len(probs)
        p[k] = 1.0
        err = max(abs(a - b) for a, b in zip(p, weights))
        return BornResult(tuple(p), tuple(counts), 1, float(err),
                          EXACT if err == 0 else BOUNDED, "none")
    total = sum(probs)
    probs = [q / total for q in probs]
    if M is None:
        for cand in range(max(2, len(support)), MAX_DEFAULT_M + 1):
            counts, _ = rational_approximation_multi(probs, cand)
            err = max(abs(c / cand - w) for c, w in zip(counts, weights))
            if err <= tol:
                M = cand
                break
        else:
            raise ValidationError(f"no M <= {MAX_DEFAULT_M} reaches tolerance {tol!r}")
    counts, _ = rational_approximation_multi(probs, M)
    err = float(max(abs(c / M - w) for c, w in zip(counts, weights)))
    phases = [float(np.angle(a)) for a, c in zip(amps, counts) if c > 0]
    live = [c for c in counts if c > 0]
    verification = _verify(phases, live)
    return BornResult(tuple(c / M for c in counts), tuple(counts), M, err,
                      EXACT if err == 0 else BOUNDED, verification)


def derive_born(alpha: complex, beta: complex, M: int | None = None,
                tol: float = DEFAULT_TOL) -> BornResult:
    """Probabilities of ``|0>`` and ``|1>`` for ``alpha|0>|e0> + beta|1>|e1>``.

    Approximates ``|alpha|^2`` by ``m/M`` (smallest ``M <= 10**4`` within
    ``tol`` when ``M`` is not given), builds the fine-grained state, applies
    the c-shift, confirms every pair of the ``M`` resulting branches is
    envariantly swappable, then counts branches. The result depends on the
    phases of ``alpha`` and ``beta`` only through that check, never in value.

    Raises:
        EnvarianceGateError: a branch pair failed the swap check. This would
            be a bug in the state engine, not a property of the input.
    """
    alpha, beta = complex(alpha), complex(beta)
    p0, p1 = abs(alpha) ** 2, abs(beta) ** 2
    if abs(p0 + p1 - 1.0) > EPS_NORM:
        raise ValidationError(f"|alpha|^2 + |beta|^2 = {p0 + p1!r}, not 1")
    return _born_two(p0, p1, (float(np.angle(alpha)), float(np.angle(beta))), M, tol)


def born_from_probability(p0: float, M: int | None = None, tol: float = DEFAULT_TOL,
                          phases: Sequence[float] = (0.0, 0.0)) -> BornResult:
    """:func:`derive_born` for ``alpha = e^{i phi0} sqrt(p0)``, taking ``p0`` as given.

    Skips the ``sqrt``/square round trip, so ``p0 = k/10`` with ``M = 10``
    is recognized as exact.
    """
    p0 = float(p0)
    if not 0.0 <= p0 <= 1.0:
        raise ValidationError(f"|alpha|^2 must lie in [0, 1], got {p0!r}")
    if len(phases) != 2:
        raise ValidationError("need exactly two phases")
    return _born_two(p0, 1.0 - p0, tuple(float(x) for x in phases), M, tol)


def _born_two(p0, p1, phases, M, tol) -> BornResult:
    if M is not None:
        M = _check_M(M)
    if p0 <= EPS_RANK or p1 <= EPS_RANK:
        p = (1.0, 0.0) if p1 <= EPS_RANK else (0.0, 1.0)
        err = abs(p[0] - p0)
        return BornResult(p, (int(p[0]), int(p[1])), 1, err,
                          EXACT if err == 0 else BOUNDED, "none")
    fg = rational_approximation(p0, M) if M is not None else choose_denominator(p0, tol)
    verification = _verify(phases, fg.counts)
    m, M = fg.m, fg.M
    return BornResult((m / M, (M - m) / M), (m, M - m), M, fg.error_bound,
                      EXACT if fg.error_bound == 0 else BOUNDED, verification)
