"""Envariant transformation pairs and the tests that decide them.

A system-side unitary ``u_S`` is envariant for a joint state when some
``u_E`` on the complementary subsystems undoes it exactly::

    (u_S (x) u_E) |psi> == |psi>

Equality is strict vector equality. :func:`fidelity` is there for
diagnostics but is never used to decide envariance, because it ignores a
global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._config import EPS_CERT, EPS_EQ, EPS_RECON
from .errors import ValidationError
from .hilbert import (
    LocalUnitary,
    PureState,
    SchmidtDecomposition,
    apply_local,
    overlap,
    schmidt,
)

__all__ = [
    "SwapSpec",
    "CounterResult",
    "EnvariantDescription",
    "Detectability",
    "is_envariant",
    "envariance_residual",
    "fidelity",
    "phase_rotation_pair",
    "swap_pair",
    "basis_swap",
    "optimal_counter",
    "envariant_description",
    "swap_detectability",
]

TWO_PI = 2 * np.pi


def _canonical_phase(phase: float) -> float:
    p = math.fmod(float(phase), TWO_PI)
    if p < 0:
        p += TWO_PI
    return 0.0 if p >= TWO_PI else p


@dataclass(frozen=True)
class SwapSpec:
    """Exchange of branches ``i`` and ``j`` carrying phase ``exp(i*phase)``.

    The phase is reduced to ``[0, 2*pi)``; adding any multiple of ``2*pi``
    gives the same unitary.
    """

    i: int
    j: int
    phase: float = 0.0

    def __post_init__(self):
        for name in ("i", "j"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise ValidationError(f"swap index {name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.i == self.j:
            raise ValidationError(f"swap needs two distinct branches, got i = j = {self.i}")
        object.__setattr__(self, "phase", _canonical_phase(self.phase))

    def check_bound(self, bound: int, what: str = "Schmidt rank") -> None:
        if max(self.i, self.j) >= bound:
            raise ValidationError(
                f"swap ({self.i}, {self.j}) out of range for {what} {bound}")


def _check_disjoint(state: PureState, u_s: LocalUnitary, u_e: LocalUnitary) -> None:
    state.axes(u_s.target)
    state.axes(u_e.target)
    shared = set(u_s.target) & set(u_e.target)
    if shared:
        raise ValidationError(
            f"system and environment unitaries both act on {sorted(shared)}")


def envariance_residual(state: PureState, u_s: LocalUnitary, u_e: LocalUnitary) -> float:
    """``||(u_S (x) u_E)|psi> - |psi>||``."""
    _check_disjoint(state, u_s, u_e)
    out = apply_local(apply_local(state, u_s), u_e)
    return float(np.linalg.norm(out.amplitudes - state.amplitudes))


def is_envariant(state: PureState, u_s: LocalUnitary, u_e: LocalUnitary,
                 tol: float = EPS_RECON) -> bool:
    return envariance_residual(state, u_s, u_e) <= tol


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2``; blind to global phase, so diagnostic only."""
    return abs(overlap(a, b)) ** 2


def _swap_matrix(basis: np.ndarray, i: int, j: int, theta: float) -> np.ndarray:
    """``exp(i theta)|b_i><b_j| + h.c.``, identity on the orthogonal complement."""
    b = basis[:, [i, j]]
    w = np.exp(1j * theta)
    block = np.array([[-1.0, w], [np.conj(w), -1.0]])
    u = (b @ block) @ b.conj().T
    u.flat[::u.shape[0] + 1] += 1.0
    return u


def phase_rotation_pair(sd: SchmidtDecomposition, phases: Sequence[float]
                        ) -> tuple[LocalUnitary, LocalUnitary]:
    """``u_S`` multiplies branch ``k`` by ``exp(i phases[k])``; ``u_E`` by the conjugate.

    Both act as the identity outside the span of the ``rank`` nonzero branches.
    """
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if phases.size != sd.rank:
        raise ValidationError(f"got {phases.size} phases for Schmidt rank {sd.rank}")
    r = sd.rank
    sys_b, env_b = sd.system_basis[:, :r], sd.env_basis[:, :r]
    w = np.exp(1j * phases) - 1.0
    u_s = np.eye(sd.system_dim, dtype=complex) + (sys_b * w) @ sys_b.conj().T
    u_e = np.eye(sd.env_dim, dtype=complex) + (env_b * np.conj(w)) @ env_b.conj().T
    return (LocalUnitary._unchecked(sd.system_labels, u_s),
            LocalUnitary._unchecked(sd.env_labels, u_e))


def swap_pair(sd: SchmidtDecomposition, spec: SwapSpec) -> tuple[LocalUnitary, LocalUnitary]:
    """Swap of Schmidt branches ``i``, ``j`` and the matching counterswap.

    ``u_S = e^{i f}|s_i><s_j| + h.c.`` and ``u_E = e^{i g}|e_i><e_j| + h.c.``
    with ``g = phi_i - phi_j - f`` (branch phases ``phi`` from ``sd``), both
    completed by the identity. The pair is built whatever the moduli; it
    restores the state only when ``|a_i| == |a_j|``.
    """
    spec.check_bound(sd.rank)
    i, j = spec.i, spec.j
    counter_phase = _canonical_phase(sd.phases[i] - sd.phases[j] - spec.phase)
    u_s = _swap_matrix(sd.system_basis, i, j, spec.phase)
    u_e = _swap_matrix(sd.env_basis, i, j, counter_phase)
    return (LocalUnitary._unchecked(sd.system_labels, u_s),
            LocalUnitary._unchecked(sd.env_labels, u_e))


def basis_swap(dim: int, spec: SwapSpec) -> np.ndarray:
    """``swap_pair``'s system matrix in the computational basis of one subsystem."""
    spec.check_bound(dim, "dimension")
    return _swap_matrix(np.eye(dim, dtype=complex), spec.i, spec.j, spec.phase)


@dataclass(frozen=True, eq=False)
class CounterResult:
    """Best environment-side correction for a given ``u_S``.

    ``certificate`` is the nuclear norm of ``C^dag u_S C`` (``C`` the
    system-by-environment coefficient matrix), i.e. the largest achievable
    ``Re <psi|(u_S (x) u_E)|psi>``; ``residual`` is the matching minimum
    distance ``sqrt(2 - 2*certificate)``.
    """

    counter: LocalUnitary = field(repr=False)
    residual: float
    certificate: float

    @property
    def envariant(self) -> bool:
        return abs(1.0 - self.certificate) <= EPS_CERT


def optimal_counter(state: PureState, u_s: LocalUnitary,
                    env: Sequence[str] | None = None) -> CounterResult:
    """Find the ``u_E`` minimizing ``||(u_S (x) u_E)|psi> - |psi>||``.

    The environment is every subsystem outside ``u_s.target``; passing
    ``env`` only asserts that.
    """
    system = u_s.target
    rest = tuple(lab for lab in state.labels if lab not in system)
    state.axes(system)
    if env is not None:
        env = (env,) if isinstance(env, str) else tuple(env)
        if set(env) != set(rest) or len(env) != len(rest):
            raise ValidationError(
                f"optimal_counter needs a bipartite cut: environment {env} is not "
                f"the complement {rest} of the system {system}")
        rest = env
    if not rest:
        raise ValidationError("u_S acts on every subsystem; there is no environment")
    d_sys = state.group_dim(system)
    if u_s.dim != d_sys:
        raise ValidationError(f"u_S has dimension {u_s.dim}, system group has {d_sys}")
    # columns follow the environment labels in the order of ``rest``
    c = state.matrix(system + rest).reshape(d_sys, -1)
    a = c.conj().T @ u_s.matrix @ c
    left, sv, right_h = np.linalg.svd(a)
    certificate = float(np.sum(sv))
    # maximizer of Re tr(A X) is X = V U^dag; u_E = X^T
    x = right_h.conj().T @ left.conj().T
    residual = math.sqrt(max(0.0, 2.0 - 2.0 * certificate))
    return CounterResult(LocalUnitary(rest, x.T), residual, certificate)


@dataclass(frozen=True, eq=False)
class EnvariantDescription:
    """What survives once Schmidt phases and the environment basis are dropped.

    ``system_basis[:, k]`` pairs with ``moduli[k]``; only nonzero branches
    are kept.
    """

    moduli: np.ndarray
    system_basis: np.ndarray = field(repr=False)
    system_labels: tuple[str, ...]

    @property
    def pairs(self) -> list[tuple[float, np.ndarray]]:
        return [(float(m), self.system_basis[:, k]) for k, m in enumerate(self.moduli)]

    def spectral_projectors(self, tol: float = EPS_EQ) -> list[tuple[float, np.ndarray]]:
        """Projector onto each group of equal moduli; basis-choice independent."""
        out, start = [], 0
        n = self.moduli.size
        for k in range(1, n + 1):
            if k == n or self.moduli[start] - self.moduli[k] > tol:
                block = self.system_basis[:, start:k]
                out.append((float(self.moduli[start]), block @ block.conj().T))
                start = k
        return out

    def agrees_with(self, other: "EnvariantDescription", mod_tol: float = EPS_EQ,
                    proj_tol: float = EPS_RECON) -> bool:
        if self.moduli.shape != other.moduli.shape:
            return False
        if np.abs(self.moduli - other.moduli).max(initial=0.0) > mod_tol:
            return False
        mine, theirs = self.spectral_projectors(mod_tol), other.spectral_projectors(mod_tol)
        if len(mine) != len(theirs):
            return False
        return all(np.abs(p - q).max() <= proj_tol for (_, p), (_, q) in zip(mine, theirs))


def envariant_description(state: PureState, cut) -> EnvariantDescription:
    sd = schmidt(state, cut)
    r = sd.rank
    return EnvariantDescription(sd.moduli[:r].copy(), sd.system_basis[:, :r].copy(),
                                sd.system_labels)


class Detectability(NamedTuple):
    overlap: complex
    distinguish_prob: float


def swap_detectability(chi: PureState, spec: SwapSpec) -> Detectability:
    """How well a basis swap on a lone (unentangled) state can be detected.

    ``overlap = <chi|u_swap|chi>``; ``distinguish_prob`` is the optimal
    single-shot success probability for telling ``chi`` from the swapped
    state with equal priors, ``(1 + sqrt(1 - |overlap|^2)) / 2``.
    """
    if len(chi.labels) != 1:
        raise ValidationError(
            f"swap_detectability takes a single-subsystem state; got subsystems {chi.labels}. "
            "For entangled states use swap_pair/is_envariant.")
    u = basis_swap(chi.dims[0], spec)
    ov = complex(np.vdot(chi.amplitudes, u @ chi.amplitudes))
    prob = (1.0 + math.sqrt(max(0.0, 1.0 - abs(ov) ** 2))) / 2.0
    return Detectability(ov, prob)
