"""Dense pure states on labelled tensor products of finite subsystems.

Amplitudes are stored flat in row-major order with the first label varying
slowest, so ``state.tensor[i, j, k]`` is the amplitude of ``|i>|j>|k>``.
This layout is what :func:`numpy.kron` produces and what the JSON state
file format uses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from ._config import (
    EPS_EQ,
    EPS_HERM,
    EPS_NORM,
    EPS_ORTH,
    EPS_PSD,
    EPS_RANK,
    EPS_UNITARY,
    dim_cap,
)
from .errors import DimensionCapError, ValidationError

Labels = Union[str, Sequence[str]]

__all__ = [
    "PureState",
    "LocalUnitary",
    "SchmidtDecomposition",
    "DensityMatrix",
    "tensor",
    "apply_local",
    "schmidt",
    "reduced_density",
    "overlap",
    "split_cut",
    "state_to_dict",
    "state_from_dict",
    "load_state",
    "save_state",
]


def _as_labels(labels: Labels) -> tuple[str, ...]:
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


def _check_cap(size: int) -> None:
    cap = dim_cap()
    if size > cap:
        raise DimensionCapError(f"{size} amplitudes exceeds the dimension cap of {cap}")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector over named subsystems.

    Args:
        labels: subsystem names, unique, e.g. ``("S", "E")``.
        dims: subsystem dimensions aligned with ``labels``.
        amplitudes: flat complex vector of length ``prod(dims)``.
    """

    labels: tuple[str, ...]
    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = _as_labels(self.labels)
        dims = tuple(int(d) for d in self.dims)
        if not labels:
            raise ValidationError("a state needs at least one subsystem")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"subsystem labels must be unique, got {labels}")
        if len(labels) != len(dims):
            raise ValidationError(f"{len(labels)} labels but {len(dims)} dims")
        if any(d < 1 for d in dims):
            raise ValidationError(f"dims must be positive, got {dims}")
        size = math.prod(dims)
        _check_cap(size)
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != size:
            raise ValidationError(
                f"expected {size} amplitudes for dims {dims}, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > EPS_NORM:
            raise ValidationError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_amplitudes(cls, amplitudes, dims, labels, normalize: bool = True) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValidationError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(labels, dims, amps)

    @classmethod
    def basis(cls, index: Sequence[int], dims, labels) -> "PureState":
        """Computational basis state ``|index[0]>|index[1]>...``."""
        dims = tuple(dims)
        amps = np.zeros(math.prod(dims), dtype=complex)
        amps[np.ravel_multi_index(tuple(index), dims)] = 1.0
        return cls(labels, dims, amps)

    @property
    def subsystem_dims(self) -> tuple[int, ...]:
        return self.dims

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def axes(self, labels: Labels) -> tuple[int, ...]:
        labels = _as_labels(labels)
        missing = [lab for lab in labels if lab not in self.labels]
        if missing:
            raise ValidationError(f"unknown subsystem label(s) {missing}; state has {self.labels}")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"repeated labels in group {labels}")
        return tuple(self.labels.index(lab) for lab in labels)

    def group_dim(self, labels: Labels) -> int:
        return math.prod(self.dims[a] for a in self.axes(labels))

    def relabel(self, labels: Sequence[str]) -> "PureState":
        return PureState(tuple(labels), self.dims, self.amplitudes)

    def matrix(self, system: Labels) -> np.ndarray:
        """Coefficient matrix ``C[a, b]`` with rows on ``system``, columns on the rest.

        Within each group, indices follow the order the labels are given in
        (rest: the state's own order).
        """
        sys_axes = self.axes(system)
        env_axes = tuple(a for a in range(len(self.dims)) if a not in sys_axes)
        t = np.transpose(self.tensor, sys_axes + env_axes)
        d_sys = math.prod(self.dims[a] for a in sys_axes)
        return t.reshape(d_sys, -1)


def split_cut(state: PureState, cut) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Resolve a bipartition of ``state.labels``.

    ``cut`` is either the system group (a label or sequence of labels; its
    complement becomes the environment) or an explicit pair
    ``(system_labels, env_labels)`` that must cover every label exactly once.
    """
    if (isinstance(cut, (tuple, list)) and len(cut) == 2
            and all(not isinstance(g, str) for g in cut)):
        system, env = _as_labels(cut[0]), _as_labels(cut[1])
        state.axes(system + env)
        if set(system) | set(env) != set(state.labels):
            raise ValidationError(
                f"cut {system}|{env} does not cover all subsystems {state.labels}")
    else:
        system = _as_labels(cut)
        state.axes(system)
        env = tuple(lab for lab in state.labels if lab not in system)
    if not system or not env:
        raise ValidationError(f"both sides of the cut must be nonempty, got {system}|{env}")
    return system, env


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """Unitary acting on one subsystem (or a group of them), identity elsewhere.

    For a group target the matrix acts on the joint index of the listed
    subsystems, in the listed order.
    """

    target: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        target = _as_labels(self.target)
        if not target:
            raise ValidationError("a local unitary needs a target subsystem")
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"unitary must be a square matrix, got shape {mat.shape}")
        dev = np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max(initial=0.0)
        if dev > EPS_UNITARY:
            raise ValidationError(f"matrix is not unitary (max |U^dag U - 1| = {dev:.3e})")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def _unchecked(cls, target: Labels, matrix: np.ndarray) -> "LocalUnitary":
        """Skip the unitarity check, for matrices unitary by construction
        (built from a basis that was itself validated as orthonormal)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "target", _as_labels(target))
        object.__setattr__(obj, "matrix", _frozen(matrix))
        return obj

    @classmethod
    def identity(cls, target: Labels, dim: int) -> "LocalUnitary":
        return cls(target, np.eye(dim))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "LocalUnitary":
        return LocalUnitary(self.target, self.matrix.conj().T)


def apply_local(state: PureState, u: LocalUnitary) -> PureState:
    """Apply ``u`` along its target axes and leave every other subsystem alone."""
    axes = state.axes(u.target)
    d = math.prod(state.dims[a] for a in axes)
    if u.dim != d:
        raise ValidationError(
            f"unitary of dimension {u.dim} does not match target {u.target} of dimension {d}")
    n = len(axes)
    if axes == tuple(range(n)):
        out = u.matrix @ state.amplitudes.reshape(d, -1)
    elif axes == tuple(range(len(state.dims) - n, len(state.dims))):
        out = state.amplitudes.reshape(-1, d) @ u.matrix.T
    else:
        front = tuple(range(n))
        t = np.moveaxis(state.tensor, axes, front)
        shape = t.shape
        t = (u.matrix @ t.reshape(d, -1)).reshape(shape)
        out = np.moveaxis(t, front, axes)
    return PureState(state.labels, state.dims, out.reshape(-1))


def tensor(states: Iterable[PureState]) -> PureState:
    """Tensor product; labels and dims concatenate in the given order."""
    states = list(states)
    if not states:
        raise ValidationError("tensor() needs at least one state")
    labels = tuple(lab for s in states for lab in s.labels)
    dims = tuple(d for s in states for d in s.dims)
    _check_cap(math.prod(dims))
    if len(set(labels)) != len(labels):
        raise ValidationError(f"labels collide in tensor product: {labels}; relabel first")
    amps = states[0].amplitudes
    for s in states[1:]:
        amps = np.kron(amps, s.amplitudes)
    return PureState(labels, dims, amps)


def overlap(a: PureState, b: PureState) -> complex:
    """Inner product ``<a|b>``."""
    if a.dims != b.dims:
        raise ValidationError(f"shape mismatch: {a.dims} vs {b.dims}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _check_orthonormal(vectors: np.ndarray, what: str) -> None:
    gram = vectors.conj().T @ vectors
    dev = np.abs(gram - np.eye(gram.shape[0])).max(initial=0.0)
    if dev > EPS_ORTH:
        raise ValidationError(f"{what} is not orthonormal (max deviation {dev:.3e})")


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """``sum_k moduli[k] exp(i phases[k]) |sigma_k>|eps_k>`` across one cut.

    ``system_basis[:, k]`` is ``|sigma_k>`` and ``env_basis[:, k]`` is
    ``|eps_k>``. All ``min(d_sys, d_env)`` terms are kept; ``rank`` counts
    the moduli above ``EPS_RANK``. States produced by :func:`schmidt` have
    all phases zero (they live in ``env_basis``); :meth:`from_coefficients`
    keeps explicit phases.
    """

    moduli: np.ndarray
    phases: np.ndarray
    system_basis: np.ndarray = field(repr=False)
    env_basis: np.ndarray = field(repr=False)
    system_labels: tuple[str, ...]
    env_labels: tuple[str, ...]
    system_dims: tuple[int, ...]
    env_dims: tuple[int, ...]
    rank: int = -1

    def __post_init__(self):
        moduli = np.asarray(self.moduli, dtype=float)
        phases = np.mod(np.asarray(self.phases, dtype=float), 2 * np.pi)
        # mod can return exactly 2*pi for tiny negative input
        phases[phases >= 2 * np.pi] = 0.0
        sys_b = np.asarray(self.system_basis, dtype=complex)
        env_b = np.asarray(self.env_basis, dtype=complex)
        k = moduli.size
        if phases.size != k or sys_b.shape[1] != k or env_b.shape[1] != k:
            raise ValidationError("moduli, phases and bases must have matching term counts")
        if sys_b.shape[0] != math.prod(self.system_dims) or env_b.shape[0] != math.prod(self.env_dims):
            raise ValidationError("basis vector lengths do not match subsystem dims")
        if np.any(moduli < 0):
            raise ValidationError("Schmidt moduli must be nonnegative")
        if np.any(np.diff(moduli) > EPS_EQ):
            raise ValidationError("Schmidt moduli must be sorted in descending order")
        total = float(np.sum(moduli ** 2))
        if abs(total - 1.0) > EPS_NORM:
            raise ValidationError(f"squared moduli sum to {total!r}, not 1")
        _check_orthonormal(sys_b, "system basis")
        _check_orthonormal(env_b, "environment basis")
        for name, val in (("moduli", moduli), ("phases", phases),
                          ("system_basis", sys_b), ("env_basis", env_b)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "rank", int(np.count_nonzero(moduli > EPS_RANK)))
        for name in ("system_labels", "env_labels"):
            object.__setattr__(self, name, _as_labels(getattr(self, name)))
        for name in ("system_dims", "env_dims"):
            object.__setattr__(self, name, tuple(int(d) for d in getattr(self, name)))

    @classmethod
    def from_coefficients(cls, coefficients, labels=("S", "E")) -> "SchmidtDecomposition":
        """Diagonal state ``sum_k c_k |k>|k>`` with the phases of ``c_k`` kept explicit.

        Coefficients are normalized. Branches are reordered by descending
        modulus with a stable sort, so equal-modulus inputs keep their order.
        """
        c = np.asarray(coefficients, dtype=complex).reshape(-1)
        norm = np.linalg.norm(c)
        if norm == 0:
            raise ValidationError("coefficients are all zero")
        c = c / norm
        order = np.argsort(-np.abs(c), kind="stable")
        n = c.size
        eye = np.eye(n, dtype=complex)
        return cls(
            moduli=np.abs(c)[order],
            phases=np.angle(c)[order],
            system_basis=eye[:, order],
            env_basis=eye[:, order],
            system_labels=(labels[0],),
            env_labels=(labels[1],),
            system_dims=(n,),
            env_dims=(n,),
        )

    @property
    def coefficients(self) -> np.ndarray:
        return self.moduli * np.exp(1j * self.phases)

    @property
    def system_dim(self) -> int:
        return self.system_basis.shape[0]

    @property
    def env_dim(self) -> int:
        return self.env_basis.shape[0]

    def coefficient_matrix(self) -> np.ndarray:
        return (self.system_basis * self.coefficients) @ self.env_basis.T

    def to_state(self, labels: Sequence[str] | None = None) -> PureState:
        """Rebuild the joint state, in ``labels`` order if given (default system then env)."""
        own = self.system_labels + self.env_labels
        dims = self.system_dims + self.env_dims
        t = self.coefficient_matrix().reshape(dims)
        if labels is not None:
            labels = tuple(labels)
            if sorted(labels) != sorted(own):
                raise ValidationError(f"labels {labels} do not match {own}")
            perm = [own.index(lab) for lab in labels]
            t = np.transpose(t, perm)
            own, dims = labels, tuple(dims[p] for p in perm)
        return PureState(own, dims, t.reshape(-1))

    def reconstruct(self, like: PureState) -> PureState:
        return self.to_state(like.labels)


def _first_significant(v: np.ndarray, thresh: float = 1e-8) -> int:
    big = np.flatnonzero(np.abs(v) > thresh)
    return int(big[0]) if big.size else 0


def _canonical_order(moduli: np.ndarray, sys_b: np.ndarray) -> np.ndarray:
    """Descending moduli; ties (within EPS_EQ) ordered by the first significant
    system-basis entry: earlier index first, then larger real part."""
    keys = []
    for k in range(moduli.size):
        idx = _first_significant(sys_b[:, k])
        keys.append((idx, -sys_b[idx, k].real))
    order = list(range(moduli.size))
    blocks, start = [], 0
    for k in range(1, moduli.size + 1):
        if k == moduli.size or moduli[start] - moduli[k] > EPS_EQ:
            blocks.append(order[start:k])
            start = k
    return np.array([k for blk in blocks for k in sorted(blk, key=keys.__getitem__)], dtype=int)


def schmidt(state: PureState, cut) -> SchmidtDecomposition:
    """Schmidt decomposition across ``cut`` (see :func:`split_cut`).

    Canonical form: moduli descending, each ``|sigma_k>`` gauged so its first
    significant entry is real and positive, the corresponding phase pushed
    into ``|eps_k>``. The stored phases are therefore all zero.
    """
    system, env = split_cut(state, cut)
    c = state.matrix(system)
    if np.linalg.norm(c) == 0:
        raise ValidationError("cannot decompose the zero state")
    u, s, vh = np.linalg.svd(c, full_matrices=False)
    sys_b = u
    env_b = vh.T
    for k in range(s.size):
        idx = _first_significant(sys_b[:, k])
        val = sys_b[idx, k]
        if abs(val) > 0:
            g = val / abs(val)
            sys_b[:, k] = sys_b[:, k] / g
            env_b[:, k] = env_b[:, k] * g
    order = _canonical_order(s, sys_b)
    s, sys_b, env_b = s[order], sys_b[:, order], env_b[:, order]
    # last-bit noise in the norm of an already-validated state
    s = s / np.linalg.norm(s)
    return SchmidtDecomposition(
        moduli=s,
        phases=np.zeros(s.size),
        system_basis=sys_b,
        env_basis=env_b,
        system_labels=system,
        env_labels=env,
        system_dims=tuple(state.dims[a] for a in state.axes(system)),
        env_dims=tuple(state.dims[a] for a in state.axes(env)),
    )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator on ``labels``."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = math.prod(self.dims)
        if mat.shape != (d, d):
            raise ValidationError(f"density matrix shape {mat.shape} does not match dims {self.dims}")
        if np.abs(mat - mat.conj().T).max() > EPS_HERM:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > EPS_NORM:
            raise ValidationError(f"density matrix trace is {tr!r}")
        if np.linalg.eigvalsh(mat).min() < -EPS_PSD:
            raise ValidationError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "labels", _as_labels(self.labels))
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "matrix", _frozen(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Descending eigenvalues."""
        return np.linalg.eigvalsh(self.matrix)[::-1]


def reduced_density(state: PureState, keep: Labels) -> DensityMatrix:
    """Partial trace over everything outside ``keep``.

    Diagnostic only: reading the diagonal as probabilities already assumes
    the Born rule, so nothing in :mod:`envlab.finegrain` calls this.
    """
    keep = _as_labels(keep)
    c = state.matrix(keep)
    rho = c @ c.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(keep, tuple(state.dims[a] for a in state.axes(keep)), rho)


def state_to_dict(state: PureState) -> dict:
    return {
        "labels": list(state.labels),
        "dims": list(state.dims),
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def state_from_dict(data) -> PureState:
    """Parse the JSON state format, naming the offending field on error."""
    if not isinstance(data, dict):
        raise ValidationError("state file: top level must be a JSON object")
    for key in ("labels", "dims", "amplitudes"):
        if key not in data:
            raise ValidationError(f"state file: missing field '{key}'")
    labels, dims, amps = data["labels"], data["dims"], data["amplitudes"]
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise ValidationError("state file: field 'labels' must be a list of strings")
    if (not isinstance(dims, list)
            or not all(isinstance(x, int) and not isinstance(x, bool) and x > 0 for x in dims)):
        raise ValidationError("state file: field 'dims' must be a list of positive integers")
    if not isinstance(amps, list):
        raise ValidationError("state file: field 'amplitudes' must be a list of [re, im] pairs")
    values = []
    for i, pair in enumerate(amps):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise ValidationError(f"state file: field 'amplitudes[{i}]' must be a [re, im] pair")
        values.append(complex(pair[0], pair[1]))
    try:
        return PureState(tuple(labels), tuple(dims), np.array(values, dtype=complex))
    except ValidationError as exc:
        raise ValidationError(f"state file: {exc}") from None


def load_state(path) -> PureState:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"state file {path}: invalid JSON ({exc})") from None
    return state_from_dict(data)


def save_state(state: PureState, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state)) + "\n")
