import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envlab.errors import DimensionCapError, ValidationError
from envlab.hilbert import (
    LocalUnitary,
    PureState,
    SchmidtDecomposition,
    apply_local,
    load_state,
    overlap,
    reduced_density,
    save_state,
    schmidt,
    split_cut,
    state_from_dict,
    state_to_dict,
    tensor,
)
from envlab.sampling import random_local_unitary, random_state

from oracles import embed_local

R2 = 1 / math.sqrt(2)
X = np.array([[0, 1], [1, 0]])
dims_st = st.lists(st.integers(1, 4), min_size=1, max_size=4)
seeds = st.integers(0, 2 ** 32 - 1)


def bell():
    return PureState.from_amplitudes([1, 0, 0, 1], (2, 2), ("S", "E"))


def labels_for(n, prefix="A"):
    return tuple(f"{prefix}{k}" for k in range(n))


# --- construction ---------------------------------------------------------

def test_state_rejects_bad_input():
    with pytest.raises(ValidationError, match="normalized"):
        PureState(("S",), (2,), np.array([1, 1]))
    with pytest.raises(ValidationError, match="expected 4"):
        PureState(("S", "E"), (2, 2), np.array([1, 0, 0]))
    with pytest.raises(ValidationError, match="unique"):
        PureState(("S", "S"), (1, 1), np.array([1]))
    with pytest.raises(ValidationError, match="2 labels but 1"):
        PureState(("S", "E"), (2,), np.array([1, 0]))
    with pytest.raises(ValidationError, match="zero vector"):
        PureState.from_amplitudes([0, 0], (2,), ("S",))


def test_state_is_immutable():
    s = bell()
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


def test_dimension_cap_env_override(monkeypatch):
    monkeypatch.setenv("ENVLAB_DIM_CAP", "8")
    PureState.basis((0, 0, 0), (2, 2, 2), ("A", "B", "C"))
    with pytest.raises(DimensionCapError):
        PureState.basis((0,), (9,), ("A",))
    with pytest.raises(DimensionCapError):
        tensor([PureState.basis((0,), (4,), ("A",)), PureState.basis((0,), (3,), ("B",))])


# --- tensor -------------------------------------------------------------------

def test_tensor_examples():
    zero_a = PureState.basis((0,), (2,), ("A",))
    zero_b = PureState.basis((0,), (2,), ("B",))
    np.testing.assert_array_equal(tensor([zero_a, zero_b]).amplitudes, [1, 0, 0, 0])

    joint = tensor([bell(), PureState.basis((0,), (2,), ("C",))])
    assert joint.dims == (2, 2, 2)
    expected = np.zeros(8)
    expected[np.ravel_multi_index((0, 0, 0), (2, 2, 2))] = R2
    expected[np.ravel_multi_index((1, 1, 0), (2, 2, 2))] = R2
    np.testing.assert_allclose(joint.amplitudes, expected, atol=1e-15)

    q = [math.sqrt(1 / 3), math.sqrt(2 / 3)]
    two = tensor([PureState.from_amplitudes(q, (2,), ("A",)),
                  PureState.from_amplitudes(q, (2,), ("B",))])
    assert abs(two.tensor[1, 1] - 2 / 3) < 1e-15


def test_tensor_errors():
    with pytest.raises(ValidationError):
        tensor([])
    with pytest.raises(ValidationError, match="collide"):
        tensor([bell(), bell()])


@settings(max_examples=40, deadline=None)
@given(seeds, dims_st, dims_st, dims_st)
def test_tensor_associative(seed, da, db, dc):
    rng = np.random.default_rng(seed)
    a = random_state(rng, da, labels_for(len(da), "A"))
    b = random_state(rng, db, labels_for(len(db), "B"))
    c = random_state(rng, dc, labels_for(len(dc), "C"))
    left = tensor([tensor([a, b]), c])
    flat = tensor([a, b, c])
    assert left.labels == flat.labels and left.dims == flat.dims
    np.testing.assert_array_equal(left.amplitudes, flat.amplitudes)
    np.testing.assert_allclose(tensor([a, tensor([b, c])]).amplitudes, flat.amplitudes,
                               rtol=0, atol=1e-15)


# --- local unitaries ----------------------------------------------------------

def test_local_unitary_validation():
    with pytest.raises(ValidationError, match="not unitary"):
        LocalUnitary("S", [[1, 1], [0, 1]])
    with pytest.raises(ValidationError, match="square"):
        LocalUnitary("S", np.ones((2, 3)))
    s = bell()
    with pytest.raises(ValidationError, match="unknown|not a subsystem|label"):
        apply_local(s, LocalUnitary("Q", X))
    with pytest.raises(ValidationError, match="dimension"):
        apply_local(s, LocalUnitary("S", np.eye(3)))


def test_identity_unchanged():
    s = random_state(np.random.default_rng(0), (3, 2, 4), ("A", "B", "C"))
    for lab, d in zip(s.labels, s.dims):
        out = apply_local(s, LocalUnitary.identity(lab, d))
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, rtol=0, atol=1e-15)


def test_bell_swap_and_phase():
    s = bell()
    swapped = apply_local(s, LocalUnitary("S", X))
    assert abs(overlap(s, swapped)) < 1e-15
    back = apply_local(swapped, LocalUnitary("E", X))
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-15)

    w = np.exp(1j * np.pi / 3)
    rotated = apply_local(s, LocalUnitary("S", np.diag([w, 1])))
    assert abs(overlap(s, rotated) - (w + 1) / 2) < 1e-15


@settings(max_examples=60, deadline=None)
@given(seeds, st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data())
def test_apply_local_matches_kron_operator(seed, dims, data):
    rng = np.random.default_rng(seed)
    labels = labels_for(len(dims))
    state = random_state(rng, dims, labels)
    axis = data.draw(st.integers(0, len(dims) - 1))
    u = random_local_unitary(rng, labels[axis], dims[axis])
    out = apply_local(state, u)
    expected = embed_local(u.matrix, axis, dims) @ state.amplitudes
    np.testing.assert_allclose(out.amplitudes, expected, rtol=0, atol=1e-12)
    assert abs(out.norm() - 1) <= 1e-10


def test_group_target_acts_on_joint_index():
    rng = np.random.default_rng(3)
    state = random_state(rng, (2, 3, 2), ("A", "B", "C"))
    u = random_local_unitary(rng, ("C", "A"), 4)
    out = apply_local(state, u)
    # full operator on (A, B, C) from u acting on joint (C, A) index
    full = np.zeros((12, 12), dtype=complex)
    for a, b, c in np.ndindex(2, 3, 2):
        for a2, c2 in np.ndindex(2, 2):
            full[np.ravel_multi_index((a2, b, c2), (2, 3, 2)),
                 np.ravel_multi_index((a, b, c), (2, 3, 2))] = u.matrix[c2 * 2 + a2, c * 2 + a]
    np.testing.assert_allclose(out.amplitudes, full @ state.amplitudes, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.lists(st.integers(1, 4), min_size=2, max_size=4), st.data())
def test_disjoint_local_unitaries_commute(seed, dims, data):
    rng = np.random.default_rng(seed)
    labels = labels_for(len(dims))
    state = random_state(rng, dims, labels)
    i, j = data.draw(st.lists(st.integers(0, len(dims) - 1), min_size=2, max_size=2, unique=True))
    u = random_local_unitary(rng, labels[i], dims[i])
    v = random_local_unitary(rng, labels[j], dims[j])
    uv = apply_local(apply_local(state, u), v)
    vu = apply_local(apply_local(state, v), u)
    assert np.linalg.norm(uv.amplitudes - vu.amplitudes) < 1e-8


# --- schmidt ----------------------------------------------------------------------

def test_schmidt_examples():
    sd = schmidt(bell(), "S")
    assert sd.rank == 2
    np.testing.assert_allclose(sd.moduli, [R2, R2], atol=1e-15)

    plus = tensor([PureState.basis((0,), (2,), ("S",)),
                   PureState.from_amplitudes([1, 1], (2,), ("E",))])
    sd = schmidt(plus, "S")
    assert sd.rank == 1
    assert abs(sd.moduli[0] - 1) < 1e-15

    amps = [math.sqrt(1 / 3), 0, 0, math.sqrt(2 / 3)]
    sd = schmidt(PureState(("S", "E"), (2, 2), np.array(amps)), "S")
    np.testing.assert_allclose(sd.moduli, [math.sqrt(2 / 3), math.sqrt(1 / 3)], atol=1e-15)


def test_schmidt_canonical_form():
    rng = np.random.default_rng(7)
    state = random_state(rng, (3, 5), ("S", "E"))
    sd = schmidt(state, "S")
    assert np.all(np.diff(sd.moduli) <= 0)
    np.testing.assert_array_equal(sd.phases, 0)
    for k in range(sd.rank):
        v = sd.system_basis[:, k]
        first = np.flatnonzero(np.abs(v) > 1e-8)[0]
        assert v[first].real > 0 and abs(v[first].imag) < 1e-15


def test_schmidt_is_deterministic_on_ties():
    """Equal moduli come out in the same order whatever the input order."""
    a = schmidt(SchmidtDecomposition.from_coefficients([1, 1, 1]).to_state(), "S")
    b = schmidt(SchmidtDecomposition.from_coefficients([1j, -1, 1]).to_state(), "S")
    np.testing.assert_allclose(np.abs(a.system_basis), np.abs(b.system_basis), atol=1e-12)
    np.testing.assert_allclose(a.system_basis[:, :3], np.eye(3), atol=1e-12)


def test_schmidt_errors():
    s = bell()
    with pytest.raises(ValidationError):
        schmidt(s, "Q")
    with pytest.raises(ValidationError):
        schmidt(s, ("S", "E"))


def test_split_cut_forms():
    s = random_state(np.random.default_rng(0), (2, 2, 2), ("S", "C", "E"))
    assert split_cut(s, "S") == (("S",), ("C", "E"))
    assert split_cut(s, ["S", "C"]) == (("S", "C"), ("E",))
    assert split_cut(s, (("E",), ("S", "C"))) == (("E",), ("S", "C"))


def test_schmidt_round_trip_1000_states():
    rng = np.random.default_rng(1000)
    worst = 0.0
    for _ in range(1000):
        d_sys, d_env = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        state = random_state(rng, (d_sys, d_env), ("S", "E"))
        sd = schmidt(state, "S")
        worst = max(worst, np.linalg.norm(sd.reconstruct(state).amplitudes - state.amplitudes))
    assert worst < 1e-8


@settings(max_examples=40, deadline=None)
@given(seeds, st.lists(st.integers(1, 3), min_size=2, max_size=4), st.data())
def test_schmidt_multipartite_cut_round_trip(seed, dims, data):
    rng = np.random.default_rng(seed)
    labels = labels_for(len(dims))
    state = random_state(rng, dims, labels)
    k = data.draw(st.integers(1, len(dims) - 1))
    system = tuple(data.draw(st.permutations(labels))[:k])
    sd = schmidt(state, system)
    assert sd.system_labels == system
    assert np.linalg.norm(sd.reconstruct(state).amplitudes - state.amplitudes) < 1e-8
    assert abs(np.sum(sd.moduli ** 2) - 1) < 1e-10


def test_from_coefficients_keeps_phases():
    sd = SchmidtDecomposition.from_coefficients([1, 1j, -1])
    np.testing.assert_allclose(sd.moduli, [1 / math.sqrt(3)] * 3)
    np.testing.assert_allclose(sd.phases, [0, np.pi / 2, np.pi])
    np.testing.assert_allclose(sd.to_state().tensor, np.diag([1, 1j, -1]) / math.sqrt(3),
                               atol=1e-15)


# --- reduced density ----------------------------------------------------------------

def test_reduced_density_examples():
    np.testing.assert_allclose(reduced_density(bell(), "S").matrix, np.eye(2) / 2, atol=1e-15)

    q = np.array([math.sqrt(1 / 3), 0, 0, math.sqrt(2 / 3)])
    rho = reduced_density(PureState(("S", "E"), (2, 2), q), "S")
    np.testing.assert_allclose(rho.matrix, np.diag([1 / 3, 2 / 3]), atol=1e-15)

    prod = tensor([PureState.from_amplitudes([1, 1j], (2,), ("S",)),
                   PureState.basis((1,), (3,), ("E",))])
    rho = reduced_density(prod, "S").matrix
    np.testing.assert_allclose(rho @ rho, rho, atol=1e-15)
    assert abs(np.trace(rho) - 1) < 1e-15


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_reduced_density_eigenvalues_match_schmidt(seed, d_sys, d_env):
    state = random_state(np.random.default_rng(seed), (d_sys, d_env), ("S", "E"))
    rho = reduced_density(state, "S")
    sd = schmidt(state, "S")
    expected = np.zeros(d_sys)
    expected[:sd.moduli.size] = sd.moduli ** 2
    np.testing.assert_allclose(rho.eigenvalues(), np.sort(expected)[::-1], rtol=0, atol=1e-8)
    # eigen-decomposition oracle independent of the SVD path
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(rho.matrix))[::-1],
                               np.sort(expected)[::-1], atol=1e-8)


# --- overlap ------------------------------------------------------------------------

def test_overlap_examples():
    s = bell()
    assert abs(overlap(s, s) - 1) < 1e-15
    a = PureState.basis((0,), (3,), ("S",))
    b = PureState.basis((2,), (3,), ("S",))
    assert overlap(a, b) == 0
    chi = PureState.from_amplitudes([0, 1, 1, -1], (4,), ("S",))
    chi2 = PureState.from_amplitudes([0, -1, 1, 1], (4,), ("S",))
    assert abs(overlap(chi, chi2) + 1 / 3) < 1e-15
    with pytest.raises(ValidationError, match="shape"):
        overlap(a, s)


@settings(max_examples=40, deadline=None)
@given(seeds, dims_st)
def test_overlap_bounded(seed, dims):
    rng = np.random.default_rng(seed)
    a = random_state(rng, dims, labels_for(len(dims)))
    b = random_state(rng, dims, labels_for(len(dims)))
    assert abs(overlap(a, b)) <= 1 + 1e-10


# --- JSON -------------------------------------------------------------------------

def test_json_round_trip(tmp_path):
    state = random_state(np.random.default_rng(5), (2, 3), ("S", "E"))
    path = tmp_path / "s.json"
    save_state(state, path)
    data = json.loads(path.read_text())
    assert set(data) == {"labels", "dims", "amplitudes"}
    back = load_state(path)
    assert back.labels == state.labels and back.dims == state.dims
    np.testing.assert_array_equal(back.amplitudes, state.amplitudes)
    assert state_from_dict(state_to_dict(state)).dims == (2, 3)


@pytest.mark.parametrize("payload, field", [
    ({"dims": [2], "amplitudes": [[1, 0], [0, 0]]}, "labels"),
    ({"labels": ["S"], "dims": [0], "amplitudes": [[1, 0]]}, "dims"),
    ({"labels": ["S"], "dims": [2], "amplitudes": [[1, 0], [0]]}, "amplitudes[1]"),
    ({"labels": ["S"], "dims": [2], "amplitudes": "x"}, "amplitudes"),
    ({"labels": [1], "dims": [2], "amplitudes": [[1, 0], [0, 0]]}, "labels"),
])
def test_json_errors_name_field(payload, field):
    with pytest.raises(ValidationError, match=f"'{field}'".replace("[", r"\[").replace("]", r"\]")):
        state_from_dict(payload)


def test_json_invalid_text(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_state(path)
