import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from envlab.errors import ValidationError
from envlab.frequency import (
    ensemble_counts,
    ensemble_oracle,
    ensemble_probabilities,
    gaussian_approx,
    rows_to_csv,
    table_rows,
    triplet_state,
)

from oracles import enumerate_ensemble_counts, exact_binomial


# --- exact counts -----------------------------------------------------------------------

def test_ensemble_counts_examples():
    assert ensemble_counts(2, 1, 2).counts == (1, 2, 1)
    assert ensemble_counts(3, 1, 3).counts[2] == math.comb(3, 2) * 1 ** 2 * 2
    big = ensemble_counts(50, 3, 10)
    assert big.total == 10 ** 50
    assert big.counts[50] == 3 ** 50


@pytest.mark.parametrize("N, m, M", [(1, 1, 2), (2, 1, 3), (4, 2, 5), (5, 1, 4)])
def test_counts_match_enumeration(N, m, M):
    assert list(ensemble_counts(N, m, M).counts) == enumerate_ensemble_counts(N, m, M)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 200), st.integers(2, 50), st.data())
def test_count_invariants(N, M, data):
    m = data.draw(st.integers(1, M - 1))
    d = ensemble_counts(N, m, M)
    assert d.total == M ** N
    assert abs(d.probabilities.sum() - 1) <= 1e-10
    for c, p in zip(d.counts[:: max(1, N // 10)], d.probabilities[:: max(1, N // 10)]):
        assert p == c / M ** N


def test_counts_reject_bad_parameters():
    for args in [(2, 0, 3), (2, 3, 3), (0, 1, 2), (2, 1.5, 3), (True, 1, 2)]:
        with pytest.raises(ValidationError):
            ensemble_counts(*args)


# --- binomial probabilities -----------------------------------------------------------------

def test_ensemble_probabilities_examples():
    np.testing.assert_allclose(ensemble_probabilities(1, 1 / 3), [2 / 3, 1 / 3], rtol=1e-15)
    np.testing.assert_allclose(ensemble_probabilities(4, 0.5), np.array([1, 4, 6, 4, 1]) / 16,
                               rtol=1e-15)
    pm = ensemble_probabilities(1000, 0.3)
    mean = np.sum(np.arange(1001) * pm)
    assert abs(mean / 300 - 1) <= 1e-9


def test_degenerate_p0():
    np.testing.assert_array_equal(ensemble_probabilities(3, 0.0), [1, 0, 0, 0])
    np.testing.assert_array_equal(ensemble_probabilities(3, 1.0), [0, 0, 0, 1])
    with pytest.raises(ValidationError):
        ensemble_probabilities(3, 1.1)


@pytest.mark.parametrize("N, p0", [(10, 0.3), (37, 1 / 3), (60, 0.9)])
def test_probabilities_match_exact_rationals(N, p0):
    np.testing.assert_allclose(ensemble_probabilities(N, p0), exact_binomial(N, p0),
                               rtol=1e-13, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5000), st.floats(0.001, 0.999))
def test_probabilities_match_scipy(N, p0):
    n = np.arange(N + 1)
    ref = binom.pmf(n, N, p0)
    ours = ensemble_probabilities(N, p0)
    big = ref > 1e-250
    np.testing.assert_allclose(ours[big], ref[big], rtol=1e-9)


@pytest.mark.parametrize("N", [10, 1000, 10 ** 4, 10 ** 5])
@pytest.mark.parametrize("p0", [0.01, 0.3, 0.5, 0.77])
def test_normalization(N, p0):
    assert abs(math.fsum(ensemble_probabilities(N, p0)) - 1) <= 1e-10


@pytest.mark.parametrize("N", [100, 1000, 10 ** 4, 10 ** 5])
@pytest.mark.parametrize("p0", [0.1, 0.3, 0.5])
def test_moment_law(N, p0):
    n = np.arange(N + 1)
    pm = ensemble_probabilities(N, p0)
    mean = math.fsum(n * pm)
    var = math.fsum((n - mean) ** 2 * pm)
    assert abs(mean / (p0 * N) - 1) <= 1e-8
    assert abs(var / (p0 * (1 - p0) * N) - 1) <= 1e-8


# --- Gaussian limit -------------------------------------------------------------------------

def test_gaussian_examples():
    N, p0 = 400, 0.3
    peak = gaussian_approx(N, p0, p0 * N)
    assert peak == pytest.approx(1 / (math.sqrt(2 * math.pi * N) * math.sqrt(p0 * (1 - p0))),
                                 rel=1e-15)
    d = np.array([1.0, 7.5, 30.0])
    np.testing.assert_array_equal(gaussian_approx(N, p0, p0 * N + d),
                                  gaussian_approx(N, p0, p0 * N - d))
    for p0 in (0.0, 1.0):
        with pytest.raises(ValidationError):
            gaussian_approx(10, p0, 1)


def test_gaussian_gap_at_large_N():
    N = 10 ** 4
    n = np.arange(N + 1)
    assert np.abs(ensemble_probabilities(N, 0.5) - gaussian_approx(N, 0.5, n)).max() < 2 / N


@pytest.mark.parametrize("p0", [0.1, 0.3, 0.5])
def test_gaussian_gap_nonincreasing(p0):
    gaps = []
    for N in (100, 1000, 10 ** 4):
        n = np.arange(N + 1)
        gaps.append(np.abs(ensemble_probabilities(N, p0) - gaussian_approx(N, p0, n)).max())
    assert gaps == sorted(gaps, reverse=True)


# --- tensor oracle ---------------------------------------------------------------------------

def test_oracle_examples():
    assert ensemble_oracle(1, 1, 2).counts == (1, 1)
    assert ensemble_oracle(2, 1, 2).counts == (1, 2, 1)
    assert ensemble_oracle(2, 1, 3).counts == (4, 4, 1)


def test_oracle_equals_formula_everywhere():
    for N in range(1, 4):
        for M in range(2, 4):
            for m in range(1, M):
                o = ensemble_oracle(N, m, M)
                assert o.counts == ensemble_counts(N, m, M).counts
                np.testing.assert_allclose(o.probabilities, ensemble_counts(N, m, M).probabilities,
                                           rtol=0, atol=1e-15)


def test_oracle_caps():
    with pytest.raises(ValidationError, match="capped"):
        ensemble_oracle(4, 1, 2)
    with pytest.raises(ValidationError, match="capped"):
        ensemble_oracle(1, 1, 4)


def test_triplet_state_has_M_equal_branches():
    t = triplet_state(2, 3, (0.3, 1.1))
    nz = np.abs(t.amplitudes)[np.abs(t.amplitudes) > 1e-12]
    np.testing.assert_allclose(nz, [1 / math.sqrt(3)] * 3, atol=1e-15)


# --- table output --------------------------------------------------------------------------

def test_table_rows_and_csv():
    rows = table_rows(2, 1, 2)
    assert [r[1] for r in rows] == [1, 2, 1]
    text = rows_to_csv(rows, ensemble_counts(2, 1, 2).total)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == ["n", "count", "probability", "gaussian"]
    assert [r[1] for r in parsed[1:4]] == ["1", "2", "1"]
    assert parsed[4][:2] == ["total", "4"]
    assert float(parsed[2][2]) == 0.5
    assert table_rows(3, 1, 3)[2][1] == 6
