from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import hamming_oracle, hv_inclusion_exclusion, hv_monte_carlo

from dietmoea.analytics import (
    NormalizationBounds,
    compute_bounds,
    compute_metrics,
    d_hmed,
    d_hmin,
    hypervolume,
    hypervolume_normalized,
    permutation_test,
)
from dietmoea.errors import ParameterError
from dietmoea.evaluation import EvaluatedSolution, ObjectiveVector

seeds = st.integers(0, 2**32 - 1)


def bits(*rows):
    return np.array(rows, dtype=bool)


def test_bounds_from_union():
    b = compute_bounds([np.array([[1, 5, -3], [2, 4, -1]]), np.array([[0, 6, -2]])])
    assert b.ideal.tolist() == [0, 4, -3]
    assert b.nadir.tolist() == [2, 6, -1]
    assert b.normalize([[1, 5, -2]]).tolist() == [[0.5, 0.5, 0.5]]


def test_bounds_degenerate_and_clipping():
    b = NormalizationBounds([0, 3, 0], [10, 3, 1])
    assert b.degenerate.tolist() == [False, True, False]
    assert b.normalize([[20, 3, -1]]).tolist() == [[1.0, 0.0, 0.0]]
    with pytest.raises(ParameterError):
        NormalizationBounds([1, 0, 0], [0, 1, 1])
    with pytest.raises(ParameterError):
        compute_bounds([])


@pytest.mark.parametrize(
    "points,expected",
    [
        ([[0.5, 0.5, 0.5]], 0.125),
        ([[0.2, 0.7, 0.0]], 0.24),
        ([[0, 0, 0]], 1.0),
        ([[0, 0.5, 0.6], [0.6, 0, 0.6]], 0.28),
        ([[1, 0, 0]], 0.0),
        ([], 0.0),
    ],
)
def test_hypervolume_hand_cases(points, expected):
    assert hypervolume_normalized(np.array(points).reshape(-1, 3)) == pytest.approx(expected, abs=1e-12)


def test_hypervolume_with_bounds_and_margin():
    b = NormalizationBounds([0, 0, 0], [2, 2, 2])
    assert hypervolume(np.array([[1.0, 1.0, 1.0]]), b) == pytest.approx(0.125)
    assert hypervolume(np.array([[1.0, 1.0, 1.0]]), b, margin=1.1) == pytest.approx(0.6**3)


@pytest.mark.parametrize("seed", range(15))
def test_hypervolume_inclusion_exclusion_oracle(seed):
    rng = np.random.default_rng(seed)
    P = rng.random((int(rng.integers(1, 9)), 3))
    assert hypervolume_normalized(P) == pytest.approx(hv_inclusion_exclusion(P.tolist()), abs=1e-9)


def test_hypervolume_monte_carlo():
    rng = np.random.default_rng(7)
    P = rng.random((8, 3))
    estimate, se = hv_monte_carlo(P, 200_000, rng)
    assert abs(hypervolume_normalized(P) - estimate) <= 3 * se


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_hypervolume_monotone(seed):
    rng = np.random.default_rng(seed)
    P = rng.random((6, 3))
    base = hypervolume_normalized(P)
    extra = rng.random(3)
    assert hypervolume_normalized(np.vstack([P, extra])) >= base - 1e-12
    dominated = P[0] + (1 - P[0]) * rng.random(3)
    assert hypervolume_normalized(np.vstack([P, dominated])) == pytest.approx(base, abs=1e-12)
    assert hypervolume_normalized(np.vstack([P, [0, 0, 0]])) == pytest.approx(1.0)


def test_d_hmin_examples():
    assert d_hmin(bits([1, 0, 1], [1, 0, 1], [0, 0, 0])) == 0
    # pairwise distances 2, 5, 7
    a = [0] * 7
    b = [1, 1] + [0] * 5
    c = [0, 0] + [1] * 5
    assert d_hmin(bits(a, b, c)) == 2
    with pytest.raises(ParameterError):
        d_hmin(bits([1, 0]))


def test_d_hmed_examples():
    full, distinct = d_hmed(bits([0] * 10, [1] * 10))
    assert (full, distinct) == (5.0, 10.0)
    assert d_hmed(bits([1, 0], [1, 0], [1, 0])) == (0.0, 0.0)
    full, distinct = d_hmed(bits([1, 0]))
    assert full == 0.0 and np.isnan(distinct)


def test_d_hmed_equal_distance_relation():
    # four vectors with all pairwise distances equal to 2
    B = bits([1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1])
    full, distinct = d_hmed(B)
    assert full == pytest.approx(distinct * 3 / 4)


@pytest.mark.parametrize("seed", range(5))
def test_hamming_metrics_match_loops(seed):
    B = np.random.default_rng(seed).random((10, 25)) < 0.3
    pairs = [hamming_oracle(B[i], B[j]) for i, j in combinations(range(10), 2)]
    assert d_hmin(B) == min(pairs)
    full, distinct = d_hmed(B)
    assert distinct == pytest.approx(np.mean(pairs))
    assert full == pytest.approx(2 * sum(pairs) / 100)
    assert d_hmin(B) <= distinct


def test_compute_metrics():
    g1 = np.zeros((4, 7), dtype=np.int64)
    g2 = g1.copy()
    g2[:, 0] = 1
    pop = [
        EvaluatedSolution(g1, ObjectiveVector(0.0, 1.0, -1.0), 0.0),
        EvaluatedSolution(g2, ObjectiveVector(1.0, 0.0, -2.0), 0.0),
    ]
    bounds = compute_bounds([pop])
    report = compute_metrics(pop, bounds)
    assert report.as_dict() == {"hv": pytest.approx(0.0), "d_hmin": 4, "d_hmed": 2.0, "d_hmed_distinct": 4.0,
                                "front_size": 2}
    single = compute_metrics(pop[:1], bounds)
    assert (single.d_hmin, single.d_hmed, single.set_size) == (0, 0.0, 1)


def test_permutation_constant_samples():
    res = permutation_test([3.0] * 30, [3.0] * 30, 500, seed=0)
    assert res.observed_diff == 0 and res.p_value == 1.0


def test_permutation_separated_samples():
    res = permutation_test([0] * 5, [9] * 5, 5000, seed=0)
    assert res.observed_diff == -9
    assert res.p_value <= 0.01
    assert res.significant_at_01


def test_permutation_deterministic_and_validated():
    a, b = [1, 2, 3, 4], [2, 3, 5, 8]
    assert permutation_test(a, b, 200, seed=5).p_value == permutation_test(a, b, 200, seed=5).p_value
    with pytest.raises(ParameterError):
        permutation_test([], b)
    with pytest.raises(ParameterError):
        permutation_test(a, b, 0)


@settings(max_examples=30, deadline=None)
@given(seed=seeds)
def test_permutation_swap_symmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=12), rng.normal(0.5, size=15)
    ab = permutation_test(a, b, 300, seed=seed)
    ba = permutation_test(b, a, 300, seed=seed)
    assert ab.p_value == ba.p_value
    assert ab.observed_diff == pytest.approx(-ba.observed_diff)


def test_permutation_calibration():
    rng = np.random.default_rng(123)
    hits = sum(permutation_test(rng.normal(size=30), rng.normal(size=30), 1000, seed=t).p_value < 0.05
               for t in range(100))
    assert hits <= 12
