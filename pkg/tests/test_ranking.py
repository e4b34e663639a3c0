import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import dominates_oracle, peeling_fronts, raw_fitness_oracle

from dietmoea.errors import ParameterError
from dietmoea.evaluation import EvaluatedSolution, ObjectiveVector
from dietmoea.ranking import (
    crowding_distance,
    dominance_matrix,
    dominates,
    nondominated_sort,
    rank_population,
    spea2_raw_fitness,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize(
    "a,b,expected",
    [
        ((1, 2, 3), (2, 2, 3), True),
        ((1, 2, 3), (1, 2, 3), False),
        ((1, 3, 3), (2, 2, 3), False),
        ((0, 0, -5), (0, 0, -4), True),
    ],
)
def test_dominates_examples(a, b, expected):
    assert dominates(a, b) is expected
    assert dominates_oracle(a, b) is expected


def test_chain_gives_one_front_each():
    F = np.array([[3, 3, 3], [1, 1, 1], [2, 2, 2]], dtype=float)
    part = nondominated_sort(F)
    assert part.fronts == [[1], [2], [0]]
    assert part.ranks.tolist() == [2, 0, 1]


def test_identical_vectors_share_a_front():
    F = np.array([[1, 2, 3]] * 4, dtype=float)
    assert nondominated_sort(F).fronts == [[0, 1, 2, 3]]
    assert not dominance_matrix(F).any()


def test_empty_population():
    with pytest.raises(ParameterError):
        nondominated_sort(np.empty((0, 3)))


@pytest.mark.parametrize("seed", range(5))
def test_sort_matches_peeling_oracle(seed):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 6, size=(50, 3)).astype(float)
    part = nondominated_sort(F)
    assert part.fronts == peeling_fronts(F.tolist())
    assert sorted(i for f in part.fronts for i in f) == list(range(50))


def test_crowding_middle_point():
    front = np.array([[0, 2, 0], [1, 1, 0], [2, 0, 0]], dtype=float)
    cd = crowding_distance(front)
    assert np.isinf(cd[0]) and np.isinf(cd[2])
    assert cd[1] == pytest.approx(2.0)


@pytest.mark.parametrize("n", [1, 2])
def test_crowding_small_fronts(n):
    assert np.all(np.isinf(crowding_distance(np.zeros((n, 3)))))


def test_crowding_duplicates_score_once():
    front = np.array([[0, 2, 0], [1, 1, 0], [1, 1, 0], [2, 0, 0]], dtype=float)
    cd = crowding_distance(front)
    assert cd[1] == pytest.approx(2.0)
    assert cd[2] == 0.0


def test_crowding_skips_flat_objective():
    front = np.array([[0, 5, 3], [1, 5, 2], [3, 5, 0]], dtype=float)
    cd = crowding_distance(front)
    assert cd[1] == pytest.approx(3 / 3 + 3 / 3)


def test_raw_fitness_chain():
    F = np.array([[1, 1, 1], [2, 2, 2], [3, 3, 3]], dtype=float)
    # strengths 2, 1, 0; the third point is dominated by both others
    assert spea2_raw_fitness(F).tolist() == [0, 2, 3]


@settings(max_examples=50, deadline=None)
@given(seed=seeds, n=st.integers(1, 25))
def test_raw_fitness_oracle_and_front_zero(seed, n):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 4, size=(n, 3)).astype(float)
    raw = spea2_raw_fitness(F)
    assert raw.tolist() == raw_fitness_oracle(F.tolist())
    assert np.array_equal(raw == 0, nondominated_sort(F).ranks == 0)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, scale=st.floats(0.1, 100), shift=st.floats(-50, 50))
def test_invariant_under_monotone_rescaling(seed, scale, shift):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 5, size=(20, 3)).astype(float)
    G = F * scale + shift
    assert nondominated_sort(F).fronts == nondominated_sort(G).fronts
    assert np.array_equal(spea2_raw_fitness(F), spea2_raw_fitness(G))


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_invariant_under_reordering(seed):
    rng = np.random.default_rng(seed)
    F = rng.integers(0, 5, size=(20, 3)).astype(float)
    perm = rng.permutation(20)
    ranks, raw = nondominated_sort(F).ranks, spea2_raw_fitness(F)
    assert np.array_equal(nondominated_sort(F[perm]).ranks, ranks[perm])
    assert np.array_equal(spea2_raw_fitness(F[perm]), raw[perm])


def test_rank_population_fills_fields():
    pts = [(1, 1, 1), (2, 2, 2), (0, 3, 1), (3, 0, 1)]
    pop = [EvaluatedSolution(np.zeros((1, 1), dtype=np.int64), ObjectiveVector(*p), 0.0) for p in pts]
    part = rank_population(pop)
    assert [s.nds_rank for s in pop] == part.ranks.tolist() == [0, 1, 0, 0]
    assert [s.raw_fitness for s in pop] == [0, 1, 0, 0]
    assert all(s.crowding is not None for s in pop)
