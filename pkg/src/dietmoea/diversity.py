"""Decision-space diversity: presence vectors, Hamming distance and DWH selection.

The dominance-weighted Hamming uniformity between two solutions is their
Hamming distance divided by one plus the absolute difference of their SPEA-2
raw fitness values. DWH selection seeds a set with the most uniform pair of
non-dominated solutions and then grows it by max-min greedy insertion.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError, StateError
from .evaluation import EvaluatedSolution, objective_matrix
from .ranking import dominance_matrix

BINARIZE_MODES = ("weekly", "per-day")


def binarize(genome: np.ndarray, mode: str = "weekly") -> np.ndarray:
    """Presence vector of a genome.

    ``weekly`` gives one bit per item (eaten on any day); ``per-day`` gives
    one bit per (item, day) cell, row-major.
    """
    if mode == "weekly":
        return genome.sum(axis=1) > 0
    if mode == "per-day":
        return (genome > 0).ravel()
    raise ParameterError(f"unknown binarization mode {mode!r}; expected one of {BINARIZE_MODES}")


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    a, b = np.asarray(a, dtype=bool), np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError(f"presence vectors differ in length: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def pairwise_hamming(presence: np.ndarray) -> np.ndarray:
    """All pairwise Hamming distances of the rows of a boolean matrix."""
    B = presence.astype(np.int64)
    ones = B.sum(axis=1)
    common = B @ B.T
    return ones[:, None] + ones[None, :] - 2 * common


def w_dh(x: EvaluatedSolution, y: EvaluatedSolution, mode: str = "weekly") -> float:
    if x.raw_fitness is None or y.raw_fitness is None:
        raise StateError("raw fitness must be computed before w_dH")
    return hamming(x.presence(mode), y.presence(mode)) / (abs(x.raw_fitness - y.raw_fitness) + 1)


@dataclass
class SelectionPool:
    """Solutions with raw fitness, plus their cached presence matrix."""

    members: list[EvaluatedSolution]
    mode: str = "weekly"
    presence: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.members = list(self.members)
        if not self.members:
            raise ParameterError("empty selection pool")
        if any(s.raw_fitness is None for s in self.members):
            raise StateError("every pool member needs raw fitness")
        self.presence = np.array([s.presence(self.mode) for s in self.members])

    def __len__(self) -> int:
        return len(self.members)

    @property
    def raw_fitness(self) -> np.ndarray:
        return np.array([s.raw_fitness for s in self.members], dtype=np.int64)

    def uniformity_matrix(self) -> np.ndarray:
        """Pairwise w_dH values."""
        r = self.raw_fitness
        return pairwise_hamming(self.presence) / (np.abs(r[:, None] - r[None, :]) + 1)

    def nondominated_mask(self) -> np.ndarray:
        D = dominance_matrix(objective_matrix(self.members))
        return ~D.any(axis=0)


@dataclass
class DWHTrace:
    """Indices chosen by DWH selection, in order, with each greedy step's max-min value."""

    order: list[int]
    seed_value: float | None
    step_values: list[float]


def dwh_indices(W: np.ndarray, nondominated: np.ndarray, k: int) -> DWHTrace:
    """DWH selection on a precomputed uniformity matrix.

    The seed is the non-dominated pair with the largest uniformity (earliest
    pair in index order on ties), or the single non-dominated member if there
    is only one. Each later step adds the outsider whose smallest uniformity
    to the selected set is largest (lowest index on ties).
    """
    n = len(W)
    if n == 0:
        raise ParameterError("empty selection pool")
    if not 1 <= k <= n:
        raise ParameterError(f"cannot select {k} of {n}")
    nd = np.flatnonzero(nondominated)
    if len(nd) == 0:
        raise ParameterError("pool has no non-dominated member")
    seed_value = None
    if len(nd) == 1:
        order = [int(nd[0])]
    else:
        sub = W[np.ix_(nd, nd)].copy()
        sub[np.tril_indices(len(nd))] = -np.inf
        a, b = np.unravel_index(int(np.argmax(sub)), sub.shape)
        order = [int(nd[a]), int(nd[b])]
        seed_value = float(sub[a, b])
    order = order[:k]

    chosen = np.zeros(n, dtype=bool)
    chosen[order] = True
    nearest = W[:, order].min(axis=1)
    steps = []
    while len(order) < k:
        score = np.where(chosen, -np.inf, nearest)
        best = int(np.argmax(score))
        steps.append(float(score[best]))
        order.append(best)
        chosen[best] = True
        nearest = np.minimum(nearest, W[:, best])
    return DWHTrace(order, seed_value, steps)


def dwh_select(pool: SelectionPool | Sequence[EvaluatedSolution], k: int, mode: str = "weekly") -> list[EvaluatedSolution]:
    """Pick ``k`` mutually dissimilar solutions from ``pool`` by DWH max-min selection."""
    if not isinstance(pool, SelectionPool):
        pool = SelectionPool(list(pool), mode)
    if k > len(pool):
        raise ParameterError(f"cannot select {k} of {len(pool)}")
    trace = dwh_indices(pool.uniformity_matrix(), pool.nondominated_mask(), k)
    return [pool.members[i] for i in trace.order]


def _rank_then_coin(a: EvaluatedSolution, b: EvaluatedSolution, rng: np.random.Generator) -> EvaluatedSolution:
    ra = a.nds_rank if a.nds_rank is not None else np.inf
    rb = b.nds_rank if b.nds_rank is not None else np.inf
    if ra != rb:
        return a if ra < rb else b
    return a if rng.random() < 0.5 else b


def diversity_score(s: EvaluatedSolution, reference: Sequence[EvaluatedSolution], mode: str = "weekly") -> float:
    """Smallest w_dH from ``s`` to any member of ``reference``."""
    return min(w_dh(s, r, mode) for r in reference)


def diversity_tournament(
    a: EvaluatedSolution,
    b: EvaluatedSolution,
    already_selected: Sequence[EvaluatedSolution],
    rng: np.random.Generator,
    mode: str = "weekly",
) -> EvaluatedSolution:
    """Binary tournament: feasibility, then penalty, then uniformity to the winners so far.

    Ties fall back to the lower non-dominated rank and finally a coin flip
    from ``rng``. With no previous winners, two feasible contenders are
    compared by rank directly.
    """
    if a.feasible != b.feasible:
        return a if a.feasible else b
    if not a.feasible:
        if a.penalty != b.penalty:
            return a if a.penalty < b.penalty else b
        return _rank_then_coin(a, b, rng)
    if already_selected:
        sa = diversity_score(a, already_selected, mode)
        sb = diversity_score(b, already_selected, mode)
        if sa != sb:
            return a if sa > sb else b
    return _rank_then_coin(a, b, rng)
