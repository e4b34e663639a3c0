"""Pareto dominance, non-dominated sorting, crowding distance and SPEA-2 raw fitness.

Functions accept either a population of
:class:`~dietmoea.evaluation.EvaluatedSolution` or a plain ``(N, M)`` array
of objective values. All objectives are minimised. Feasibility never enters
dominance here; constraint handling belongs to the selection rules.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .evaluation import EvaluatedSolution, objective_matrix


def _as_matrix(population) -> np.ndarray:
    if isinstance(population, np.ndarray):
        return np.atleast_2d(population.astype(float))
    return objective_matrix(population)


def dominates(a, b) -> bool:
    """True iff ``a`` is no worse than ``b`` everywhere and better somewhere."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True iff row ``i`` dominates row ``j``."""
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


@dataclass
class FrontPartition:
    fronts: list[list[int]]

    @property
    def ranks(self) -> np.ndarray:
        out = np.empty(sum(len(f) for f in self.fronts), dtype=int)
        for r, front in enumerate(self.fronts):
            out[front] = r
        return out

    def __len__(self) -> int:
        return len(self.fronts)


def nondominated_sort(population) -> FrontPartition:
    """Split a population into successive non-dominated fronts.

    Each front lists indices in ascending order. When ``population`` holds
    solutions, their ``nds_rank`` is set.
    """
    F = _as_matrix(population)
    if len(F) == 0:
        raise ParameterError("cannot sort an empty population")
    D = dominance_matrix(F)
    n_dominators = D.sum(axis=0)
    remaining = np.ones(len(F), dtype=bool)
    fronts = []
    while remaining.any():
        front = np.flatnonzero(remaining & (n_dominators == 0))
        fronts.append(front.tolist())
        remaining[front] = False
        n_dominators = n_dominators - D[front].sum(axis=0)
        n_dominators[~remaining] = -1
    partition = FrontPartition(fronts)
    if not isinstance(population, np.ndarray):
        for s, r in zip(population, partition.ranks):
            s.nds_rank = int(r)
    return partition


def crowding_distance(front) -> np.ndarray:
    """Crowding distance of each member of one front.

    Boundary points of every objective with a non-zero range get ``inf``;
    interior points sum neighbour gaps normalised by the front's range.
    Repeated objective vectors are scored once; later copies get 0.
    """
    F = _as_matrix(front)
    n = len(F)
    if n == 0:
        raise ParameterError("empty front")
    if n <= 2:
        return np.full(n, np.inf)
    _, first = np.unique(F, axis=0, return_index=True)
    first = np.sort(first)
    U = F[first]
    dist_u = np.zeros(len(U))
    if len(U) <= 2:
        dist_u[:] = np.inf
    else:
        for j in range(U.shape[1]):
            order = np.argsort(U[:, j], kind="stable")
            col = U[order, j]
            span = col[-1] - col[0]
            if span <= 0:
                continue
            dist_u[order[0]] = dist_u[order[-1]] = np.inf
            dist_u[order[1:-1]] += (col[2:] - col[:-2]) / span
    out = np.zeros(n)
    out[first] = dist_u
    return out


def spea2_raw_fitness(population) -> np.ndarray:
    """SPEA-2 raw fitness: summed strengths of each member's dominators.

    Strength of ``j`` is the number of members ``j`` dominates. The result is
    zero exactly for non-dominated members. When ``population`` holds
    solutions, their ``raw_fitness`` is set.
    """
    F = _as_matrix(population)
    if len(F) == 0:
        raise ParameterError("empty population")
    D = dominance_matrix(F)
    strength = D.sum(axis=1)
    raw = D.T.astype(np.int64) @ strength
    if not isinstance(population, np.ndarray):
        for s, r in zip(population, raw):
            s.raw_fitness = int(r)
    return raw


def rank_population(population: Sequence[EvaluatedSolution]) -> FrontPartition:
    """Fill ``nds_rank``, ``crowding`` and ``raw_fitness`` on every member."""
    partition = nondominated_sort(population)
    for front in partition.fronts:
        members = [population[i] for i in front]
        for s, c in zip(members, crowding_distance(members)):
            s.crowding = float(c)
    spea2_raw_fitness(population)
    return partition
