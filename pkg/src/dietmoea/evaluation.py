"""Objectives, constraint violation and feasibility of a weekly diet.

A genome is an ``(n, horizon)`` integer array: ``genome[i, d]`` is the number
of servings of item ``i`` on day ``d``. All three objectives are minimised:
cost, category repetitiveness and negated protein.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionError
from .instance import ProblemInstance

DEFAULT_CELL_CAP = 5


class ObjectiveVector(NamedTuple):
    cost: float
    repetitiveness: float
    neg_protein: float


@dataclass(eq=False)
class EvaluatedSolution:
    """A genome with its objective values and, once ranked, its rank fields."""

    genome: np.ndarray
    objectives: ObjectiveVector
    penalty: float
    nds_rank: int | None = None
    crowding: float | None = None
    raw_fitness: int | None = None
    _presence: dict = field(default_factory=dict, repr=False)

    @property
    def feasible(self) -> bool:
        return self.penalty == 0

    def presence(self, mode: str = "weekly") -> np.ndarray:
        """Cached presence vector (see :func:`dietmoea.diversity.binarize`)."""
        if mode not in self._presence:
            from .diversity import binarize

            self._presence[mode] = binarize(self.genome, mode)
        return self._presence[mode]


def check_genome(genome: np.ndarray, instance: ProblemInstance, cap: int | None = DEFAULT_CELL_CAP) -> None:
    """Raise if ``genome`` has the wrong shape, negative cells or cells above ``cap``."""
    if genome.shape != instance.shape:
        raise DimensionError(f"genome shape {genome.shape} does not match instance {instance.shape}")
    if not np.issubdtype(genome.dtype, np.integer):
        raise DimensionError(f"genome must hold integers, got {genome.dtype}")
    if (genome < 0).any():
        raise DimensionError("genome has negative servings")
    if cap is not None and (genome > cap).any():
        raise DimensionError(f"genome exceeds the cap of {cap} servings per cell")


def _check_shape(genome: np.ndarray, instance: ProblemInstance) -> None:
    if genome.shape != instance.shape:
        raise DimensionError(f"genome shape {genome.shape} does not match instance {instance.shape}")


def eval_cost_cents(genome: np.ndarray, instance: ProblemInstance) -> int:
    _check_shape(genome, instance)
    return int(instance.cost_cents @ genome.sum(axis=1, dtype=np.int64))


def eval_cost(genome: np.ndarray, instance: ProblemInstance) -> float:
    """Weekly cost in currency units, summed exactly in cents."""
    return eval_cost_cents(genome, instance) / 100


def day_category_profile(genome: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    """``(horizon, p)`` boolean matrix: group ``g`` eaten on day ``d``."""
    _check_shape(genome, instance)
    present = np.zeros((instance.horizon, instance.p), dtype=bool)
    rows, days = np.nonzero(genome)
    present[days, instance.group_index[rows]] = True
    return present


def eval_repetitiveness(genome: np.ndarray, instance: ProblemInstance) -> float:
    """Sum over days ``d`` and look-backs ``k < d`` of repeated-group penalties.

    A group counts as repeated at offset ``k`` when it is present on both day
    ``d`` and day ``d - k``; each repeated group adds its own penalty, and the
    offset penalty for ``k`` is added once if any group repeats. Offsets past
    the six tabulated ones carry no offset penalty.
    """
    present = day_category_profile(genome, instance)
    group_pen = np.asarray(instance.penalties.group_penalties)
    offset_pen = instance.penalties.offset_penalties
    total = 0.0
    for k in range(1, instance.horizon):
        repeated = present[k:] & present[:-k]  # row t is day t + k vs day t
        total += float((repeated @ group_pen).sum())
        if k <= len(offset_pen):
            total += offset_pen[k - 1] * int(repeated.any(axis=1).sum())
    return total


def eval_protein(genome: np.ndarray, instance: ProblemInstance) -> float:
    _check_shape(genome, instance)
    return float(instance.protein @ genome.sum(axis=1))


def nutrient_supply(genome: np.ndarray, instance: ProblemInstance) -> np.ndarray:
    """``(m, horizon)`` amount of each nutrient supplied on each day."""
    _check_shape(genome, instance)
    return instance.nutrient_matrix.T @ genome


def eval_penalty(genome: np.ndarray, instance: ProblemInstance, normalized: bool = False) -> float:
    """Total daily shortfall below the nutrient requirements.

    With ``normalized=True`` each shortfall is divided by its requirement so
    nutrients with different units weigh alike.
    """
    req = instance.requirement_vector[:, None]
    deficit = np.maximum(0.0, req - nutrient_supply(genome, instance))
    if normalized:
        deficit = deficit / req
    return float(deficit.sum())


def evaluate(genome: np.ndarray, instance: ProblemInstance, normalized_penalty: bool = False) -> EvaluatedSolution:
    objectives = ObjectiveVector(
        eval_cost(genome, instance),
        eval_repetitiveness(genome, instance),
        0.0 - eval_protein(genome, instance),
    )
    return EvaluatedSolution(genome, objectives, eval_penalty(genome, instance, normalized_penalty))


def objective_matrix(population) -> np.ndarray:
    """Stack objective vectors of a population into an ``(N, 3)`` array."""
    return np.array([s.objectives for s in population], dtype=float).reshape(len(population), 3)
