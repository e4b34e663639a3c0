"""Initialization, repair, crossover and mutation on serving matrices.

Every operator takes ``rng``: an integer seed, ``None`` or an existing
``numpy.random.Generator`` (which is consumed in place, so an engine can
thread a single stream through a whole run).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionError, ParameterError, RepairError
from .evaluation import DEFAULT_CELL_CAP, nutrient_supply
from .instance import ProblemInstance

RNGLike = int | np.random.Generator | None


@dataclass(frozen=True)
class VariationConfig:
    init_weights: tuple[float, float, float] = (0.94, 0.04, 0.01)
    crossover_points: int = 20
    mut_one_to_zero: float = 0.05
    mut_zero_to_one: float = 0.0016
    cell_cap: int = DEFAULT_CELL_CAP
    repair_max_iters: int | None = None  # None: 10 * n

    def __post_init__(self):
        object.__setattr__(self, "init_weights", tuple(float(w) for w in self.init_weights))
        if len(self.init_weights) != 3 or any(not 0 <= w <= 1 for w in self.init_weights):
            raise ParameterError(f"init_weights must be three probabilities, got {self.init_weights}")
        if sum(self.init_weights) > 1 + 1e-12:
            raise ParameterError(f"init_weights sum to more than 1: {self.init_weights}")
        for name in ("mut_one_to_zero", "mut_zero_to_one"):
            if not 0 <= getattr(self, name) <= 1:
                raise ParameterError(f"{name} must be in [0, 1]")
        if self.crossover_points < 1:
            raise ParameterError("crossover_points must be >= 1")
        if self.cell_cap < 2:
            raise ParameterError("cell_cap must be >= 2 to hold initial servings")
        if self.repair_max_iters is not None and self.repair_max_iters < 1:
            raise ParameterError("repair_max_iters must be >= 1")

    @property
    def init_probabilities(self) -> np.ndarray:
        """Probabilities of 0, 1, 2 servings; any missing mass goes to 0."""
        w = np.array(self.init_weights)
        w[0] += 1.0 - w.sum()
        return w

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_weights"] = list(self.init_weights)
        return d


def init_population(
    instance: ProblemInstance, k: int, config: VariationConfig | None = None, rng: RNGLike = None
) -> list[np.ndarray]:
    """Draw ``k`` genomes cell by cell from the initial serving distribution."""
    if k < 2:
        raise ParameterError(f"population size must be >= 2, got {k}")
    config = config or VariationConfig()
    rng = np.random.default_rng(rng)
    cells = rng.choice(3, size=(k, *instance.shape), p=config.init_probabilities)
    return [g.astype(np.int64) for g in cells]


def repair(genome: np.ndarray, instance: ProblemInstance, config: VariationConfig | None = None) -> np.ndarray:
    """Add servings until every daily nutrient requirement is met.

    Greedy and deterministic: on the earliest deficient day, add one serving of
    the item with the best ratio of deficit-weighted gain to cost, where gain
    is each nutrient's contribution capped at its remaining deficit, scaled by
    the requirement, and weighted by the relative deficit. Ties go to the
    lower item id; cells at the cap are skipped. Feasible input is returned
    unchanged (same values, new array).

    Raises:
        RepairError: no item can reduce a deficit, or ``repair_max_iters``
            servings were added without reaching feasibility.
    """
    config = config or VariationConfig()
    if genome.shape != instance.shape:
        raise DimensionError(f"genome shape {genome.shape} does not match instance {instance.shape}")
    out = np.array(genome, dtype=np.int64)
    max_iters = config.repair_max_iters or 10 * instance.n
    req = instance.requirement_vector
    A = instance.nutrient_matrix
    price = np.maximum(instance.cost_cents, 1) / 100

    for added in range(max_iters + 1):
        deficit = np.maximum(0.0, req[:, None] - nutrient_supply(out, instance))
        days = np.flatnonzero(deficit.any(axis=0))
        if days.size == 0:
            return out
        if added == max_iters:
            break
        d = days[0]
        need = deficit[:, d]
        gain = (np.minimum(A, need) / req) @ (need / req)
        gain[out[:, d] >= config.cell_cap] = 0.0
        if not gain.max() > 0:
            raise RepairError(f"day {d + 1}: no item below the cap supplies the missing nutrients")
        out[int(np.argmax(gain / price)), d] += 1
    raise RepairError(f"still infeasible after {max_iters} added servings")


def crossover(
    parent_a: np.ndarray, parent_b: np.ndarray, config: VariationConfig | None = None, rng: RNGLike = None
) -> tuple[np.ndarray, np.ndarray]:
    """Multi-point crossover on the row-major flattened genomes.

    Cut positions are distinct and drawn uniformly from the ``L - 1`` gaps
    between cells; when ``L - 1`` is smaller than the configured number of
    points, every gap is cut.
    """
    config = config or VariationConfig()
    if parent_a.shape != parent_b.shape:
        raise DimensionError(f"parent shapes differ: {parent_a.shape} vs {parent_b.shape}")
    rng = np.random.default_rng(rng)
    a, b = parent_a.ravel(), parent_b.ravel()
    length = a.size
    if length < 2:
        return parent_a.copy(), parent_b.copy()
    n_cuts = min(config.crossover_points, length - 1)
    cuts = np.sort(rng.choice(np.arange(1, length), size=n_cuts, replace=False))
    swap = np.searchsorted(cuts, np.arange(length), side="right") % 2 == 1
    child_a = np.where(swap, b, a).reshape(parent_a.shape)
    child_b = np.where(swap, a, b).reshape(parent_a.shape)
    return child_a, child_b


def mutate(genome: np.ndarray, config: VariationConfig | None = None, rng: RNGLike = None) -> np.ndarray:
    """Asymmetric bit flip: occupied cells drop to 0, empty cells become 1."""
    config = config or VariationConfig()
    rng = np.random.default_rng(rng)
    u = rng.random(genome.shape)
    out = genome.copy()
    out[(genome > 0) & (u < config.mut_one_to_zero)] = 0
    out[(genome == 0) & (u < config.mut_zero_to_one)] = 1
    return out
