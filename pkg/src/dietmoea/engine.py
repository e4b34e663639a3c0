"""Generational loops for MOEA-HD and the constrained NSGA-II baseline.

Both engines share representation, initialization, operators and the repair
schedule (after initialization and once more on the final population). They
differ in mating selection and survival:

* MOEA-HD: diversity tournaments on w_dH, survival by DWH selection over
  parents plus offspring.
* NSGA-II: feasibility/penalty/rank/crowding tournaments, survival by front
  rank with crowding-distance truncation.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .analytics import d_hmin, d_hmed
from .diversity import BINARIZE_MODES, diversity_tournament, dwh_select
from .errors import DietMOEAError, ParameterError, RepairError
from .evaluation import EvaluatedSolution, evaluate
from .instance import ProblemInstance
from .ranking import rank_population
from .variation import VariationConfig, crossover, init_population, mutate, repair

log = logging.getLogger(__name__)

RESULT_FORMAT = "dietmoea-run/1"


class Algorithm(str, Enum):
    MOEA_HD = "moea-hd"
    NSGA2 = "nsga2"


TOURNAMENT_MODES = ("per-tournament", "wholesale")


@dataclass(frozen=True)
class AlgorithmConfig:
    algorithm: Algorithm = Algorithm.MOEA_HD
    population_size: int = 30
    max_generations: int = 30
    master_seed: int = 0
    variation: VariationConfig = field(default_factory=VariationConfig)
    binarize: str = "weekly"
    normalized_penalty: bool = False
    tournament_mode: str = "per-tournament"
    trace: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.population_size < 2:
            raise ParameterError("population_size must be >= 2")
        if self.max_generations < 1:
            raise ParameterError("max_generations must be >= 1")
        if self.binarize not in BINARIZE_MODES:
            raise ParameterError(f"binarize must be one of {BINARIZE_MODES}")
        if self.tournament_mode not in TOURNAMENT_MODES:
            raise ParameterError(f"tournament_mode must be one of {TOURNAMENT_MODES}")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm.value,
            "population_size": self.population_size,
            "max_generations": self.max_generations,
            "master_seed": self.master_seed,
            "variation": self.variation.to_dict(),
            "binarize": self.binarize,
            "normalized_penalty": self.normalized_penalty,
            "tournament_mode": self.tournament_mode,
            "trace": self.trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AlgorithmConfig:
        d = dict(d)
        var = dict(d.pop("variation", {}))
        if "init_weights" in var:
            var["init_weights"] = tuple(var["init_weights"])
        return cls(variation=VariationConfig(**var), **d)


@dataclass
class RunResult:
    algorithm: Algorithm
    seed: int
    config: AlgorithmConfig
    final_population: list[EvaluatedSolution]
    nondominated: list[EvaluatedSolution]
    generations_run: int
    wall_time: float = 0.0
    trace: list[dict] = field(default_factory=list)
    instance_digest: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self, instance: ProblemInstance | None = None) -> dict:
        """JSON-ready document. Wall time is left out so reruns serialize identically."""
        doc = {
            "format": RESULT_FORMAT,
            "algorithm": self.algorithm.value,
            "seed": self.seed,
            "generations_run": self.generations_run,
            "config": self.config.to_dict(),
            "instance_digest": self.instance_digest,
        }
        if instance is not None:
            doc["instance"] = {
                "n_items": instance.n,
                "horizon": instance.horizon,
                "cost_seed": instance.cost_seed,
                "nutrients": list(instance.requirements.nutrient_ids),
                "categories": [f.category for f in instance.foods],
                "penalty_groups": [f.group_name for f in instance.foods],
            }
        doc.update(self.extra)
        doc["nondominated"] = [_solution_to_dict(s) for s in self.nondominated]
        if self.trace:
            doc["trace"] = self.trace
        return doc

    def to_json(self, instance: ProblemInstance | None = None) -> str:
        return json.dumps(self.to_dict(instance), indent=1, sort_keys=False) + "\n"


def _solution_to_dict(s: EvaluatedSolution) -> dict:
    items, days = np.nonzero(s.genome)
    return {
        "objectives": [float(v) for v in s.objectives],
        "penalty": float(s.penalty),
        "genome": [[int(i) + 1, int(d) + 1, int(s.genome[i, d])] for i, d in zip(items, days)],
    }


def genome_from_triples(triples, n_items: int, horizon: int) -> np.ndarray:
    """Rebuild a dense genome from 1-based ``(item, day, servings)`` triples."""
    genome = np.zeros((n_items, horizon), dtype=np.int64)
    for item, day, servings in triples:
        genome[item - 1, day - 1] = servings
    return genome


def instance_digest(instance: ProblemInstance) -> str:
    """Short content hash of the numeric instance data."""
    h = hashlib.sha256()
    for arr in (instance.cost_cents, instance.nutrient_matrix, instance.protein,
                instance.group_index, instance.requirement_vector):
        h.update(np.ascontiguousarray(arr).tobytes())
    h.update(json.dumps(instance.penalties.as_dict()).encode())
    h.update(str(instance.horizon).encode())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# shared pieces


def _evaluate_all(genomes, instance, config: AlgorithmConfig) -> list[EvaluatedSolution]:
    return [evaluate(g, instance, config.normalized_penalty) for g in genomes]


def _repair_all(genomes, instance, config: AlgorithmConfig, stage: str) -> list[np.ndarray]:
    out = []
    for idx, g in enumerate(genomes):
        try:
            out.append(repair(g, instance, config.variation))
        except RepairError as exc:
            raise RepairError(f"{stage}, individual {idx}: {exc}") from exc
    return out


def _make_offspring(parents: list[EvaluatedSolution], k: int, config: AlgorithmConfig, rng) -> list[np.ndarray]:
    """Pair parents in selection order (last with first when odd), cross and mutate."""
    children = []
    for i in range(0, len(parents), 2):
        a = parents[i]
        b = parents[i + 1] if i + 1 < len(parents) else parents[0]
        for child in crossover(a.genome, b.genome, config.variation, rng):
            children.append(mutate(child, config.variation, rng))
    return children[:k]


def _pick_pair(k: int, rng) -> tuple[int, int]:
    i, j = rng.choice(k, size=2, replace=False)
    return int(i), int(j)


def _trace_row(gen: int, population: list[EvaluatedSolution], mode: str) -> dict:
    front = [s for s in population if s.nds_rank == 0]
    row = {
        "generation": gen,
        "feasible": sum(s.feasible for s in population),
        "front_size": len(front),
        "mean_penalty": float(np.mean([s.penalty for s in population])),
    }
    if len(front) > 1:
        row["front_d_hmin"] = d_hmin(front, mode)
        row["front_d_hmed"] = d_hmed(front, mode)[0]
    return row


def _finish(population, instance, config: AlgorithmConfig, start: float, trace) -> RunResult:
    genomes = _repair_all([s.genome for s in population], instance, config, "final repair")
    final = _evaluate_all(genomes, instance, config)
    rank_population(final)
    nondominated = [s for s in final if s.nds_rank == 0]
    return RunResult(
        algorithm=config.algorithm,
        seed=config.master_seed,
        config=config,
        final_population=final,
        nondominated=nondominated,
        generations_run=config.max_generations,
        wall_time=time.perf_counter() - start,
        trace=trace,
        instance_digest=instance_digest(instance),
    )


def _initial_population(instance, config: AlgorithmConfig, rng) -> list[EvaluatedSolution]:
    genomes = init_population(instance, config.population_size, config.variation, rng)
    genomes = _repair_all(genomes, instance, config, "initial repair")
    population = _evaluate_all(genomes, instance, config)
    rank_population(population)
    return population


# ---------------------------------------------------------------------------
# MOEA-HD


def _moea_hd_parents(population, config: AlgorithmConfig, rng) -> list[EvaluatedSolution]:
    k = config.population_size
    if config.tournament_mode == "wholesale":
        return dwh_select(population, k, config.binarize)
    winners: list[EvaluatedSolution] = []
    for _ in range(k):
        i, j = _pick_pair(k, rng)
        winners.append(diversity_tournament(population[i], population[j], winners, rng, config.binarize))
    return winners


def run_moea_hd(instance: ProblemInstance, config: AlgorithmConfig) -> RunResult:
    if config.algorithm is not Algorithm.MOEA_HD:
        raise ParameterError(f"run_moea_hd got algorithm {config.algorithm.value}")
    start = time.perf_counter()
    rng = np.random.default_rng(config.master_seed)
    k = config.population_size
    population = _initial_population(instance, config, rng)
    trace = []
    for gen in range(config.max_generations):
        parents = _moea_hd_parents(population, config, rng)
        offspring = _evaluate_all(_make_offspring(parents, k, config, rng), instance, config)
        combined = population + offspring
        rank_population(combined)
        population = dwh_select(combined, k, config.binarize)
        rank_population(population)
        if config.trace:
            trace.append(_trace_row(gen + 1, population, config.binarize))
    return _finish(population, instance, config, start, trace)


# ---------------------------------------------------------------------------
# NSGA-II


def _crowded_tournament(a: EvaluatedSolution, b: EvaluatedSolution, rng) -> EvaluatedSolution:
    if a.feasible != b.feasible:
        return a if a.feasible else b
    if not a.feasible and a.penalty != b.penalty:
        return a if a.penalty < b.penalty else b
    if a.nds_rank != b.nds_rank:
        return a if a.nds_rank < b.nds_rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def survival_nsga2(combined: list[EvaluatedSolution], k: int) -> list[EvaluatedSolution]:
    """Keep whole fronts while they fit, then the most crowded-apart members of the next.

    Members of the split front are ordered by decreasing crowding distance,
    earlier index first on ties.
    """
    partition = rank_population(combined)
    survivors: list[EvaluatedSolution] = []
    for front in partition.fronts:
        members = [combined[i] for i in front]
        if len(survivors) + len(members) <= k:
            survivors.extend(members)
            continue
        order = sorted(range(len(members)), key=lambda i: -members[i].crowding)
        survivors.extend(members[i] for i in order[: k - len(survivors)])
        break
    return survivors


def run_nsga2(instance: ProblemInstance, config: AlgorithmConfig) -> RunResult:
    if config.algorithm is not Algorithm.NSGA2:
        raise ParameterError(f"run_nsga2 got algorithm {config.algorithm.value}")
    start = time.perf_counter()
    rng = np.random.default_rng(config.master_seed)
    k = config.population_size
    population = _initial_population(instance, config, rng)
    trace = []
    for gen in range(config.max_generations):
        parents = [_crowded_tournament(*(population[i] for i in _pick_pair(k, rng)), rng) for _ in range(k)]
        offspring = _evaluate_all(_make_offspring(parents, k, config, rng), instance, config)
        population = survival_nsga2(population + offspring, k)
        rank_population(population)
        if config.trace:
            trace.append(_trace_row(gen + 1, population, config.binarize))
    return _finish(population, instance, config, start, trace)


# ---------------------------------------------------------------------------
# dispatch and batches


def run(instance: ProblemInstance, config: AlgorithmConfig) -> RunResult:
    if config.algorithm is Algorithm.MOEA_HD:
        return run_moea_hd(instance, config)
    return run_nsga2(instance, config)


class BatchError(DietMOEAError):
    def __init__(self, seed: int, cause: Exception):
        self.seed = seed
        self.cause = cause
        super().__init__(f"run with seed {seed} failed: {cause}")

    def __reduce__(self):
        # keeps the exception picklable across worker processes
        return (type(self), (self.seed, self.cause))


def _run_seeded(args):
    instance, config = args
    try:
        return run(instance, config)
    except Exception as exc:
        raise BatchError(config.master_seed, exc) from exc


def run_batch(
    instance: ProblemInstance, config: AlgorithmConfig, repetitions: int, seed_base: int = 0, jobs: int = 1
) -> list[RunResult]:
    """Independent runs with seeds ``seed_base + r``, returned in repetition order."""
    if repetitions < 1:
        raise ParameterError("repetitions must be >= 1")
    tasks = [(instance, replace(config, master_seed=seed_base + r)) for r in range(repetitions)]
    if jobs <= 1:
        results = []
        for task in tasks:
            results.append(_run_seeded(task))
            log.debug("%s seed %d done", config.algorithm.value, task[1].master_seed)
        return results
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_seeded, tasks))
