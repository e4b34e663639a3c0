"""Front quality metrics and the permutation significance test."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .diversity import pairwise_hamming
from .errors import ParameterError
from .evaluation import EvaluatedSolution, objective_matrix

SIGNIFICANCE_LEVEL = 0.01


@dataclass(frozen=True)
class NormalizationBounds:
    ideal: np.ndarray
    nadir: np.ndarray
    source: str = "per-comparison-union"

    def __post_init__(self):
        ideal = np.asarray(self.ideal, dtype=float)
        nadir = np.asarray(self.nadir, dtype=float)
        if ideal.shape != nadir.shape:
            raise ParameterError("ideal and nadir differ in length")
        if (ideal > nadir).any():
            raise ParameterError("ideal must not exceed nadir")
        object.__setattr__(self, "ideal", ideal)
        object.__setattr__(self, "nadir", nadir)

    @property
    def degenerate(self) -> np.ndarray:
        return self.ideal == self.nadir

    def normalize(self, F: np.ndarray) -> np.ndarray:
        """Map objectives to ``[0, 1]``; degenerate components map to 0."""
        F = np.atleast_2d(np.asarray(F, dtype=float))
        span = np.where(self.degenerate, 1.0, self.nadir - self.ideal)
        out = (F - self.ideal) / span
        out[:, self.degenerate] = 0.0
        return np.clip(out, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"ideal": self.ideal.tolist(), "nadir": self.nadir.tolist(), "source": self.source}


def compute_bounds(fronts: Iterable) -> NormalizationBounds:
    """Componentwise min and max over the union of several fronts."""
    arrays = [np.atleast_2d(_as_objectives(f)) for f in fronts]
    arrays = [a for a in arrays if a.size]
    if not arrays:
        raise ParameterError("need at least one non-empty front")
    union = np.vstack(arrays)
    return NormalizationBounds(union.min(axis=0), union.max(axis=0))


def _as_objectives(front) -> np.ndarray:
    if isinstance(front, np.ndarray):
        return front.astype(float)
    front = list(front)
    if front and isinstance(front[0], EvaluatedSolution):
        return objective_matrix(front)
    return np.asarray(front, dtype=float)


def _nondominated_2d_area(xy: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    area, best_y = 0.0, ref[1]
    xs = xy[order, 0]
    ys = xy[order, 1]
    for i in range(len(xs)):
        if ys[i] >= best_y:
            continue
        # strip from this x to the reference, between the new and old best y
        area += (ref[0] - xs[i]) * (best_y - ys[i])
        best_y = ys[i]
    return area


def hypervolume_normalized(points: np.ndarray, reference: Sequence[float] = (1.0, 1.0, 1.0)) -> float:
    """Exact 3-D hypervolume of points against a reference, by sweeping the third axis."""
    ref = np.asarray(reference, dtype=float)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        return 0.0
    P = P[np.all(P < ref, axis=1)]
    if len(P) == 0:
        return 0.0
    P = P[np.argsort(P[:, 2], kind="stable")]
    volume = 0.0
    for i in range(len(P)):
        z_next = P[i + 1, 2] if i + 1 < len(P) else ref[2]
        if z_next > P[i, 2]:
            volume += _nondominated_2d_area(P[: i + 1, :2], ref[:2]) * (z_next - P[i, 2])
    return float(volume)


def hypervolume(front, bounds: NormalizationBounds, margin: float = 1.0) -> float:
    """Hypervolume of a front after normalisation, with reference point ``margin * (1, 1, 1)``."""
    F = _as_objectives(front)
    if F.size == 0:
        return 0.0
    return hypervolume_normalized(bounds.normalize(F), np.full(F.shape[1], margin))


def _presence_matrix(solutions, mode: str) -> np.ndarray:
    if isinstance(solutions, np.ndarray):
        return solutions.astype(bool)
    return np.array([s.presence(mode) for s in solutions])


def d_hmin(solutions, mode: str = "weekly") -> int:
    """Smallest Hamming distance between two distinct members of the set."""
    B = _presence_matrix(solutions, mode)
    if len(B) < 2:
        raise ParameterError("d_hmin needs at least two solutions")
    H = pairwise_hamming(B)
    return int(H[np.triu_indices(len(B), 1)].min())


def d_hmed(solutions, mode: str = "weekly") -> tuple[float, float]:
    """Mean Hamming distance as ``(all ordered pairs incl. self-pairs, distinct pairs)``.

    The first value divides the full distance-matrix sum by ``|D|**2``; the
    second averages over unordered distinct pairs and is ``nan`` for a single
    solution.
    """
    B = _presence_matrix(solutions, mode)
    if len(B) < 1:
        raise ParameterError("d_hmed needs at least one solution")
    H = pairwise_hamming(B)
    n = len(B)
    full = float(H.sum()) / n**2
    distinct = float(H[np.triu_indices(n, 1)].mean()) if n > 1 else float("nan")
    return full, distinct


@dataclass(frozen=True)
class MetricsReport:
    hypervolume: float
    d_hmin: int
    d_hmed: float
    d_hmed_distinct: float
    set_size: int

    def as_dict(self) -> dict:
        return {
            "hv": self.hypervolume,
            "d_hmin": self.d_hmin,
            "d_hmed": self.d_hmed,
            "d_hmed_distinct": self.d_hmed_distinct,
            "front_size": self.set_size,
        }


def compute_metrics(
    solutions: Sequence[EvaluatedSolution], bounds: NormalizationBounds, mode: str = "weekly", margin: float = 1.0
) -> MetricsReport:
    """All front metrics at once. A single-solution set scores 0 on both Hamming metrics."""
    if not solutions:
        return MetricsReport(0.0, 0, 0.0, 0.0, 0)
    hv = hypervolume(solutions, bounds, margin)
    if len(solutions) < 2:
        return MetricsReport(hv, 0, 0.0, 0.0, 1)
    full, distinct = d_hmed(solutions, mode)
    return MetricsReport(hv, d_hmin(solutions, mode), full, distinct, len(solutions))


@dataclass(frozen=True)
class PermTestResult:
    observed_diff: float
    permutation_diffs: np.ndarray
    p_value: float
    mean_a: float
    mean_b: float

    @property
    def n_permutations(self) -> int:
        return len(self.permutation_diffs)

    @property
    def significant_at_01(self) -> bool:
        return self.p_value < SIGNIFICANCE_LEVEL

    def to_dict(self) -> dict:
        return {
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "observed_diff": self.observed_diff,
            "p_value": self.p_value,
            "significant_at_01": self.significant_at_01,
            "n_permutations": self.n_permutations,
            "permutation_diffs": self.permutation_diffs.tolist(),
        }


def permutation_test(
    sample_a: Sequence[float],
    sample_b: Sequence[float],
    n_permutations: int = 5000,
    seed: int | np.random.Generator | None = None,
    chunk: int = 1000,
) -> PermTestResult:
    """Two-sided permutation test on the difference of means ``mean(a) - mean(b)``.

    The pooled values are shuffled and re-split at the original sizes
    ``n_permutations`` times. The p-value is
    ``(1 + #{|perm diff| >= |observed|}) / (1 + n_permutations)``. The two
    samples are put in a canonical order before shuffling, so swapping them
    negates every difference and leaves the p-value unchanged.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ParameterError("both samples must be non-empty")
    if n_permutations < 1:
        raise ParameterError("n_permutations must be >= 1")
    rng = np.random.default_rng(seed)

    swapped = (len(b), sorted(b.tolist())) < (len(a), sorted(a.tolist()))
    first, second = (b, a) if swapped else (a, b)
    pooled = np.concatenate([first, second])
    n1 = len(first)
    observed = first.mean() - second.mean()

    diffs = np.empty(n_permutations)
    for start in range(0, n_permutations, chunk):
        stop = min(start + chunk, n_permutations)
        shuffled = rng.permuted(np.broadcast_to(pooled, (stop - start, len(pooled))), axis=1)
        diffs[start:stop] = shuffled[:, :n1].mean(axis=1) - shuffled[:, n1:].mean(axis=1)

    scale = max(1.0, float(np.abs(pooled).max()))
    extreme = np.abs(diffs) >= abs(observed) - 1e-12 * scale
    p_value = (1 + int(extreme.sum())) / (1 + n_permutations)
    sign = -1.0 if swapped else 1.0
    return PermTestResult(
        observed_diff=float(sign * observed),
        permutation_diffs=sign * diffs,
        p_value=float(p_value),
        mean_a=float(a.mean()),
        mean_b=float(b.mean()),
    )
