"""Food data ingestion and the immutable problem instance.

Foods are read from a CSV file (``name,category,<nutrients...>[,cost]``),
costs may be drawn at random, dataset categories are mapped onto the eight
repetition-penalty groups, and everything is frozen into a
:class:`ProblemInstance` that carries the numeric arrays the evaluator uses.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    CategoryError,
    EmptyDatasetError,
    InconsistencyError,
    MappingError,
    ParameterError,
    ParseError,
)

PENALTY_GROUPS: tuple[str, ...] = (
    "Other",
    "Meats",
    "Cereals",
    "Fruits",
    "Dairy",
    "Legumes",
    "Seafood",
    "Vegetables",
)

# Table of repetition penalties: one per group, then one per day offset 1..6.
DEFAULT_GROUP_PENALTIES: tuple[float, ...] = (0.1, 3.0, 0.3, 0.1, 0.3, 0.3, 0.5, 0.1)
DEFAULT_OFFSET_PENALTIES: tuple[float, ...] = (3.0, 2.5, 1.8, 1.0, 0.2, 0.1)

# The 15 source categories of the Brazilian composition table, with item counts.
DATASET_CATEGORY_COUNTS: dict[str, int] = {
    "Cereals and derivatives": 63,
    "Vegetables, greens, and derivatives": 99,
    "Fruits and derivatives": 96,
    "Fats and oils": 14,
    "fish and Seafood": 50,
    "Meats and meat products": 123,
    "Milk and dairy products": 24,
    "Alcoholic and non-alcoholic beverages": 14,
    "Eggs and derivatives": 7,
    "Sugary products": 20,
    "Miscellaneous": 9,
    "Other processed foods": 5,
    "Prepared food": 32,
    "Legumes and derivatives": 30,
    "Nuts and seeds": 11,
}
DATASET_CATEGORIES: tuple[str, ...] = tuple(DATASET_CATEGORY_COUNTS)

DEFAULT_CATEGORY_MAPPING: dict[str, str] = {
    "Cereals and derivatives": "Cereals",
    "Vegetables, greens, and derivatives": "Vegetables",
    "Fruits and derivatives": "Fruits",
    "Fats and oils": "Other",
    "fish and Seafood": "Seafood",
    "Meats and meat products": "Meats",
    "Milk and dairy products": "Dairy",
    "Alcoholic and non-alcoholic beverages": "Other",
    "Eggs and derivatives": "Other",
    "Sugary products": "Other",
    "Miscellaneous": "Other",
    "Other processed foods": "Other",
    "Prepared food": "Other",
    "Legumes and derivatives": "Legumes",
    "Nuts and seeds": "Other",
}

PROTEIN_ID = "protein_g"
COST_COLUMN = "cost"
DEFAULT_HORIZON = 7


@dataclass(frozen=True)
class FoodItem:
    """One food with per-serving nutrient contents and unit cost.

    ``cost_cents`` is ``None`` until a cost is read from file or assigned;
    ``penalty_group`` is ``None`` until :func:`map_categories` runs.
    """

    id: int
    name: str
    category: str
    nutrients: Mapping[str, float]
    protein: float = 0.0
    cost_cents: int | None = None
    penalty_group: int | None = None

    @property
    def cost(self) -> float:
        return 0.0 if self.cost_cents is None else self.cost_cents / 100

    @property
    def group_name(self) -> str | None:
        return None if self.penalty_group is None else PENALTY_GROUPS[self.penalty_group - 1]


@dataclass(frozen=True)
class PenaltySchedule:
    group_penalties: tuple[float, ...] = DEFAULT_GROUP_PENALTIES
    offset_penalties: tuple[float, ...] = DEFAULT_OFFSET_PENALTIES

    def __post_init__(self):
        object.__setattr__(self, "group_penalties", tuple(float(v) for v in self.group_penalties))
        object.__setattr__(self, "offset_penalties", tuple(float(v) for v in self.offset_penalties))
        if len(self.group_penalties) != len(PENALTY_GROUPS):
            raise ParameterError(f"expected {len(PENALTY_GROUPS)} group penalties, got {len(self.group_penalties)}")
        if len(self.offset_penalties) != 6:
            raise ParameterError(f"expected 6 offset penalties, got {len(self.offset_penalties)}")
        if any(v < 0 for v in self.group_penalties + self.offset_penalties):
            raise ParameterError("penalties must be non-negative")

    def as_dict(self) -> dict[str, float]:
        values = self.group_penalties + self.offset_penalties
        return {f"p{i}": v for i, v in enumerate(values, start=1)}


@dataclass(frozen=True)
class NutrientRequirements:
    """Minimum daily amount per nutrient, in file order."""

    entries: Mapping[str, float]
    units: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        entries = {str(k): float(v) for k, v in self.entries.items()}
        if not entries:
            raise ParameterError("requirements must name at least one nutrient")
        bad = [k for k, v in entries.items() if not v > 0]
        if bad:
            raise ParameterError(f"requirements must be positive: {', '.join(bad)}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "units", dict(self.units))

    @property
    def nutrient_ids(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def _frozen(array, dtype=None) -> np.ndarray:
    out = np.array(array, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Foods, requirements and penalties for one planning horizon.

    Construction validates every cross reference and precomputes read-only
    arrays: ``cost_cents`` (n,), ``nutrient_matrix`` (n, m) in requirement
    order, ``protein`` (n,), ``group_index`` (n,) zero-based, and
    ``requirement_vector`` (m,).
    """

    foods: tuple[FoodItem, ...]
    requirements: NutrientRequirements
    penalties: PenaltySchedule = field(default_factory=PenaltySchedule)
    horizon: int = DEFAULT_HORIZON
    cost_seed: int | None = None

    def __post_init__(self):
        foods = tuple(self.foods)
        object.__setattr__(self, "foods", foods)
        if not foods:
            raise ParameterError("instance needs at least one food")
        if self.horizon < 1:
            raise ParameterError(f"horizon must be >= 1, got {self.horizon}")
        if [f.id for f in foods] != list(range(1, len(foods) + 1)):
            raise InconsistencyError("food ids must be 1..n without gaps, in order")
        ungrouped = [f.name for f in foods if f.penalty_group is None]
        if ungrouped:
            raise InconsistencyError(f"{len(ungrouped)} foods have no penalty group (first: {ungrouped[0]!r})")
        bad_groups = {f.penalty_group for f in foods} - set(range(1, len(PENALTY_GROUPS) + 1))
        if bad_groups:
            raise InconsistencyError(f"penalty groups out of range: {sorted(bad_groups)}")
        known = set().union(*(f.nutrients for f in foods))
        orphans = [j for j in self.requirements.nutrient_ids if j not in known]
        if orphans:
            raise InconsistencyError(f"required nutrients absent from every food: {', '.join(orphans)}")

        ids = self.requirements.nutrient_ids
        matrix = np.array([[f.nutrients.get(j, 0.0) for j in ids] for f in foods], dtype=float)
        if (matrix < 0).any():
            raise InconsistencyError("nutrient amounts must be non-negative")
        cents = np.array([f.cost_cents or 0 for f in foods], dtype=np.int64)
        if (cents < 0).any():
            raise InconsistencyError("costs must be non-negative")
        object.__setattr__(self, "cost_cents", _frozen(cents))
        object.__setattr__(self, "nutrient_matrix", _frozen(matrix))
        object.__setattr__(self, "protein", _frozen([f.protein for f in foods], float))
        object.__setattr__(self, "group_index", _frozen([f.penalty_group - 1 for f in foods], np.int64))
        object.__setattr__(self, "requirement_vector", _frozen([self.requirements.entries[j] for j in ids], float))

    @property
    def n(self) -> int:
        return len(self.foods)

    @property
    def m(self) -> int:
        return len(self.requirements)

    @property
    def p(self) -> int:
        return len(PENALTY_GROUPS)

    @property
    def shape(self) -> tuple[int, int]:
        """Genome shape (items, days)."""
        return (self.n, self.horizon)


# ---------------------------------------------------------------------------
# key = value files


def read_key_values(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {lineno}: expected 'key = value'", row=lineno)
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def load_requirements(path: str | Path) -> NutrientRequirements:
    """Read a requirements file.

    Unit annotations are comment lines of the form ``# unit: protein_g = g``.
    """
    units = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line.startswith("#") and line[1:].strip().lower().startswith("unit:"):
                body = line[1:].strip()[5:]
                if "=" in body:
                    key, unit = body.split("=", 1)
                    units[key.strip()] = unit.strip()
    entries = {}
    for key, value in read_key_values(path).items():
        try:
            entries[key] = float(value)
        except ValueError:
            raise ParseError(f"{path}: requirement {key!r} is not numeric: {value!r}") from None
    return NutrientRequirements(entries, units)


def load_category_mapping(path: str | Path) -> dict[str, int]:
    return {cat: _group_number(group) for cat, group in read_key_values(path).items()}


def load_penalties(path: str | Path) -> PenaltySchedule:
    """Read ``p1 = ...`` through ``p14 = ...``; missing keys keep their defaults."""
    values = list(DEFAULT_GROUP_PENALTIES + DEFAULT_OFFSET_PENALTIES)
    for key, value in read_key_values(path).items():
        if not (key.startswith("p") and key[1:].isdigit() and 1 <= int(key[1:]) <= len(values)):
            raise ParseError(f"{path}: unknown penalty key {key!r}")
        try:
            values[int(key[1:]) - 1] = float(value)
        except ValueError:
            raise ParseError(f"{path}: penalty {key!r} is not numeric: {value!r}") from None
    return PenaltySchedule(tuple(values[:8]), tuple(values[8:]))


def _group_number(group: int | str) -> int:
    if isinstance(group, (int, np.integer)):
        number = int(group)
    elif str(group).strip().isdigit():
        number = int(str(group).strip())
    else:
        names = {g.lower(): i for i, g in enumerate(PENALTY_GROUPS, start=1)}
        try:
            number = names[str(group).strip().lower()]
        except KeyError:
            raise MappingError([str(group)]) from None
    if not 1 <= number <= len(PENALTY_GROUPS):
        raise ParameterError(f"penalty group {number} out of range 1..{len(PENALTY_GROUPS)}")
    return number


# ---------------------------------------------------------------------------
# foods CSV


def _parse_cents(text: str) -> int:
    value = Decimal(text)
    if not value.is_finite():
        raise InvalidOperation(text)
    return int((value * 100).to_integral_value())


def _format_cents(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    return f"{sign}{abs(cents) // 100}.{abs(cents) % 100:02d}"


def load_foods(
    path: str | Path,
    *,
    categories: Iterable[str] | None = DATASET_CATEGORIES,
    protein_column: str = PROTEIN_ID,
    drop_incomplete: bool = False,
) -> list[FoodItem]:
    """Read foods from CSV, assigning ids 1..n in file order.

    ``categories`` is the set of accepted category labels (``None`` accepts
    anything). Empty nutrient cells are zero-filled, or the whole row is
    skipped with ``drop_incomplete=True``. Row numbers in errors count data
    rows from 1.
    """
    allowed = None if categories is None else set(categories)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyDatasetError(f"{path}: file is empty")
        header = [h.strip() for h in header]
        if header[:2] != ["name", "category"]:
            raise ParseError(f"{path}: header must start with 'name,category', got {header[:2]}", row=0)
        has_cost = header[-1] == COST_COLUMN
        nutrient_cols = header[2:-1] if has_cost else header[2:]
        if protein_column not in nutrient_cols:
            raise ParseError(f"{path}: missing protein column {protein_column!r}", row=0)

        items: list[FoodItem] = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {row_no}: expected {len(header)} columns, got {len(row)}", row=row_no
                )
            name, category = row[0].strip(), row[1].strip()
            if allowed is not None and category not in allowed:
                raise CategoryError(f"{path}: row {row_no}: unknown category {category!r}")
            nutrients = {}
            incomplete = False
            for col, cell in zip(nutrient_cols, row[2:]):
                cell = cell.strip()
                if not cell:
                    incomplete = True
                    nutrients[col] = 0.0
                    continue
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {row_no}: non-numeric value {cell!r} in column {col!r}", row=row_no
                    ) from None
                if not math.isfinite(value) or value < 0:
                    raise ParseError(f"{path}: row {row_no}: invalid amount {cell!r} in column {col!r}", row=row_no)
                nutrients[col] = value
            cost = None
            if has_cost and row[-1].strip():
                try:
                    cost = _parse_cents(row[-1].strip())
                except InvalidOperation:
                    raise ParseError(f"{path}: row {row_no}: non-numeric cost {row[-1]!r}", row=row_no) from None
                if cost < 0:
                    raise ParseError(f"{path}: row {row_no}: negative cost", row=row_no)
            if incomplete and drop_incomplete:
                continue
            items.append(
                FoodItem(
                    id=len(items) + 1,
                    name=name,
                    category=category,
                    nutrients=nutrients,
                    protein=nutrients[protein_column],
                    cost_cents=cost,
                )
            )
    if not items:
        raise EmptyDatasetError(f"{path}: no data rows")
    return items


def write_foods(path: str | Path, items: Sequence[FoodItem]) -> None:
    """Write foods in the format :func:`load_foods` reads.

    A cost column is written when any item has a cost; nutrient columns follow
    the first item's order.
    """
    if not items:
        raise EmptyDatasetError("nothing to write")
    columns = list(items[0].nutrients)
    with_cost = any(it.cost_cents is not None for it in items)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "category", *columns] + ([COST_COLUMN] if with_cost else []))
        for it in items:
            row = [it.name, it.category, *(repr(float(it.nutrients.get(c, 0.0))) for c in columns)]
            if with_cost:
                row.append("" if it.cost_cents is None else _format_cents(it.cost_cents))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# transformations


def assign_costs(
    items: Sequence[FoodItem],
    low: float = 1.0,
    high: float = 10.0,
    seed: int = 0,
    *,
    overwrite: bool = False,
) -> list[FoodItem]:
    """Draw a uniform random cost in ``[low, high]`` for each item, rounded to cents.

    One draw is consumed per item whether or not it is overwritten, so the
    cost an item receives depends only on ``seed`` and its position.
    """
    if not low < high:
        raise ParameterError(f"need low < high, got {low} and {high}")
    if low < 0:
        raise ParameterError("costs must be non-negative")
    if not items:
        raise ParameterError("no items to price")
    lo_c = math.ceil(round(low * 100, 6))
    hi_c = math.floor(round(high * 100, 6))
    draws = np.random.default_rng(seed).uniform(low, high, size=len(items))
    cents = np.clip(np.rint(draws * 100).astype(np.int64), lo_c, hi_c)
    return [
        replace(it, cost_cents=int(c)) if overwrite or it.cost_cents is None else it
        for it, c in zip(items, cents)
    ]


def map_categories(items: Sequence[FoodItem], mapping: Mapping[str, int | str] | None = None) -> list[FoodItem]:
    """Set each item's penalty group from its dataset category.

    ``mapping`` values may be group numbers (1..8) or group names.
    """
    mapping = DEFAULT_CATEGORY_MAPPING if mapping is None else mapping
    missing = {it.category for it in items} - set(mapping)
    if missing:
        raise MappingError(missing)
    groups = {cat: _group_number(g) for cat, g in mapping.items()}
    return [replace(it, penalty_group=groups[it.category]) for it in items]


def build_instance(
    foods: Sequence[FoodItem],
    requirements: NutrientRequirements | Mapping[str, float],
    penalties: PenaltySchedule | None = None,
    horizon: int = DEFAULT_HORIZON,
    cost_seed: int | None = None,
) -> ProblemInstance:
    if not isinstance(requirements, NutrientRequirements):
        requirements = NutrientRequirements(requirements)
    return ProblemInstance(
        foods=tuple(foods),
        requirements=requirements,
        penalties=penalties or PenaltySchedule(),
        horizon=horizon,
        cost_seed=cost_seed,
    )


def validate_instance(instance: ProblemInstance) -> None:
    """Re-check every type invariant of an instance; raises on the first failure."""
    for food in instance.foods:
        if food.cost_cents is not None and food.cost_cents < 0:
            raise InconsistencyError(f"food {food.id}: negative cost")
        if any(v < 0 for v in food.nutrients.values()):
            raise InconsistencyError(f"food {food.id}: negative nutrient amount")
        if food.penalty_group not in range(1, instance.p + 1):
            raise InconsistencyError(f"food {food.id}: penalty group {food.penalty_group} out of range")
        if PROTEIN_ID in food.nutrients and food.nutrients[PROTEIN_ID] != food.protein:
            raise InconsistencyError(f"food {food.id}: protein field disagrees with nutrient table")
    if any(v <= 0 for v in instance.requirements.entries.values()):
        raise InconsistencyError("requirements must be positive")
    if len(instance.penalties.group_penalties) != instance.p or len(instance.penalties.offset_penalties) != 6:
        raise InconsistencyError("penalty schedule has the wrong length")
    if instance.nutrient_matrix.shape != (instance.n, instance.m):
        raise InconsistencyError("nutrient matrix shape mismatch")


# ---------------------------------------------------------------------------
# bundled data


def data_path(name: str) -> Path:
    """Path of a file shipped in ``dietmoea/data``."""
    return Path(str(resources.files("dietmoea") / "data" / name))


def load_instance(
    dataset: str | Path,
    requirements: str | Path,
    mapping: str | Path | None = None,
    penalties: str | Path | None = None,
    *,
    horizon: int = DEFAULT_HORIZON,
    cost_seed: int = 0,
    cost_range: tuple[float, float] = (1.0, 10.0),
    overwrite_costs: bool = False,
    drop_incomplete: bool = False,
    categories: Iterable[str] | None = None,
) -> ProblemInstance:
    """Load files and assemble an instance in one call.

    Categories are checked against the mapping's keys, so a custom mapping
    can introduce its own dataset categories.
    """
    groups = load_category_mapping(mapping) if mapping else dict(DEFAULT_CATEGORY_MAPPING)
    if categories is None:
        categories = groups
    foods = load_foods(dataset, categories=categories, drop_incomplete=drop_incomplete)
    foods = assign_costs(foods, *cost_range, seed=cost_seed, overwrite=overwrite_costs)
    foods = map_categories(foods, groups)
    return build_instance(
        foods,
        load_requirements(requirements),
        load_penalties(penalties) if penalties else PenaltySchedule(),
        horizon=horizon,
        cost_seed=cost_seed,
    )
