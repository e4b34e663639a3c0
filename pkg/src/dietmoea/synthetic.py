"""Seeded synthetic food tables with the layout of the Brazilian composition table.

The real table is not redistributable. These generators produce a dataset
with the same 15 categories and item counts (597 items) and plausible
per-serving nutrient magnitudes, so the full experiment can run end to end.
The numbers are not real food data.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .instance import (
    DATASET_CATEGORY_COUNTS,
    DEFAULT_CATEGORY_MAPPING,
    DEFAULT_GROUP_PENALTIES,
    DEFAULT_OFFSET_PENALTIES,
    FoodItem,
    write_foods,
)

NUTRIENTS = ("energy_kcal", "protein_g", "calcium_mg", "iron_mg", "vitamin_c_mg", "zinc_mg")

PLACEHOLDER_REQUIREMENTS = {
    "energy_kcal": (2000.0, "kcal"),
    "protein_g": (50.0, "g"),
    "calcium_mg": (1000.0, "mg"),
    "iron_mg": (14.0, "mg"),
    "vitamin_c_mg": (100.0, "mg"),
    "zinc_mg": (11.0, "mg"),
}

# Typical amount per serving, in NUTRIENTS order.
CATEGORY_PROFILES: dict[str, tuple[float, ...]] = {
    "Cereals and derivatives": (250, 6, 20, 1.5, 0, 1.0),
    "Vegetables, greens, and derivatives": (30, 1.5, 40, 0.8, 25, 0.3),
    "Fruits and derivatives": (60, 0.8, 15, 0.3, 40, 0.1),
    "Fats and oils": (400, 0.2, 1, 0.1, 0, 0.05),
    "fish and Seafood": (150, 22, 60, 1.0, 1, 1.2),
    "Meats and meat products": (230, 25, 15, 2.5, 0.5, 4.5),
    "Milk and dairy products": (150, 8, 250, 0.2, 1, 1.0),
    "Alcoholic and non-alcoholic beverages": (60, 0.5, 10, 0.2, 15, 0.1),
    "Eggs and derivatives": (150, 12, 50, 1.6, 0, 1.2),
    "Sugary products": (300, 3, 50, 1.0, 1, 0.5),
    "Miscellaneous": (100, 5, 100, 3.0, 5, 1.0),
    "Other processed foods": (250, 10, 80, 1.5, 2, 1.0),
    "Prepared food": (200, 9, 60, 1.5, 8, 1.2),
    "Legumes and derivatives": (130, 8, 40, 2.5, 2, 1.1),
    "Nuts and seeds": (550, 18, 150, 4.0, 1, 4.0),
}


def synthetic_foods(
    counts: dict[str, int] | None = None, seed: int = 0, spread: float = 0.5, with_costs: bool = False
) -> list[FoodItem]:
    """Foods drawn around each category's profile with log-normal noise.

    Amounts are rounded to two decimals. Costs are left unset unless
    ``with_costs``, in which case they are uniform on [1, 10].
    """
    counts = DATASET_CATEGORY_COUNTS if counts is None else counts
    rng = np.random.default_rng(seed)
    items = []
    for category, count in counts.items():
        profile = np.asarray(CATEGORY_PROFILES[category], dtype=float)
        for j in range(count):
            amounts = np.round(profile * rng.lognormal(0.0, spread, size=profile.size), 2)
            nutrients = {k: float(v) for k, v in zip(NUTRIENTS, amounts)}
            cost = int(rng.integers(100, 1001)) if with_costs else None
            items.append(
                FoodItem(
                    id=len(items) + 1,
                    name=f"{category.split()[0].lower().strip(',')}_{j + 1:03d}",
                    category=category,
                    nutrients=nutrients,
                    protein=nutrients["protein_g"],
                    cost_cents=cost,
                )
            )
    return items


def write_requirements(path: str | Path, requirements: dict[str, tuple[float, str]] | None = None) -> None:
    requirements = PLACEHOLDER_REQUIREMENTS if requirements is None else requirements
    lines = ["# Minimum daily intake per nutrient. Placeholder values: replace with official figures."]
    for key, (_, unit) in requirements.items():
        lines.append(f"# unit: {key} = {unit}")
    lines += [f"{key} = {value:g}" for key, (value, _) in requirements.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_mapping(path: str | Path, mapping: dict[str, str] | None = None) -> None:
    mapping = DEFAULT_CATEGORY_MAPPING if mapping is None else mapping
    lines = ["# dataset category = penalty group"]
    lines += [f"{cat} = {group}" for cat, group in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_penalties(path: str | Path) -> None:
    values = DEFAULT_GROUP_PENALTIES + DEFAULT_OFFSET_PENALTIES
    lines = ["# p1..p8: per-group repetition penalties; p9..p14: repeats 1..6 days apart"]
    lines += [f"p{i} = {v:g}" for i, v in enumerate(values, start=1)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_bundle(directory: str | Path, seed: int = 0, counts: dict[str, int] | None = None) -> dict[str, Path]:
    """Write foods.csv, requirements.txt, category_mapping.txt and penalties.txt."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "dataset": directory / "foods.csv",
        "requirements": directory / "requirements.txt",
        "mapping": directory / "category_mapping.txt",
        "penalties": directory / "penalties.txt",
    }
    write_foods(paths["dataset"], synthetic_foods(counts, seed=seed))
    write_requirements(paths["requirements"])
    write_mapping(paths["mapping"])
    write_penalties(paths["penalties"])
    return paths
