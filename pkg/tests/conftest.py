import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dietmoea.instance import FoodItem, NutrientRequirements, build_instance, data_path, load_instance
from dietmoea.synthetic import write_bundle


def make_instance(nutrients, requirements, groups=None, costs=None, protein=None, horizon=7):
    """Instance from per-food nutrient dicts; groups are 1-based penalty groups."""
    n = len(nutrients)
    groups = groups or [1] * n
    costs = costs or [100] * n
    foods = [
        FoodItem(
            id=i + 1,
            name=f"food{i + 1}",
            category="test",
            nutrients=dict(nut),
            protein=(protein[i] if protein else nut.get("protein_g", 0.0)),
            cost_cents=costs[i],
            penalty_group=groups[i],
        )
        for i, nut in enumerate(nutrients)
    ]
    return build_instance(foods, NutrientRequirements(requirements), horizon=horizon)


def random_instance(rng, n=8, m=3, horizon=7, max_req=None):
    names = ["protein_g"] + [f"n{j}" for j in range(1, m)]
    nutrients = [{k: float(rng.uniform(0, 10)) for k in names} for _ in range(n)]
    req = {k: float(rng.uniform(1, max_req or 20)) for k in names}
    groups = [int(g) for g in rng.integers(1, 9, size=n)]
    costs = [int(c) for c in rng.integers(0, 1001, size=n)]
    return make_instance(nutrients, req, groups, costs, horizon=horizon)


def random_genome(rng, instance, density=0.3, cap=5):
    mask = rng.random(instance.shape) < density
    return np.where(mask, rng.integers(1, cap + 1, size=instance.shape), 0).astype(np.int64)


@pytest.fixture
def tiny_instance():
    """5 foods, 2 nutrients, 2 days."""
    nutrients = [
        {"protein_g": 10.0, "iron_mg": 1.0},
        {"protein_g": 2.0, "iron_mg": 4.0},
        {"protein_g": 6.0, "iron_mg": 2.0},
        {"protein_g": 0.5, "iron_mg": 0.5},
        {"protein_g": 20.0, "iron_mg": 3.0},
    ]
    return make_instance(nutrients, {"protein_g": 30, "iron_mg": 8}, groups=[2, 3, 4, 1, 7],
                         costs=[250, 120, 300, 50, 900], horizon=2)


@pytest.fixture(scope="session")
def sample_instance():
    return load_instance(data_path("sample_foods.csv"), data_path("requirements.txt"),
                         data_path("category_mapping.txt"), cost_seed=0)


@pytest.fixture(scope="session")
def full_bundle(tmp_path_factory):
    return write_bundle(tmp_path_factory.mktemp("full"), seed=0)


@pytest.fixture(scope="session")
def full_instance(full_bundle):
    return load_instance(full_bundle["dataset"], full_bundle["requirements"], full_bundle["mapping"], cost_seed=0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
