"""Command-line harness: experiments, statistics and plot-data export.

Commands::

    dietmoea run            run the algorithm x generations x repetitions grid
    dietmoea compare        permutation test on one metric of metrics.csv
    dietmoea export-plots   plot-ready CSV from result or report files
    dietmoea validate-data  load a dataset bundle and report on it
    dietmoea synth-data     write a synthetic 597-item dataset bundle
    dietmoea reproduce      rerun a result file from its embedded config
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analytics import compute_bounds, compute_metrics, permutation_test
from .diversity import BINARIZE_MODES
from .engine import TOURNAMENT_MODES, Algorithm, AlgorithmConfig, RunResult, genome_from_triples, run, run_batch
from .errors import DietMOEAError
from .instance import PENALTY_GROUPS, ProblemInstance, data_path, load_instance, read_key_values
from .synthetic import write_bundle

log = logging.getLogger("dietmoea")

METRIC_COLUMNS = ("hv", "d_hmin", "d_hmed", "d_hmed_distinct", "front_size", "wall_time_s")
CSV_HEADER = ("algorithm", "generations", "seed") + METRIC_COLUMNS


class CLIError(DietMOEAError):
    pass


@dataclass
class ExperimentConfig:
    dataset: str | None = None
    requirements: str = field(default_factory=lambda: str(data_path("requirements.txt")))
    mapping: str = field(default_factory=lambda: str(data_path("category_mapping.txt")))
    penalties: str | None = None
    algorithms: list[str] = field(default_factory=lambda: ["moea-hd", "nsga2"])
    generations: list[int] = field(default_factory=lambda: [30, 100, 300])
    reps: int = 30
    seed_base: int = 0
    jobs: int = 1
    out: str = "results"
    population: int = 30
    horizon: int = 7
    cost_seed: int = 0
    cost_low: float = 1.0
    cost_high: float = 10.0
    overwrite_costs: bool = False
    drop_incomplete: bool = False
    binarize: str = "weekly"
    normalized_penalty: bool = False
    tournament_mode: str = "per-tournament"
    trace: bool = False

    def validate(self) -> None:
        if not self.dataset:
            raise CLIError("no dataset given (use --dataset or 'dataset = ...' in the config)")
        for name in ("dataset", "requirements", "mapping", "penalties"):
            value = getattr(self, name)
            if value and not Path(value).is_file():
                raise CLIError(f"{name} file not found: {value}")
        unknown = set(self.algorithms) - {a.value for a in Algorithm}
        if unknown:
            raise CLIError(f"unknown algorithms: {', '.join(sorted(unknown))}")
        if self.reps < 1 or not self.generations:
            raise CLIError("need reps >= 1 and at least one generation setting")
        if self.binarize not in BINARIZE_MODES:
            raise CLIError(f"binarize must be one of {BINARIZE_MODES}")

    def load_instance(self) -> ProblemInstance:
        return load_instance(
            self.dataset,
            self.requirements,
            self.mapping,
            self.penalties,
            horizon=self.horizon,
            cost_seed=self.cost_seed,
            cost_range=(self.cost_low, self.cost_high),
            overwrite_costs=self.overwrite_costs,
            drop_incomplete=self.drop_incomplete,
        )

    def algorithm_config(self, algorithm: str, generations: int) -> AlgorithmConfig:
        return AlgorithmConfig(
            algorithm=algorithm,
            population_size=self.population,
            max_generations=generations,
            binarize=self.binarize,
            normalized_penalty=self.normalized_penalty,
            tournament_mode=self.tournament_mode,
            trace=self.trace,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _coerce(name: str, text: str):
    kinds = {f.name: f for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise CLIError(f"unknown config key {name!r}")
    default = getattr(ExperimentConfig(), name)
    if name == "algorithms":
        return [a.strip() for a in text.split(",") if a.strip()]
    if name == "generations":
        return [int(g) for g in text.split(",") if g.strip()]
    if isinstance(default, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def read_experiment_config(path: str | Path | None, overrides: dict) -> ExperimentConfig:
    """Config file values, then command-line overrides; relative file paths resolve against the config file."""
    cfg = ExperimentConfig()
    if path:
        base = Path(path).resolve().parent
        for key, value in read_key_values(path).items():
            key = key.replace("-", "_")
            value = _coerce(key, value)
            if key in ("dataset", "requirements", "mapping", "penalties", "out") and value:
                value = str((base / value) if not Path(value).is_absolute() else Path(value))
            setattr(cfg, key, value)
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    for key in ("dataset", "requirements", "mapping", "penalties"):
        value = getattr(cfg, key)
        if value:
            setattr(cfg, key, str(Path(value).resolve()))
    return cfg


# ---------------------------------------------------------------------------
# run


def result_path(out: Path, algorithm: str, generations: int, seed: int) -> Path:
    return out / algorithm / str(generations) / f"run_{seed}.json"


def _result_json(result: RunResult, instance: ProblemInstance, experiment: ExperimentConfig) -> str:
    result.extra = {"experiment": experiment.to_dict()}
    return result.to_json(instance)


def cmd_run(cfg: ExperimentConfig) -> int:
    cfg.validate()
    instance = cfg.load_instance()
    out = Path(cfg.out)
    rows = []
    for generations in cfg.generations:
        cell_results = {}
        for algorithm in cfg.algorithms:
            config = cfg.algorithm_config(algorithm, generations)
            log.info("running %s, %d generations, %d reps", algorithm, generations, cfg.reps)
            results = run_batch(instance, config, cfg.reps, cfg.seed_base, cfg.jobs)
            for r in results:
                path = result_path(out, algorithm, generations, r.seed)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(_result_json(r, instance, cfg), encoding="utf-8")
            cell_results[algorithm] = results
        # one normalisation per generation setting, shared by all algorithms and reps
        bounds = compute_bounds([r.nondominated for rs in cell_results.values() for r in rs])
        for algorithm, results in cell_results.items():
            for r in results:
                m = compute_metrics(r.nondominated, bounds, cfg.binarize)
                rows.append(
                    {"algorithm": algorithm, "generations": generations, "seed": r.seed,
                     **m.as_dict(), "wall_time_s": round(r.wall_time, 4)}
                )
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} runs to {out}")
    return 0


def reproduce(path: str | Path) -> tuple[str, str]:
    """Rerun a result file from its embedded configuration; returns (original, regenerated) JSON."""
    original = Path(path).read_text(encoding="utf-8")
    doc = json.loads(original)
    if "experiment" not in doc:
        raise CLIError(f"{path}: no embedded experiment configuration")
    experiment = ExperimentConfig(**doc["experiment"])
    instance = experiment.load_instance()
    result = run(instance, AlgorithmConfig.from_dict(doc["config"]))
    return original, _result_json(result, instance, experiment)


# ---------------------------------------------------------------------------
# compare


def _parse_group(spec: str) -> tuple[str, int | None]:
    algorithm, _, gens = spec.partition(":")
    return algorithm, int(gens) if gens else None


def read_metrics(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def select_metric(rows: list[dict], metric: str, group: str) -> list[float]:
    algorithm, generations = _parse_group(group)
    return [
        float(r[metric])
        for r in rows
        if r["algorithm"] == algorithm and (generations is None or int(r["generations"]) == generations)
    ]


def cmd_compare(args) -> int:
    rows = read_metrics(args.metrics)
    if not rows or args.metric not in rows[0] or args.metric in ("algorithm", "generations", "seed"):
        raise CLIError(f"unknown metric column {args.metric!r}; expected one of {', '.join(METRIC_COLUMNS)}")
    a = select_metric(rows, args.metric, args.group_a)
    b = select_metric(rows, args.metric, args.group_b)
    if not a or not b:
        raise CLIError(f"no rows for group {args.group_a if not a else args.group_b!r}")
    result = permutation_test(a, b, args.perms, args.seed)
    report = {
        "metric": args.metric,
        "group_a": args.group_a,
        "group_b": args.group_b,
        "n_a": len(a),
        "n_b": len(b),
        "seed": args.seed,
        **result.to_dict(),
    }
    out = Path(args.out) if args.out else Path(args.metrics).with_name(
        f"compare_{args.metric}_{args.group_a}_vs_{args.group_b}.json".replace(":", "-")
    )
    out.write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    print(f"{args.metric}: mean({args.group_a}) = {result.mean_a:.4f}, mean({args.group_b}) = {result.mean_b:.4f}")
    print(f"difference = {result.observed_diff:.4f}, p = {result.p_value:.4g} ({args.perms} permutations)")
    print(f"report: {out}")
    return 0


# ---------------------------------------------------------------------------
# export-plots


def _load_result(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if "nondominated" not in doc or "instance" not in doc:
            raise ValueError("missing 'nondominated' or 'instance'")
        return doc
    except (OSError, ValueError) as exc:
        raise CLIError(f"cannot read result file {path}: {exc}") from exc


def consumption_by_day(doc: dict, solution: int, by: str = "group") -> tuple[list[str], np.ndarray]:
    """Servings per (day, label) for one solution of a result document."""
    inst = doc["instance"]
    labels_per_item = inst["penalty_groups"] if by == "group" else inst["categories"]
    labels = list(PENALTY_GROUPS) if by == "group" else list(dict.fromkeys(inst["categories"]))
    try:
        triples = doc["nondominated"][solution]["genome"]
    except IndexError:
        raise CLIError(f"solution {solution} out of range ({len(doc['nondominated'])} stored)") from None
    genome = genome_from_triples(triples, inst["n_items"], inst["horizon"])
    index = np.array([labels.index(lbl) for lbl in labels_per_item])
    table = np.zeros((inst["horizon"], len(labels)), dtype=np.int64)
    np.add.at(table, (slice(None), index), genome.T)
    return labels, table


def cmd_export_plots(args) -> int:
    rows: list[list] = []
    if args.mode == "perm-histogram":
        header = ["source", "kind", "value"]
        for path in args.files:
            try:
                report = json.loads(Path(path).read_text(encoding="utf-8"))
                diffs, observed = report["permutation_diffs"], report["observed_diff"]
            except (OSError, ValueError, KeyError) as exc:
                raise CLIError(f"cannot read report file {path}: {exc}") from exc
            rows += [[path, "permutation", v] for v in diffs]
            rows.append([path, "observed", observed])
    else:
        docs = [(p, _load_result(p)) for p in args.files]
        if args.mode == "pareto":
            header = ["source", "solution", "cost", "repetitiveness", "protein"]
            for path, doc in docs:
                for i, s in enumerate(doc["nondominated"]):
                    f1, f2, neg_f3 = s["objectives"]
                    rows.append([path, i, f1, f2, 0.0 - neg_f3])
        elif args.mode == "weekly-consumption":
            header = ["source", args.by, "servings"]
            for path, doc in docs:
                labels, table = consumption_by_day(doc, args.solution, args.by)
                rows += [[path, lbl, int(v)] for lbl, v in zip(labels, table.sum(axis=0))]
        else:
            header = ["source", "day", args.by, "servings"]
            for path, doc in docs:
                labels, table = consumption_by_day(doc, args.solution, args.by)
                rows += [[path, d + 1, lbl, int(table[d, j])] for d in range(len(table)) for j, lbl in enumerate(labels)]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


# ---------------------------------------------------------------------------
# validate-data, synth-data, reproduce


def cmd_validate_data(cfg: ExperimentConfig) -> int:
    if not cfg.dataset:
        raise CLIError("no dataset given")
    cfg.validate()
    instance = cfg.load_instance()
    print(f"items: {instance.n}, nutrients: {instance.m} ({', '.join(instance.requirements.nutrient_ids)}), "
          f"horizon: {instance.horizon}")
    print("categories:")
    for cat, count in Counter(f.category for f in instance.foods).items():
        print(f"  {count:4d}  {cat}")
    print("penalty groups:")
    groups = Counter(f.group_name for f in instance.foods)
    for name in PENALTY_GROUPS:
        print(f"  {groups.get(name, 0):4d}  {name}")
    best = instance.nutrient_matrix.sum(axis=0) * 5  # default cell cap
    short = [j for j, ok in zip(instance.requirements.nutrient_ids, best >= instance.requirement_vector) if not ok]
    if short:
        print(f"warning: requirements unreachable even at the serving cap: {', '.join(short)}")
        return 1
    return 0


def cmd_reproduce(args) -> int:
    original, regenerated = reproduce(args.result)
    if args.out:
        Path(args.out).write_text(regenerated, encoding="utf-8")
    if original == regenerated:
        print(f"{args.result}: identical")
        return 0
    print(f"{args.result}: regenerated result differs", file=sys.stderr)
    return 1


def _csv_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _csv_strs(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat 'key = value' experiment file; flags override it")
    p.add_argument("--dataset", help="food CSV")
    p.add_argument("--requirements", help="nutrient requirements file")
    p.add_argument("--mapping", help="category-to-penalty-group mapping file")
    p.add_argument("--penalties", help="penalty override file (p1..p14)")
    p.add_argument("--cost-seed", dest="cost_seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dietmoea", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the experiment grid")
    _add_data_flags(p)
    p.add_argument("--algorithms", type=_csv_strs, help="comma list: moea-hd,nsga2")
    p.add_argument("--generations", type=_csv_ints, help="comma list, e.g. 30,100,300")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed-base", dest="seed_base", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--population", type=int)
    p.add_argument("--binarize", choices=BINARIZE_MODES)
    p.add_argument("--tournament-mode", dest="tournament_mode", choices=TOURNAMENT_MODES)
    p.add_argument("--normalized-penalty", dest="normalized_penalty", action="store_true", default=None)
    p.add_argument("--trace", action="store_true", default=None)

    p = sub.add_parser("compare", help="permutation test between two groups of metrics.csv")
    p.add_argument("metrics")
    p.add_argument("--metric", required=True)
    p.add_argument("--a", dest="group_a", required=True, help="algorithm[:generations]")
    p.add_argument("--b", dest="group_b", required=True, help="algorithm[:generations]")
    p.add_argument("--perms", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("export-plots", help="write plot-ready CSV")
    p.add_argument("files", nargs="+")
    p.add_argument("--mode", required=True, choices=("pareto", "weekly-consumption", "daily-diet", "perm-histogram"))
    p.add_argument("--solution", type=int, default=0, help="index into the stored non-dominated set")
    p.add_argument("--by", choices=("group", "category"), default="group")
    p.add_argument("--out")

    p = sub.add_parser("validate-data", help="load a dataset bundle and summarise it")
    _add_data_flags(p)

    p = sub.add_parser("synth-data", help="write a synthetic dataset bundle")
    p.add_argument("directory")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("reproduce", help="rerun a result file and compare byte for byte")
    p.add_argument("result")
    p.add_argument("--out")
    return parser


_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command in ("run", "validate-data"):
            overrides = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS}
            cfg = read_experiment_config(args.config, overrides)
            return cmd_run(cfg) if args.command == "run" else cmd_validate_data(cfg)
        if args.command == "compare":
            return cmd_compare(args)
        if args.command == "export-plots":
            return cmd_export_plots(args)
        if args.command == "synth-data":
            for name, path in write_bundle(args.directory, seed=args.seed).items():
                print(f"{name}: {path}")
            return 0
        return cmd_reproduce(args)
    except (DietMOEAError, OSError) as exc:
        print(f"dietmoea: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
