"""Command-line front end: dataset synthesis, benchmark runs, stats, curves.

All protocol defaults follow the benchmark setup (batches of 5, 12 batches,
80% pools, 30 runs, ridge 0.01, outlier fraction 0.02), so an empty config
file runs the standard protocol.  Exit codes: 0 success, 1 internal error,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import seeding
from .dataset import SynthConfig, load_csv, save_csv, synth_generate
from .harness import (
    ExperimentConfig,
    learning_curves,
    pct_improvement,
    read_results_csv,
    run_experiment,
    write_curves_csv,
    write_improvements_csv,
    write_results_csv,
)
from .stats import COMPARISON_PAIRS, comparison_table, write_comparison_csv
from .strategies import STRATEGY_NAMES

SEED_ENV_VAR = "ALBATCH_SEED"


class CliInputError(Exception):
    """Bad user input: missing files, malformed config, invalid values."""


# key -> (type, default, help); one flat namespace shared by all subcommands
# so a single config file can drive the whole pipeline.
CONFIG_SPEC = {
    # experiment protocol
    "strategies": (str, "bl,qbc,eqbc,emcm,eemcm", "comma-separated strategy names"),
    "batch_size": (int, 5, "samples labeled per batch"),
    "n_batches": (int, 12, "number of batches per run"),
    "pool_fraction": (float, 0.8, "fraction of each subject drawn as the pool"),
    "n_runs": (int, 30, "independent pool draws per subject"),
    "master_seed": (int, 0, "root seed for all experiment randomness"),
    "sigma": (float, 0.01, "ridge regularization strength"),
    "gamma": (float, 0.02, "outlier cluster-size fraction"),
    "committee_size": (int, 4, "bootstrap committee size"),
    # synthetic data generation
    "subjects": (int, 15, "number of synthetic subjects"),
    "n_samples": (int, 360, "samples per synthetic subject"),
    "n_features": (int, 10, "feature dimension of synthetic subjects"),
    "noise_sd": (float, 0.05, "target noise standard deviation (pre-scaling)"),
    "outlier_fraction": (float, 0.02, "fraction of rows displaced as outliers"),
    "outlier_scale": (float, 6.0, "minimum outlier distance from the data centroid"),
    "seed": (int, 0, "synthetic generator seed"),
}


def parse_config(path) -> dict:
    """Parse a ``key = value`` config file; unknown keys are rejected."""
    values = {key: default for key, (_, default, _) in CONFIG_SPEC.items()}
    path = Path(path)
    if not path.exists():
        raise CliInputError(f"no such config file: {path}")
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise CliInputError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in CONFIG_SPEC:
            raise CliInputError(f"{path}:{lineno}: unknown config key {key!r}")
        caster = CONFIG_SPEC[key][0]
        try:
            values[key] = caster(raw)
        except ValueError:
            raise CliInputError(
                f"{path}:{lineno}: invalid {caster.__name__} value {raw!r} for {key}"
            ) from None
    return values


def _config_epilog() -> str:
    lines = ["config keys (key = value, '#' comments, all optional):"]
    for key, (caster, default, help_text) in CONFIG_SPEC.items():
        lines.append(f"  {key:<18} {help_text} (default: {default})")
    lines.append(f"environment: {SEED_ENV_VAR} overrides master_seed")
    return "\n".join(lines)


def _parse_strategies(raw: str) -> tuple[str, ...]:
    names = tuple(s.strip().lower() for s in raw.split(",") if s.strip())
    if not names:
        raise CliInputError("empty strategy list")
    unknown = [s for s in names if s not in STRATEGY_NAMES]
    if unknown:
        raise CliInputError(
            f"unknown strategies: {', '.join(unknown)}; choose from {', '.join(STRATEGY_NAMES)}"
        )
    return names


def _experiment_config(values: dict, strategies_override=None) -> ExperimentConfig:
    strategies = _parse_strategies(strategies_override or values["strategies"])
    master_seed = values["master_seed"]
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        try:
            master_seed = int(env_seed)
        except ValueError:
            raise CliInputError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from None
    try:
        return ExperimentConfig(
            strategies=strategies,
            batch_size=values["batch_size"],
            n_batches=values["n_batches"],
            pool_fraction=values["pool_fraction"],
            n_runs=values["n_runs"],
            master_seed=master_seed,
            sigma=values["sigma"],
            gamma=values["gamma"],
            committee_size=values["committee_size"],
        )
    except ValueError as exc:
        raise CliInputError(str(exc)) from None


def cmd_synth(config_path, out_dir) -> None:
    values = parse_config(config_path)
    n_subjects = values["subjects"]
    if n_subjects < 1:
        raise CliInputError("subjects must be at least 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta_rows = []
    d = values["n_features"]
    for i in range(n_subjects):
        try:
            cfg = SynthConfig(
                n_samples=values["n_samples"],
                n_features=d,
                noise_sd=values["noise_sd"],
                outlier_fraction=values["outlier_fraction"],
                outlier_scale=values["outlier_scale"],
                seed=seeding.child_seed(values["seed"], seeding.SYNTH_SUBJECT, i),
            )
        except ValueError as exc:
            raise CliInputError(str(exc)) from None
        ds, meta = synth_generate(cfg)
        save_csv(ds, out / f"subject_{i:02d}.csv")
        meta_rows.append((f"subject_{i:02d}", meta))
    with open(out / "meta.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subject", "bias"] + [f"w_{j}" for j in range(d)] + ["outlier_ids"])
        for name, meta in meta_rows:
            row = [name, repr(meta.bias)]
            row += [repr(float(w)) for w in meta.weights]
            row.append(";".join(str(i) for i in meta.outlier_ids))
            writer.writerow(row)
    print(f"wrote {n_subjects} subjects to {out}")


def _load_subjects(data_dir) -> list:
    data = Path(data_dir)
    if not data.is_dir():
        raise CliInputError(f"no such data directory: {data}")
    paths = sorted(data.glob("subject_*.csv"))
    if not paths:
        raise CliInputError(f"no subject_*.csv files in {data}")
    subjects = []
    for p in paths:
        try:
            subjects.append((p.stem, load_csv(p)))
        except (ValueError, FileNotFoundError) as exc:
            raise CliInputError(f"{p}: {exc}") from None
    return subjects


def _improvement_pairs(strategies) -> list:
    present = set(strategies)
    return [(a, b) for a, b in COMPARISON_PAIRS if a in present and b in present]


def _write_curve_outputs(table, out: Path) -> None:
    curves = learning_curves(table)
    write_curves_csv(curves, out / "curves.csv")
    by_strategy: dict[str, list] = {}
    for p in curves:
        by_strategy.setdefault(p.strategy, []).append(p)
    improvements = {}
    for a, b in _improvement_pairs(table.strategies):
        improvements[f"{a}_vs_{b}"] = {
            metric: pct_improvement(by_strategy[a], by_strategy[b], metric)
            for metric in ("rmse", "cc")
        }
    write_improvements_csv(improvements, out / "improvements.csv")


def cmd_run(config_path, data_dir, out_dir, strategies=None, jobs: int = 1) -> None:
    values = parse_config(config_path)
    cfg = _experiment_config(values, strategies)
    subjects = _load_subjects(data_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        table = run_experiment(cfg, subjects, jobs=jobs)
    except ValueError as exc:
        raise CliInputError(str(exc)) from None
    write_results_csv(table, out / "results.csv")
    _write_curve_outputs(table, out)
    print(f"wrote results for {len(subjects)} subjects x {len(cfg.strategies)} strategies to {out}")


def cmd_stats(results_path, out_dir) -> None:
    try:
        table = read_results_csv(results_path)
    except (FileNotFoundError, ValueError) as exc:
        raise CliInputError(str(exc)) from None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for metric in ("rmse", "cc"):
        try:
            ct = comparison_table(table, metric)
        except ValueError as exc:
            raise CliInputError(str(exc)) from None
        write_comparison_csv(ct, out / f"stats_{metric}.csv")
    print(f"wrote comparison tables to {out}")


def cmd_curves(results_path, out_dir) -> None:
    try:
        table = read_results_csv(results_path)
    except (FileNotFoundError, ValueError) as exc:
        raise CliInputError(str(exc)) from None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_curve_outputs(table, out)
    print(f"wrote curves to {out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="albatch",
        description="Batch-mode active learning benchmark for regression.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser(
        "synth",
        help="generate synthetic subject datasets",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_synth.add_argument("config", help="key = value config file")
    p_synth.add_argument("out_dir", help="output directory for subject CSVs")

    p_run = sub.add_parser(
        "run",
        help="run the benchmark protocol on a dataset directory",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_run.add_argument("config", help="key = value config file")
    p_run.add_argument("data_dir", help="directory of subject_*.csv datasets")
    p_run.add_argument("out_dir", help="output directory for results/curves CSVs")
    p_run.add_argument(
        "--strategies",
        help=f"comma-separated subset of: {', '.join(STRATEGY_NAMES)}",
    )
    p_run.add_argument("--jobs", type=int, default=1,
                       help="parallel (subject, run) workers (default: 1)")

    p_stats = sub.add_parser("stats", help="pairwise comparison tables from a results CSV")
    p_stats.add_argument("results", help="results.csv from the run command")
    p_stats.add_argument("out_dir", help="output directory for stats CSVs")

    p_curves = sub.add_parser("curves", help="learning curves and improvements from a results CSV")
    p_curves.add_argument("results", help="results.csv from the run command")
    p_curves.add_argument("out_dir", help="output directory for curve CSVs")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            cmd_synth(args.config, args.out_dir)
        elif args.command == "run":
            if args.jobs < 1:
                raise CliInputError("--jobs must be at least 1")
            cmd_run(args.config, args.data_dir, args.out_dir,
                    strategies=args.strategies, jobs=args.jobs)
        elif args.command == "stats":
            cmd_stats(args.results, args.out_dir)
        elif args.command == "curves":
            cmd_curves(args.results, args.out_dir)
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
