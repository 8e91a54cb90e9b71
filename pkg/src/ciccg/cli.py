"""Command-line benchmark runner.

Subcommands: ``run`` (hard-regime Monte Carlo comparison), ``sweep`` over a
dependence/tail/mixing axis, ``ablation`` (dependence-term study),
``dump-dataset``, and ``selftest``. The default output directory comes from
the ``CICCG_OUTDIR`` environment variable when set.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import selfchecks
from .datagen import dump_dataset_csv, make_dataset
from .harness import (
    ABLATION_METHODS,
    ExperimentConfig,
    SweepResult,
    config_from_mapping,
    emit_mc_reports,
    emit_sweep_reports,
    final_rows,
    group_stats,
    load_config_file,
    run_ablation,
    run_monte_carlo,
    run_sweep,
)

BASELINES = ("mse", "huber", "student_t", "mcc")


def _default_outdir() -> str:
    return os.environ.get("CICCG_OUTDIR", "results")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--outdir", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--runs", type=int, default=None, help="Monte Carlo runs")
    parser.add_argument("--iterations", type=int, default=None)
    parser.add_argument("--n-jobs", type=int, default=None, help="parallel workers")
    parser.add_argument("--methods", default=None, help="comma-separated method list")
    parser.add_argument(
        "--assert",
        dest="check",
        action="store_true",
        help="exit nonzero unless the expected method orderings hold",
    )


def build_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = config_from_mapping(load_config_file(args.config), cfg)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        overrides["mc_runs"] = args.runs
    if getattr(args, "iterations", None) is not None:
        overrides["iterations"] = args.iterations
    if getattr(args, "n_jobs", None) is not None:
        overrides["n_jobs"] = args.n_jobs
    if getattr(args, "methods", None):
        overrides["methods"] = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _report(checks) -> bool:
    ok_all = True
    for name, ok, detail in checks:
        ok_all = ok_all and ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return ok_all


def check_hard_regime(result) -> list:
    """Proposed method beats every baseline on final mean RMSE/Q90/Q95."""
    stats = group_stats(final_rows(result), lambda r: r.method)
    checks = []
    if "cic" not in stats:
        return [("hard-regime", False, "no completed cic runs")]
    for metric in ("rmse", "q90", "q95"):
        for baseline in BASELINES:
            if baseline not in stats:
                continue
            ours, theirs = stats["cic"][metric][0], stats[baseline][metric][0]
            checks.append(
                (
                    f"mean {metric}: cic < {baseline}",
                    ours < theirs,
                    f"{ours:.6f} vs {theirs:.6f}",
                )
            )
    return checks


def check_rho_sweep(sweep: SweepResult) -> list:
    """Full method has the lowest mean Q95 at every dependence grid point."""
    stats = group_stats(sweep.rows, lambda r: (r.iteration, r.method))
    checks = []
    for value in sweep.grid:
        for baseline in BASELINES:
            key_c, key_b = (float(value), "cic"), (float(value), baseline)
            if key_c not in stats or key_b not in stats:
                continue
            ours, theirs = stats[key_c]["q95"][0], stats[key_b]["q95"][0]
            checks.append(
                (
                    f"rho={value}: q95 cic <= {baseline}",
                    ours <= theirs,
                    f"{ours:.6f} vs {theirs:.6f}",
                )
            )
    return checks


def check_nu_sweep(sweep: SweepResult) -> list:
    """Mean RMSE does not degrade as tails lighten; gap to mse peaks at the
    heaviest tail."""
    stats = group_stats(sweep.rows, lambda r: (r.iteration, r.method))
    methods = sorted({m for (_, m) in stats})
    grid = sorted(sweep.grid)
    checks = []
    for method in methods:
        for lo, hi in zip(grid, grid[1:]):
            key_lo, key_hi = (float(lo), method), (float(hi), method)
            if key_lo not in stats or key_hi not in stats:
                continue
            mean_lo, std_lo = stats[key_lo]["rmse"]
            mean_hi, std_hi = stats[key_hi]["rmse"]
            n_lo, n_hi = stats[key_lo]["n"], stats[key_hi]["n"]
            pooled_se = float(np.sqrt(std_lo**2 / max(n_lo, 1) + std_hi**2 / max(n_hi, 1)))
            checks.append(
                (
                    f"{method}: rmse nonincreasing {lo} -> {hi}",
                    mean_hi <= mean_lo + pooled_se,
                    f"{mean_lo:.6f} -> {mean_hi:.6f} (se {pooled_se:.6f})",
                )
            )
    if all((float(v), m) in stats for v in grid for m in ("cic", "mse")):
        gaps = {v: stats[(float(v), "mse")]["rmse"][0] - stats[(float(v), "cic")]["rmse"][0] for v in grid}
        best = max(gaps, key=gaps.get)
        checks.append(
            (
                "advantage over mse largest at heaviest tail",
                best == min(grid),
                f"gaps {[(v, round(g, 6)) for v, g in gaps.items()]}",
            )
        )
    return checks


def check_ablation(sweep: SweepResult, threshold: float = 0.75) -> list:
    """No-dependence variant does not beat the full method at high rho."""
    stats = group_stats(sweep.rows, lambda r: (r.iteration, r.method))
    checks = []
    for value in sweep.grid:
        if float(value) < threshold:
            continue
        key_full, key_g0 = (float(value), "cic"), (float(value), "cic_gamma0")
        if key_full not in stats or key_g0 not in stats:
            continue
        full, gamma0 = stats[key_full]["q95"][0], stats[key_g0]["q95"][0]
        checks.append(
            (
                f"rho={value}: q95 full <= gamma0 variant",
                full <= gamma0,
                f"{full:.6f} vs {gamma0:.6f}",
            )
        )
    return checks


def cmd_run(args) -> int:
    cfg = build_config(args)
    result = run_monte_carlo(cfg)
    outdir = Path(args.outdir or _default_outdir())
    for path in emit_mc_reports(result, outdir):
        print(f"wrote {path}")
    if result.failures:
        print(f"{len(result.failures)} run(s) failed and were excluded; see summary.txt")
    if args.check:
        return 0 if _report(check_hard_regime(result)) else 1
    return 0


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    grid = tuple(float(v) for v in args.grid.split(",")) if args.grid else None
    sweep = run_sweep(cfg, args.axis, grid)
    outdir = Path(args.outdir or _default_outdir())
    for path in emit_sweep_reports(sweep, outdir):
        print(f"wrote {path}")
    if args.check:
        if args.axis == "rho":
            checks = check_rho_sweep(sweep)
        elif args.axis == "nu":
            checks = check_nu_sweep(sweep)
        else:
            checks = []
        return 0 if _report(checks) else 1
    return 0


def cmd_ablation(args) -> int:
    cfg = build_config(args)
    grid = tuple(float(v) for v in args.grid.split(",")) if args.grid else None
    sweep = run_ablation(cfg, grid)
    outdir = Path(args.outdir or _default_outdir())
    for path in emit_sweep_reports(sweep, outdir):
        print(f"wrote {path}")
    if args.check:
        return 0 if _report(check_ablation(sweep)) else 1
    return 0


def cmd_dump_dataset(args) -> int:
    cfg = build_config(args)
    dataset = make_dataset(cfg.seed, cfg.noise_spec(), cfg.n_train, cfg.n_test, run=args.run)
    outdir = Path(args.outdir or _default_outdir())
    outdir.mkdir(parents=True, exist_ok=True)
    train_path, test_path = outdir / "train.csv", outdir / "test.csv"
    dump_dataset_csv(dataset, train_path, test_path)
    print(f"wrote {train_path}")
    print(f"wrote {test_path}")
    return 0


def cmd_selftest(args) -> int:
    return 0 if selfchecks.run_all(verbose=True) else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ciccg",
        description="Robust-regression benchmark under dependent heavy-tailed noise",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="hard-regime Monte Carlo comparison")
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one axis of the noise/objective")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=("rho", "nu", "gamma"))
    p_sweep.add_argument("--grid", default=None, help="comma-separated grid values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_abl = sub.add_parser(
        "ablation", help=f"dependence-term ablation over rho ({', '.join(ABLATION_METHODS)})"
    )
    _add_common(p_abl)
    p_abl.add_argument("--grid", default=None, help="comma-separated rho values")
    p_abl.set_defaults(func=cmd_ablation)

    p_dump = sub.add_parser("dump-dataset", help="write the synthetic dataset as CSV")
    _add_common(p_dump)
    p_dump.add_argument("--run", type=int, default=0, help="Monte Carlo run index")
    p_dump.set_defaults(func=cmd_dump_dataset)

    p_self = sub.add_parser("selftest", help="gradient checks and invariant suites")
    p_self.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
