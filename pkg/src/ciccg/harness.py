"""Experiment runner: Monte Carlo protocol, clean-test metrics, sweeps, and
CSV/plot-data emission.

Fairness contract: within one Monte Carlo run every method shares the same
architecture, initialization draw, noisy training set, optimizer constants,
and iteration budget, and every metric is computed against clean test targets.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import numkit
from .datagen import Dataset, NoiseSpec, init_rng, make_dataset
from .exceptions import CiccgError, InvalidParameter
from .model import Batch, MlpSpec, forward, init_parameters
from .objectives import CicConfig, LossSpec, make_problem
from .optimizer import CgConfig, IterationRecord, run as cg_run

DEFAULT_METHODS = ("mse", "huber", "student_t", "mcc", "cic")
RHO_GRID = (0.0, 0.25, 0.5, 0.75, 0.85, 0.9, 0.99)
NU_GRID = (2.2, 3.0, 5.0, 10.0, 30.0)
GAMMA_GRID = (0.0, 0.55, 1.0)
ABLATION_METHODS = ("mcc", "cic_gamma0", "cic")

#: Config-file keys that differ from the dataclass field names.
KEY_ALIASES = {"lambda": "shrinkage"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment settings; defaults pin the benchmark preset exactly."""

    seed: int = 1
    mc_runs: int = 50
    n_jobs: int = 1
    methods: tuple = DEFAULT_METHODS
    # data and noise
    n_train: int = 600
    n_test: int = 600
    nu: float = 2.2
    sigma_eps: float = 0.35
    rho: float = 0.85
    # model
    hidden: int = 14
    # mixed objective
    alpha: float = 1.2
    gamma: float = 0.55
    delta: float = 1e-12
    sigma_k: float = 0.8
    shrinkage: float = 0.35
    epsilon_sigma: float = 1e-8
    marginal: str = "student_t"
    marginal_dof: float = 1.0
    marginal_scale: float = 1.0
    clip_eps: float = 1e-6
    # baselines
    huber_delta: float = 1.0
    t_dof: float = 3.0
    t_scale: float = 1.0
    mcc_sigma: float = 0.8
    mcc_form: str = "componentwise"
    # optimizer
    iterations: int = 70
    refresh_period: int = 15
    eta: float = 1e-3
    m_p: float = 10.0
    c1: float = 1e-4
    c2: float = 0.1
    grad_tol: float = 1e-10

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(dof=self.nu, scale=self.sigma_eps, rho=self.rho, dim=3)

    def mlp_spec(self) -> MlpSpec:
        return MlpSpec(input_dim=3, hidden=self.hidden, output_dim=3)

    def cg_config(self) -> CgConfig:
        return CgConfig(
            eta=self.eta,
            c1=self.c1,
            c2=self.c2,
            direction_cap=self.m_p,
            refresh_period=self.refresh_period,
            max_iter=self.iterations,
            grad_tol=self.grad_tol,
        )


def paper_defaults() -> ExperimentConfig:
    """The embedded hard-regime preset (all defaults)."""
    return ExperimentConfig()


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` config file; '#' starts a comment."""
    mapping = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        mapping[key] = value
    return mapping


def config_from_mapping(mapping: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Apply string key/value overrides on top of a base config."""
    base = base or ExperimentConfig()
    fields = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    updates = {}
    for raw_key, raw_value in mapping.items():
        key = KEY_ALIASES.get(raw_key, raw_key)
        if key not in fields:
            raise InvalidParameter(f"unknown config key {raw_key!r}")
        current = getattr(base, key)
        if key == "methods":
            value = tuple(m.strip() for m in str(raw_value).split(",") if m.strip())
        elif isinstance(current, bool):
            value = str(raw_value).lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            value = int(raw_value)
        elif isinstance(current, float):
            value = float(raw_value)
        else:
            value = str(raw_value)
        updates[key] = value
    return dataclasses.replace(base, **updates)


def loss_spec(cfg: ExperimentConfig, method: str) -> LossSpec:
    """Loss spec for a method name; ``cic_gamma0`` is the no-dependence variant."""
    if method in ("cic", "cic_gamma0") or method.startswith("cic@"):
        gamma = cfg.gamma
        if method == "cic_gamma0":
            gamma = 0.0
        elif method.startswith("cic@"):
            gamma = float(method.split("@", 1)[1])
        cic = CicConfig(alpha=cfg.alpha, gamma=gamma, delta=cfg.delta, sigma_k=cfg.sigma_k)
        return LossSpec(kind="cic", cic=cic)
    if method in ("mse", "huber", "student_t", "mcc"):
        return LossSpec(
            kind=method,
            huber_delta=cfg.huber_delta,
            t_dof=cfg.t_dof,
            t_scale=cfg.t_scale,
            mcc_sigma=cfg.mcc_sigma,
            mcc_form=cfg.mcc_form,
        )
    raise InvalidParameter(f"unknown method {method!r}")


def build_problem(cfg: ExperimentConfig, method: str, mlp: MlpSpec, batch: Batch):
    return make_problem(
        loss_spec(cfg, method),
        mlp,
        batch,
        marginal=cfg.marginal,
        marginal_dof=cfg.marginal_dof,
        marginal_scale=cfg.marginal_scale,
        clip_eps=cfg.clip_eps,
        shrinkage=cfg.shrinkage,
        ridge=cfg.epsilon_sigma,
    )


@dataclass
class MetricsRow:
    """One metrics observation; ``iteration`` holds the sweep value in sweeps."""

    method: str
    run: int
    iteration: float
    rmse: float
    q90: float
    q95: float


@dataclass
class McResult:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    records: dict = field(default_factory=dict)  # (method, run) -> [IterationRecord]
    failures: list = field(default_factory=list)  # (method, run, message)


@dataclass
class SweepResult:
    axis: str
    grid: tuple
    rows: list = field(default_factory=list)  # iteration column = grid value
    failures: list = field(default_factory=list)  # (value, method, run, message)


def evaluate_metrics(mlp: MlpSpec, w: np.ndarray, test: Batch):
    """RMSE plus Q90/Q95 of pooled absolute errors against clean targets."""
    err = test.targets - forward(mlp, w, test.inputs)
    pooled = np.abs(err).ravel()
    rmse = float(np.sqrt(np.mean(err * err)))
    return rmse, numkit.empirical_quantile(pooled, 0.9), numkit.empirical_quantile(pooled, 0.95)


def run_single(cfg: ExperimentConfig, run_index: int):
    """All methods on one Monte Carlo draw (shared init, data, and budget)."""
    mlp = cfg.mlp_spec()
    dataset = make_dataset(cfg.seed, cfg.noise_spec(), cfg.n_train, cfg.n_test, run=run_index)
    w0 = init_parameters(mlp, init_rng(cfg.seed, run_index))
    rows, records, failures = [], {}, []
    for method in cfg.methods:
        try:
            problem = build_problem(cfg, method, mlp, dataset.train)
            result = cg_run(problem, w0, cfg.cg_config())
        except CiccgError as exc:
            failures.append((method, run_index, f"{type(exc).__name__}: {exc}"))
            continue
        records[(method, run_index)] = result.records
        iterates = result.iterates if result.iterates else [np.asarray(w0, dtype=float)]
        for k in range(cfg.iterations):
            w_k = iterates[min(k, len(iterates) - 1)]
            rmse, q90, q95 = evaluate_metrics(mlp, w_k, dataset.test)
            rows.append(MetricsRow(method, run_index, float(k + 1), rmse, q90, q95))
    return rows, records, failures


def run_monte_carlo(cfg: ExperimentConfig) -> McResult:
    """Monte Carlo protocol over ``cfg.mc_runs`` independent runs.

    Individual run failures are recorded and excluded from aggregates, never
    silently dropped.
    """
    outputs = Parallel(n_jobs=cfg.n_jobs)(
        delayed(run_single)(cfg, r) for r in range(cfg.mc_runs)
    )
    result = McResult(config=cfg)
    for rows, records, failures in outputs:
        result.rows.extend(rows)
        result.records.update(records)
        result.failures.extend(failures)
    return result


def run_sweep(cfg: ExperimentConfig, axis: str, grid=None) -> SweepResult:
    """Final-iterate metrics per grid point, averaged over Monte Carlo runs."""
    if axis == "rho":
        grid = tuple(grid) if grid is not None else RHO_GRID
        configs = [dataclasses.replace(cfg, rho=float(v)) for v in grid]
    elif axis == "nu":
        grid = tuple(grid) if grid is not None else NU_GRID
        configs = [dataclasses.replace(cfg, nu=float(v)) for v in grid]
    elif axis == "gamma":
        grid = tuple(grid) if grid is not None else GAMMA_GRID
        configs = [dataclasses.replace(cfg, gamma=float(v)) for v in grid]
    else:
        raise InvalidParameter(f"unknown sweep axis {axis!r}")
    sweep = SweepResult(axis=axis, grid=grid)
    final_iter = float(cfg.iterations)
    for value, point_cfg in zip(grid, configs):
        mc = run_monte_carlo(point_cfg)
        for row in mc.rows:
            if row.iteration == final_iter:
                sweep.rows.append(
                    MetricsRow(row.method, row.run, float(value), row.rmse, row.q90, row.q95)
                )
        sweep.failures.extend((value, m, r, msg) for (m, r, msg) in mc.failures)
    return sweep


def run_ablation(cfg: ExperimentConfig, grid=None) -> SweepResult:
    """Dependence-term ablation: mcc vs cic(gamma=0) vs full cic over rho."""
    ablation_cfg = dataclasses.replace(cfg, methods=ABLATION_METHODS)
    return run_sweep(ablation_cfg, "rho", grid)


def _mean_std(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def group_stats(rows, key_of):
    """Aggregate rows into {key: {metric: (mean, std), "n": count}}."""
    grouped = {}
    for row in rows:
        grouped.setdefault(key_of(row), []).append(row)
    out = {}
    for key, members in grouped.items():
        out[key] = {
            "rmse": _mean_std([m.rmse for m in members]),
            "q90": _mean_std([m.q90 for m in members]),
            "q95": _mean_std([m.q95 for m in members]),
            "n": len(members),
        }
    return out


def final_rows(result: McResult):
    final_iter = float(result.config.iterations)
    return [row for row in result.rows if row.iteration == final_iter]


def _fmt(x) -> str:
    return repr(float(x))


def emit_mc_reports(result: McResult, outdir) -> list[Path]:
    """Write rows.csv, curves.csv, diagnostics.csv, and summary.txt."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    written = []

    rows_path = outdir / "rows.csv"
    with open(rows_path, "w") as fh:
        fh.write("method,run,iter,rmse,q90,q95\n")
        for row in _ordered_rows(result.rows, cfg.methods):
            fh.write(
                f"{row.method},{row.run},{_fmt(row.iteration)},"
                f"{_fmt(row.rmse)},{_fmt(row.q90)},{_fmt(row.q95)}\n"
            )
    written.append(rows_path)

    curves_path = outdir / "curves.csv"
    stats = group_stats(result.rows, lambda r: (r.method, r.iteration))
    with open(curves_path, "w") as fh:
        fh.write("method,iter,rmse_mean,rmse_std,q90_mean,q90_std,q95_mean,q95_std\n")
        for method in cfg.methods:
            for k in range(1, cfg.iterations + 1):
                key = (method, float(k))
                if key not in stats:
                    continue
                s = stats[key]
                fh.write(
                    f"{method},{_fmt(k)},{_fmt(s['rmse'][0])},{_fmt(s['rmse'][1])},"
                    f"{_fmt(s['q90'][0])},{_fmt(s['q90'][1])},"
                    f"{_fmt(s['q95'][0])},{_fmt(s['q95'][1])}\n"
                )
    written.append(curves_path)

    diag_path = outdir / "diagnostics.csv"
    with open(diag_path, "w") as fh:
        fh.write(
            "method,run,k,value,grad_norm,step,beta,evals,gp,p_norm,zoutendijk,"
            "restarted,safeguarded,refreshed,line_search_failed\n"
        )
        for method in cfg.methods:
            for run_index in range(cfg.mc_runs):
                for rec in result.records.get((method, run_index), ()):
                    fh.write(
                        f"{method},{run_index},{rec.k},{_fmt(rec.value)},"
                        f"{_fmt(rec.grad_norm)},{_fmt(rec.step)},{_fmt(rec.beta)},"
                        f"{rec.n_evals},{_fmt(rec.gp)},{_fmt(rec.p_norm)},"
                        f"{_fmt(rec.zoutendijk)},{int(rec.restarted)},"
                        f"{int(rec.safeguarded)},{int(rec.refreshed)},"
                        f"{int(rec.line_search_failed)}\n"
                    )
    written.append(diag_path)

    summary_path = outdir / "summary.txt"
    final = group_stats(final_rows(result), lambda r: r.method)
    with open(summary_path, "w") as fh:
        fh.write(f"seed={cfg.seed} runs={cfg.mc_runs} iterations={cfg.iterations} ")
        fh.write(f"nu={cfg.nu} rho={cfg.rho} sigma_eps={cfg.sigma_eps}\n")
        fh.write("final-iteration metrics on clean test data (mean +- std over runs)\n")
        for method in cfg.methods:
            if method not in final:
                fh.write(f"{method:>12}: no completed runs\n")
                continue
            s = final[method]
            fh.write(
                f"{method:>12}: rmse {s['rmse'][0]:.6f} +- {s['rmse'][1]:.6f}  "
                f"q90 {s['q90'][0]:.6f} +- {s['q90'][1]:.6f}  "
                f"q95 {s['q95'][0]:.6f} +- {s['q95'][1]:.6f}  (n={s['n']})\n"
            )
        fh.write(f"failed runs: {len(result.failures)}\n")
        for method, run_index, msg in result.failures:
            fh.write(f"  {method} run={run_index}: {msg}\n")
    written.append(summary_path)
    return written


def emit_sweep_reports(result: SweepResult, outdir) -> list[Path]:
    """Write rows.csv (iter column = grid value) and sweep_summary.csv."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    rows_path = outdir / "rows.csv"
    methods = _method_order(result.rows)
    with open(rows_path, "w") as fh:
        fh.write("method,run,iter,rmse,q90,q95\n")
        for row in _ordered_rows(result.rows, methods):
            fh.write(
                f"{row.method},{row.run},{_fmt(row.iteration)},"
                f"{_fmt(row.rmse)},{_fmt(row.q90)},{_fmt(row.q95)}\n"
            )
    written.append(rows_path)

    summary_path = outdir / "sweep_summary.csv"
    stats = group_stats(result.rows, lambda r: (r.iteration, r.method))
    with open(summary_path, "w") as fh:
        fh.write(
            "axis,value,method,n_runs,rmse_mean,rmse_std,q90_mean,q90_std,q95_mean,q95_std\n"
        )
        for value in result.grid:
            for method in methods:
                key = (float(value), method)
                if key not in stats:
                    continue
                s = stats[key]
                fh.write(
                    f"{result.axis},{_fmt(value)},{method},{s['n']},"
                    f"{_fmt(s['rmse'][0])},{_fmt(s['rmse'][1])},"
                    f"{_fmt(s['q90'][0])},{_fmt(s['q90'][1])},"
                    f"{_fmt(s['q95'][0])},{_fmt(s['q95'][1])}\n"
                )
    written.append(summary_path)

    text_path = outdir / "summary.txt"
    with open(text_path, "w") as fh:
        fh.write(f"sweep axis={result.axis} grid={list(result.grid)}\n")
        fh.write(f"failed runs: {len(result.failures)}\n")
        for value, method, run_index, msg in result.failures:
            fh.write(f"  {result.axis}={value} {method} run={run_index}: {msg}\n")
    written.append(text_path)
    return written


def _method_order(rows):
    seen = []
    for row in rows:
        if row.method not in seen:
            seen.append(row.method)
    return seen


def _ordered_rows(rows, methods):
    order = {m: i for i, m in enumerate(methods)}
    return sorted(rows, key=lambda r: (order.get(r.method, len(order)), r.run, r.iteration))
