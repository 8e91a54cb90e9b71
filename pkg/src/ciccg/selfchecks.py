"""Built-in verification suites: gradient checks and statistical invariants.

These back the ``selftest`` CLI subcommand and are reused by the test suite.
Each check returns ``(ok, detail)`` so callers can aggregate and report.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from . import numkit
from .copula import estimate_metric
from .datagen import NoiseSpec, sample_noise
from .marginals import fit_parametric_t
from .model import Batch, MlpSpec, init_parameters, residuals
from .objectives import (
    CicConfig,
    LossSpec,
    baseline_value_and_gradient,
    cic_value,
    cic_value_and_gradient,
    pure_cic_limit_check,
)
from .optimizer import CgConfig, run as cg_run


def relative_gradient_error(analytic: np.ndarray, fd: np.ndarray) -> float:
    """Worst coordinate-wise relative error with a scale floor.

    Coordinates far below the gradient's overall scale are compared at that
    scale, since central differences bottom out near |J| * eps / step.
    """
    scale = max(float(np.max(np.abs(analytic))), float(np.max(np.abs(fd))), 1e-12)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-6 * scale)
    return float(np.max(np.abs(analytic - fd) / denom))


def finite_difference_gradient(value_fn, w: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function, coordinate by coordinate."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    for i in range(w.size):
        delta = np.zeros_like(w)
        delta[i] = step
        out[i] = (value_fn(w + delta) - value_fn(w - delta)) / (2.0 * step)
    return out


def _random_cic_setup(rng: np.random.Generator, n: int = 50):
    mlp = MlpSpec(3, 6, 3)
    w = rng.normal(scale=0.6, size=mlp.n_params)
    batch = Batch(rng.uniform(-1, 1, (n, 3)), rng.normal(scale=1.0, size=(n, 3)))
    cfg = CicConfig(
        alpha=float(rng.uniform(0.6, 2.0)),
        gamma=float(rng.uniform(0.0, 1.0)),
        delta=float(10.0 ** rng.uniform(-12, -2)),
        sigma_k=float(rng.uniform(0.4, 1.5)),
    )
    marg = fit_parametric_t(1.0, 1.0, 3)
    u, _ = marg.transform(residuals(mlp, w, batch))
    metric = estimate_metric(u, shrinkage=0.35, ridge=1e-8)
    return mlp, w, batch, marg, metric, cfg


def gradient_oracle_check(
    n_draws: int = 20, tol: float = 1e-5, seed: int = 7, step: float = 1e-6
):
    """Analytic mixed-objective gradient vs central finite differences."""
    worst = 0.0
    for draw in range(n_draws):
        rng = numkit.spawn_rng(seed, draw)
        mlp, w, batch, marg, metric, cfg = _random_cic_setup(rng)
        out = cic_value_and_gradient(mlp, w, batch, marg, metric, cfg)
        fd = finite_difference_gradient(
            lambda wv: cic_value(mlp, wv, batch, marg, metric, cfg), w, step
        )
        worst = max(worst, relative_gradient_error(out.grad, fd))
    return worst <= tol, f"max relative gradient error {worst:.3e} (tol {tol:.0e})"


def baseline_gradient_check(n_draws: int = 5, tol: float = 1e-5, seed: int = 11):
    """Each baseline's analytic gradient vs central finite differences."""
    specs = (
        LossSpec(kind="mse"),
        LossSpec(kind="huber"),
        LossSpec(kind="student_t"),
        LossSpec(kind="mcc", mcc_form="componentwise"),
        LossSpec(kind="mcc", mcc_form="joint"),
    )
    worst = 0.0
    for kind_index, spec in enumerate(specs):
        for draw in range(n_draws):
            rng = numkit.spawn_rng(seed, kind_index, draw)
            mlp = MlpSpec(3, 5, 3)
            w = rng.normal(scale=0.6, size=mlp.n_params)
            batch = Batch(rng.uniform(-1, 1, (40, 3)), rng.normal(size=(40, 3)))
            out = baseline_value_and_gradient(spec, mlp, w, batch)
            fd = finite_difference_gradient(
                lambda wv: baseline_value_and_gradient(spec, mlp, wv, batch).value, w
            )
            worst = max(worst, relative_gradient_error(out.grad, fd))
    return worst <= tol, f"max relative baseline gradient error {worst:.3e} (tol {tol:.0e})"


def limit_identity_check():
    """Algebraic limit identities of the mixed objective."""
    ok = pure_cic_limit_check()
    return ok, "limit identities hold to 1e-12" if ok else "limit identity violated"


def uniformity_check(n: int = 10_000, seed: int = 3):
    """Copula transform of draws from its own marginal is uniform (KS test)."""
    rng = numkit.spawn_rng(seed, 0)
    marg = fit_parametric_t(1.0, 1.0, 1)
    e = rng.standard_cauchy(size=(n, 1))
    u, _ = marg.transform(e)
    ks = float(stats.kstest(u[:, 0], "uniform").statistic)
    bound = 1.63 / np.sqrt(n)
    return ks < bound, f"KS statistic {ks:.5f} (1% critical value {bound:.5f})"


def metric_pd_check(n_sets: int = 1000, seed: int = 5, ridge: float = 1e-8):
    """Shrinkage metric stays PD, including constant-column residual sets."""
    rng = numkit.spawn_rng(seed, 1)
    min_eig = np.inf
    for i in range(n_sets):
        n = int(rng.integers(2, 40))
        p = int(rng.integers(1, 6))
        u = rng.uniform(0.0, 1.0, size=(n, p))
        if i % 3 == 0:
            u[:, rng.integers(0, p)] = 0.5  # rank-deficient: constant column
        if i % 7 == 0:
            u[:] = 0.25  # fully degenerate
        metric = estimate_metric(u, shrinkage=float(rng.uniform(0, 1)), ridge=ridge)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(metric.sigma)[0]))
    ok = min_eig >= ridge - 1e-12
    return ok, f"min eigenvalue over {n_sets} sets: {min_eig:.3e} (ridge {ridge:.0e})"


def noise_dependence_check(n: int = 100_000, seed: int = 9):
    """Kendall's tau of noise component pairs increases with rho."""
    taus = []
    for idx, rho in enumerate((0.0, 0.5, 0.9)):
        rng = numkit.spawn_rng(seed, idx)
        draws = sample_noise(NoiseSpec(dof=2.2, scale=1.0, rho=rho, dim=3), n, rng)
        taus.append(float(stats.kendalltau(draws[:, 0], draws[:, 1]).statistic))
    ok = taus[0] < taus[1] < taus[2]
    return ok, f"Kendall tau across rho (0, 0.5, 0.9): {[round(t, 4) for t in taus]}"


class _Quadratic:
    """Convex quadratic 0.5 (w - w*)' A (w - w*) in residual form.

    The residual form keeps function values accurate near the minimizer
    (no cancellation against a large constant), so the check measures the
    engine rather than float round-off of the test problem.
    """

    refreshable = False

    def __init__(self, a: np.ndarray, w_star: np.ndarray) -> None:
        self.a = a
        self.w_star = w_star

    def prepare(self, w):
        return None

    def evaluate(self, w, state):
        s = w - self.w_star
        g = self.a @ s
        return 0.5 * float(s @ g), g


def make_quadratic(dim: int, rng: np.random.Generator):
    """Random SPD quadratic with eigenvalues in [1, 10]."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    eigs = rng.uniform(1.0, 10.0, size=dim)
    a = (q * eigs) @ q.T
    a = 0.5 * (a + a.T)
    return _Quadratic(a, rng.normal(size=dim))


def cg_quadratic_check(dim: int = 60, seed: int = 13, tol: float = 1e-8):
    """CG engine solves a convex quadratic within dim + 5 iterations."""
    rng = numkit.spawn_rng(seed, 0)
    problem = make_quadratic(dim, rng)
    cfg = CgConfig(max_iter=dim + 5, refresh_period=10 * dim, grad_tol=tol)
    result = cg_run(problem, rng.normal(size=dim), cfg)
    g_final = problem.evaluate(result.weights, None)[1]
    gnorm = float(np.linalg.norm(g_final))
    iters = len(result.records)
    ok = gnorm < tol and iters <= dim + 5
    return ok, f"|g| = {gnorm:.2e} after {iters} iterations (dim {dim})"


ALL_CHECKS = (
    ("gradient-oracle", gradient_oracle_check),
    ("baseline-gradients", baseline_gradient_check),
    ("limit-identities", limit_identity_check),
    ("copula-uniformity", uniformity_check),
    ("metric-positive-definite", metric_pd_check),
    ("noise-dependence", noise_dependence_check),
    ("cg-quadratic", cg_quadratic_check),
)


def run_all(verbose: bool = True) -> bool:
    """Run every check, print one line per check, return overall success."""
    all_ok = True
    for name, check in ALL_CHECKS:
        ok, detail = check()
        all_ok = all_ok and ok
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
