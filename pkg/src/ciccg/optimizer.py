"""Safeguarded PRP+ nonlinear conjugate gradient with strong Wolfe line search.

The loop alternates fixed-estimator blocks with periodic estimator refreshes:
within a block the objective is stationary and the usual descent guarantees
apply; at each refresh the block restarts from the steepest-descent direction.
Safeguards enforce sufficient descent (g'p <= -eta |g|^2) and bounded
directions (|p| <= M_p |g|) by falling back to -g whenever either fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameter, ZeroPreviousGradient


@dataclass(frozen=True)
class CgConfig:
    """Conjugate-gradient and line-search constants."""

    eta: float = 1e-3
    c1: float = 1e-4
    c2: float = 0.1
    direction_cap: float = 10.0
    refresh_period: int = 15
    max_iter: int = 70
    grad_tol: float = 1e-10
    max_line_evals: int = 40

    def __post_init__(self) -> None:
        if not (0.0 < self.eta < 1.0):
            raise InvalidParameter(f"eta must lie in (0, 1), got {self.eta}")
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise InvalidParameter("need 0 < c1 < c2 < 1")
        if self.direction_cap < 1.0:
            raise InvalidParameter(
                "direction cap must be >= 1 so the steepest-descent fallback satisfies it"
            )
        if self.refresh_period < 1:
            raise InvalidParameter("refresh period must be >= 1")
        if self.max_iter < 1:
            raise InvalidParameter("max_iter must be >= 1")
        if self.grad_tol < 0.0:
            raise InvalidParameter("grad_tol must be >= 0")
        if self.max_line_evals < 3:
            raise InvalidParameter("line search needs at least 3 evaluations")


@dataclass
class IterationRecord:
    """Per-iteration diagnostics of one conjugate-gradient step."""

    k: int
    value: float
    grad_norm: float
    gp: float
    p_norm: float
    zoutendijk: float
    beta: float
    step: float
    n_evals: int
    restarted: bool
    safeguarded: bool
    refreshed: bool
    line_search_failed: bool
    armijo_slack: float
    curvature_slack: float


@dataclass
class LineSearchResult:
    alpha: float
    value: float
    grad: np.ndarray | None
    n_evals: int
    converged: bool
    armijo_slack: float
    curvature_slack: float


@dataclass
class RunResult:
    """Final iterate plus the full diagnostic trace of the run."""

    weights: np.ndarray
    records: list[IterationRecord] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)

    @property
    def n_refreshes(self) -> int:
        return sum(r.refreshed for r in self.records)


def beta_prp_plus(g: np.ndarray, g_prev: np.ndarray) -> float:
    """Polak-Ribiere-Polyak coefficient clamped at zero."""
    g = np.asarray(g, dtype=float)
    g_prev = np.asarray(g_prev, dtype=float)
    denom = float(g_prev @ g_prev)
    if denom == 0.0:
        raise ZeroPreviousGradient("previous gradient is zero")
    return max(0.0, float(g @ (g - g_prev)) / denom)


def direction(
    g: np.ndarray, p_prev: np.ndarray | None, beta: float, cfg: CgConfig
):
    """Candidate direction -g + beta * p_prev with descent and norm safeguards.

    Returns (p, restarted, safeguarded): ``restarted`` marks a failed
    sufficient-descent test, ``safeguarded`` a violated direction-norm cap;
    either replaces the candidate with -g.
    """
    g = np.asarray(g, dtype=float)
    if p_prev is None:
        return -g, False, False
    p = -g + beta * np.asarray(p_prev, dtype=float)
    gg = float(g @ g)
    restarted = float(g @ p) >= -cfg.eta * gg
    safeguarded = float(np.linalg.norm(p)) > cfg.direction_cap * np.sqrt(gg)
    if restarted or safeguarded:
        p = -g
    return p, restarted, safeguarded


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic through (a, fa, da) and (b, fb, db), or None."""
    if a == b:
        return None
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0.0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = db - da + 2.0 * d2
    if denom == 0.0:
        return None
    x = b - (b - a) * (db + d2 - d1) / denom
    return x if np.isfinite(x) else None


def wolfe_line_search(
    phi,
    f0: float,
    df0: float,
    cfg: CgConfig,
    initial_step: float = 1.0,
):
    """Strong Wolfe line search by bracketing and cubic-interpolated zooming.

    ``phi(alpha)`` must return ``(f, df, payload)`` where ``df`` is the
    directional derivative and ``payload`` is carried back to the caller (the
    full gradient at the trial point). Requires ``df0 < 0``. On failure the
    best point satisfying sufficient decrease is returned with
    ``converged=False``.
    """
    if not df0 < 0.0:
        raise InvalidParameter("line search requires a descent direction")
    c1, c2 = cfg.c1, cfg.c2
    curv_bound = c2 * abs(df0)
    evals = 0
    best = None  # (alpha, f, df, payload) with the lowest Armijo-feasible f

    def armijo(a, f):
        return f <= f0 + c1 * a * df0

    def note(a, f, df, payload):
        nonlocal best
        if armijo(a, f) and (best is None or f < best[1]):
            best = (a, f, df, payload)

    def accepted(a, f, df, payload):
        return LineSearchResult(
            alpha=a,
            value=f,
            grad=payload,
            n_evals=evals,
            converged=True,
            armijo_slack=(f0 + c1 * a * df0) - f,
            curvature_slack=curv_bound - abs(df),
        )

    def failed():
        if best is None:
            return LineSearchResult(
                alpha=0.0,
                value=f0,
                grad=None,
                n_evals=evals,
                converged=False,
                armijo_slack=0.0,
                curvature_slack=curv_bound - abs(df0),
            )
        a, f, df, payload = best
        return LineSearchResult(
            alpha=a,
            value=f,
            grad=payload,
            n_evals=evals,
            converged=False,
            armijo_slack=(f0 + c1 * a * df0) - f,
            curvature_slack=curv_bound - abs(df),
        )

    # Bracketing phase: expand until the minimum is straddled.
    a_prev, f_prev, df_prev, pay_prev = 0.0, f0, df0, None
    a = initial_step if (np.isfinite(initial_step) and initial_step > 0.0) else 1.0
    bracket = None
    first = True
    while evals < cfg.max_line_evals:
        f, df, payload = phi(a)
        evals += 1
        note(a, f, df, payload)
        if (not armijo(a, f)) or (not first and f >= f_prev):
            bracket = (a_prev, f_prev, df_prev, a, f, df)
            break
        if abs(df) <= curv_bound:
            return accepted(a, f, df, payload)
        if df >= 0.0:
            bracket = (a, f, df, a_prev, f_prev, df_prev)
            break
        a_prev, f_prev, df_prev, pay_prev = a, f, df, payload
        a *= 2.0
        first = False
    if bracket is None:
        return failed()

    # Zoom phase: shrink [lo, hi] keeping the Wolfe point inside.
    lo, f_lo, df_lo, hi, f_hi, df_hi = bracket
    while evals < cfg.max_line_evals:
        width = abs(hi - lo)
        if width <= 1e-16 * max(1.0, abs(lo)):
            break
        a = _cubic_min(lo, f_lo, df_lo, hi, f_hi, df_hi)
        margin = 0.1 * width
        left, right = min(lo, hi), max(lo, hi)
        if a is None or not (left + margin <= a <= right - margin):
            a = 0.5 * (lo + hi)
        f, df, payload = phi(a)
        evals += 1
        note(a, f, df, payload)
        if (not armijo(a, f)) or f >= f_lo:
            hi, f_hi, df_hi = a, f, df
        else:
            if abs(df) <= curv_bound:
                return accepted(a, f, df, payload)
            if df * (hi - lo) >= 0.0:
                hi, f_hi, df_hi = lo, f_lo, df_lo
            lo, f_lo, df_lo = a, f, df
    return failed()


def run(objective, w0: np.ndarray, cfg: CgConfig) -> RunResult:
    """Optimize ``objective`` from ``w0`` with periodic estimator refreshes.

    ``objective`` must provide ``prepare(w) -> state`` and
    ``evaluate(w, state) -> (value, gradient)``; a falsy ``refreshable``
    attribute skips the periodic re-preparation. Line-search failures are
    non-fatal: the step falls back to the best sufficient-decrease point and
    the next direction restarts from -g.
    """
    w = np.asarray(w0, dtype=float).copy()
    state = objective.prepare(w)
    refreshable = getattr(objective, "refreshable", True)
    f, g = objective.evaluate(w, state)
    p, beta = -g, 0.0
    restarted = safeguarded = False
    result = RunResult(weights=w)

    for k in range(cfg.max_iter):
        refreshed = False
        if refreshable and k > 0 and k % cfg.refresh_period == 0:
            state = objective.prepare(w)
            f, g = objective.evaluate(w, state)
            p, beta = -g, 0.0
            restarted = safeguarded = False
            refreshed = True
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= cfg.grad_tol:
            break
        gp = float(g @ p)
        p_norm = float(np.linalg.norm(p))

        def phi(alpha, _w=w, _p=p, _state=state):
            fa, ga = objective.evaluate(_w + alpha * _p, _state)
            return fa, float(ga @ _p), ga

        ls = wolfe_line_search(phi, f, gp, cfg, initial_step=1.0)

        result.records.append(
            IterationRecord(
                k=k,
                value=f,
                grad_norm=grad_norm,
                gp=gp,
                p_norm=p_norm,
                zoutendijk=gp * gp / (p_norm * p_norm),
                beta=beta,
                step=ls.alpha,
                n_evals=ls.n_evals,
                restarted=restarted,
                safeguarded=safeguarded,
                refreshed=refreshed,
                line_search_failed=not ls.converged,
                armijo_slack=ls.armijo_slack,
                curvature_slack=ls.curvature_slack,
            )
        )
        if ls.grad is None:  # no usable step; restart from -g next iteration
            g_new, f_new = g, f
        else:
            w = w + ls.alpha * p
            f_new, g_new = ls.value, ls.grad
        result.iterates.append(w.copy())
        if not ls.converged or float(g_new @ g_new) == 0.0:
            p, beta = -g_new, 0.0
            restarted, safeguarded = not ls.converged, False
        else:
            beta = beta_prp_plus(g_new, g)
            p, restarted, safeguarded = direction(g_new, p, beta, cfg)
        f, g = f_new, g_new

    result.weights = w
    return result
