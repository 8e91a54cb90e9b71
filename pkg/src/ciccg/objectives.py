"""Loss functions and analytic gradients over the shared model abstraction.

The mixed copula-correntropy objective blends a marginal Gaussian-kernel
correntropy penalty with a radial dependence penalty measured in copula space:

    J(w) = -(1/N) sum_n exp[-(1-gamma) * |e_n|^2 / (2 sigma_k^2)
                            - gamma * (rho_n + delta)^(alpha/2)]

All objectives here are minimized; the correntropy-family losses are negated
similarities, so values lie in [-1, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import copula, model, numkit
from .copula import CopulaMetric, estimate_metric
from .exceptions import (
    InvalidParameter,
    NonFiniteGradient,
    NonFiniteModelOutput,
    SingularRadial,
)
from .marginals import FrozenMarginals, fit_kde, fit_parametric_t
from .model import Batch, MlpSpec

BASELINE_KINDS = ("mse", "huber", "student_t", "mcc")


@dataclass(frozen=True)
class CicConfig:
    """Scalars of the mixed objective: shape, mixing, smoothing, kernel width."""

    alpha: float = 1.2
    gamma: float = 0.55
    delta: float = 1e-12
    sigma_k: float = 0.8

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 2.0):
            raise InvalidParameter(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (0.0 <= self.gamma <= 1.0):
            raise InvalidParameter(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.delta < 0.0:
            raise InvalidParameter(f"delta must be >= 0, got {self.delta}")
        if not self.sigma_k > 0.0:
            raise InvalidParameter(f"sigma_k must be positive, got {self.sigma_k}")


@dataclass(frozen=True)
class LossSpec:
    """Which loss to optimize plus its scalar parameters.

    ``mcc_form`` selects the correntropy baseline's kernel aggregation:
    "componentwise" applies one Gaussian kernel per residual coordinate (the
    classical criterion, which treats output dimensions independently), while
    "joint" applies a single kernel to the residual norm.
    """

    kind: str = "cic"
    cic: CicConfig = field(default_factory=CicConfig)
    huber_delta: float = 1.0
    t_dof: float = 3.0
    t_scale: float = 1.0
    mcc_sigma: float = 0.8
    mcc_form: str = "componentwise"

    def __post_init__(self) -> None:
        if self.kind not in BASELINE_KINDS + ("cic",):
            raise InvalidParameter(f"unknown loss kind {self.kind!r}")
        if self.mcc_form not in ("componentwise", "joint"):
            raise InvalidParameter(f"unknown mcc form {self.mcc_form!r}")
        for name in ("huber_delta", "t_dof", "t_scale", "mcc_sigma"):
            if not getattr(self, name) > 0.0:
                raise InvalidParameter(f"{name} must be positive")


@dataclass
class EvalOut:
    """Objective value, gradient, and per-sample diagnostics."""

    value: float
    grad: np.ndarray
    kappa: np.ndarray | None = None
    rho: np.ndarray | None = None
    omega: np.ndarray | None = None


def _residuals_checked(mlp: MlpSpec, w: np.ndarray, batch: Batch) -> np.ndarray:
    e = model.residuals(mlp, w, batch)
    if not np.all(np.isfinite(e)):
        raise NonFiniteModelOutput("model produced non-finite outputs")
    return e


def _cic_terms(e, marginals: FrozenMarginals, metric: CopulaMetric, cfg: CicConfig):
    u, clip_mask = marginals.transform(e)
    _, sinv, rho = copula.centered_batch(metric, u)
    psi_marg = np.sum(e * e, axis=1) / (2.0 * cfg.sigma_k**2)
    psi_dep = (rho + cfg.delta) ** (cfg.alpha / 2.0)
    kappa = np.exp(-(1.0 - cfg.gamma) * psi_marg - cfg.gamma * psi_dep)
    return u, clip_mask, sinv, rho, kappa


def cic_value(
    mlp: MlpSpec,
    w: np.ndarray,
    batch: Batch,
    marginals: FrozenMarginals,
    metric: CopulaMetric,
    cfg: CicConfig,
) -> float:
    """Mixed objective value at ``w`` with frozen marginals and metric."""
    e = _residuals_checked(mlp, w, batch)
    _, _, _, _, kappa = _cic_terms(e, marginals, metric, cfg)
    return -float(kappa.mean())


def cic_value_and_gradient(
    mlp: MlpSpec,
    w: np.ndarray,
    batch: Batch,
    marginals: FrozenMarginals,
    metric: CopulaMetric,
    cfg: CicConfig,
) -> EvalOut:
    """Mixed objective value, analytic gradient, and per-sample diagnostics.

    The gradient combines the marginal correntropy term with the copula-space
    dependence term; clipped copula coordinates are held fixed, so their
    density entries do not propagate.
    """
    e = _residuals_checked(mlp, w, batch)
    _, clip_mask, sinv, rho, kappa = _cic_terms(e, marginals, metric, cfg)
    n = batch.n

    radial_pow = cfg.alpha / 2.0 - 1.0
    if cfg.alpha < 2.0 and cfg.delta == 0.0 and np.any(rho == 0.0):
        raise SingularRadial(
            "radial penalty derivative is singular at rho = 0 for alpha < 2, delta = 0"
        )
    radial_factor = (rho + cfg.delta) ** radial_pow
    omega = 0.5 * cfg.alpha * radial_factor * kappa

    cotangent = (1.0 - cfg.gamma) / cfg.sigma_k**2 * e
    if cfg.gamma > 0.0:
        dens = np.where(clip_mask, 0.0, marginals.density_diag(e))
        cotangent = cotangent + (cfg.gamma * cfg.alpha * radial_factor)[:, None] * (dens * sinv)
    cotangent *= kappa[:, None]

    grad = -model.accumulate_jacobian_products(mlp, w, batch.inputs, cotangent) / n
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("mixed objective gradient is not finite")
    return EvalOut(value=-float(kappa.mean()), grad=grad, kappa=kappa, rho=rho, omega=omega)


def baseline_value_and_gradient(
    spec: LossSpec, mlp: MlpSpec, w: np.ndarray, batch: Batch
) -> EvalOut:
    """Value and analytic gradient of one of the baseline losses."""
    e = _residuals_checked(mlp, w, batch)
    n = batch.n
    kappa = None
    if spec.kind == "mse":
        value = 0.5 * float(np.sum(e * e)) / n
        cotangent = e
    elif spec.kind == "huber":
        d = spec.huber_delta
        a = np.abs(e)
        quad = a <= d
        value = float(np.sum(np.where(quad, 0.5 * e * e, d * a - 0.5 * d * d))) / n
        cotangent = np.where(quad, e, d * np.sign(e))
    elif spec.kind == "student_t":
        pdf = numkit.student_t_pdf(e, spec.t_dof, spec.t_scale)
        value = -float(np.sum(np.log(pdf))) / n
        cotangent = (spec.t_dof + 1.0) * e / (spec.t_dof * spec.t_scale**2 + e * e)
    elif spec.kind == "mcc":
        sig2 = spec.mcc_sigma**2
        if spec.mcc_form == "joint":
            kappa = np.exp(-np.sum(e * e, axis=1) / (2.0 * sig2))
            value = -float(kappa.mean())
            cotangent = kappa[:, None] * e / sig2
        else:
            kernels = np.exp(-e * e / (2.0 * sig2))  # (N, p), one kernel per coordinate
            kappa = kernels.mean(axis=1)
            value = -float(kappa.mean())
            cotangent = kernels * e / (sig2 * e.shape[1])
    else:
        raise InvalidParameter(f"not a baseline loss: {spec.kind!r}")
    grad = -model.accumulate_jacobian_products(mlp, w, batch.inputs, cotangent) / n
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient(f"{spec.kind} gradient is not finite")
    return EvalOut(value=value, grad=grad, kappa=kappa)


def pure_cic_limit_check(rng: np.random.Generator | None = None, tol: float = 1e-12) -> bool:
    """Verify the algebraic limit identities of the mixed objective.

    On random data: gamma = 0 reproduces the joint Gaussian-kernel correntropy
    loss in the raw residual domain; gamma = 1 drops the marginal term; and
    alpha = 2 with an identity metric and delta = 0 reduces the dependence
    kernel to exp(-|u - u0|^2).
    """
    if rng is None:
        rng = numkit.spawn_rng(0, 99)
    mlp = MlpSpec(3, 5, 3)
    w = rng.normal(scale=0.7, size=mlp.n_params)
    batch = Batch(rng.uniform(-1, 1, (40, 3)), rng.normal(size=(40, 3)))
    marg = fit_parametric_t(1.0, 1.0, 3)
    e = model.residuals(mlp, w, batch)
    u, _ = marg.transform(e)
    metric = estimate_metric(u, shrinkage=0.35, ridge=1e-8)
    identity = CopulaMetric.from_sigma(np.eye(3))

    sigma_k = 0.8
    val_g0 = cic_value(mlp, w, batch, marg, metric, CicConfig(gamma=0.0, sigma_k=sigma_k))
    joint_correntropy = -float(
        np.mean(np.exp(-np.sum(e * e, axis=1) / (2.0 * sigma_k**2)))
    )
    ok_gamma0 = abs(val_g0 - joint_correntropy) <= tol

    cfg1 = CicConfig(alpha=1.2, gamma=1.0, delta=1e-9, sigma_k=sigma_k)
    val_g1 = cic_value(mlp, w, batch, marg, metric, cfg1)
    _, _, rho = copula.centered_batch(metric, u)
    expected_g1 = -float(np.mean(np.exp(-((rho + cfg1.delta) ** (cfg1.alpha / 2.0)))))
    ok_gamma1 = abs(val_g1 - expected_g1) <= tol

    cfg2 = CicConfig(alpha=2.0, gamma=1.0, delta=0.0, sigma_k=sigma_k)
    val_gauss = cic_value(mlp, w, batch, marg, identity, cfg2)
    sq = np.sum((u - identity.center) ** 2, axis=1)
    expected_gauss = -float(np.mean(np.exp(-sq)))
    ok_gauss = abs(val_gauss - expected_gauss) <= tol

    return ok_gamma0 and ok_gamma1 and ok_gauss


class CicProblem:
    """Block objective for the optimizer: refittable estimators + evaluation.

    ``prepare`` fits (or refits) the marginal estimators and the copula metric
    from the residuals at the current iterate and freezes them; ``evaluate``
    scores parameter vectors against that frozen state.
    """

    refreshable = True

    def __init__(
        self,
        mlp: MlpSpec,
        batch: Batch,
        config: CicConfig,
        marginal: str = "student_t",
        marginal_dof: float = 1.0,
        marginal_scale: float = 1.0,
        clip_eps: float = 1e-6,
        shrinkage: float = 0.35,
        ridge: float = 1e-8,
        center: np.ndarray | None = None,
    ) -> None:
        if marginal not in ("student_t", "kde"):
            raise InvalidParameter(f"unknown marginal family {marginal!r}")
        self.mlp = mlp
        self.batch = batch
        self.config = config
        self.marginal = marginal
        self.marginal_dof = marginal_dof
        self.marginal_scale = marginal_scale
        self.clip_eps = clip_eps
        self.shrinkage = shrinkage
        self.ridge = ridge
        self.center = center

    def prepare(self, w: np.ndarray):
        e = _residuals_checked(self.mlp, w, self.batch)
        if self.marginal == "kde":
            marg = fit_kde(e, clip_eps=self.clip_eps)
        else:
            marg = fit_parametric_t(
                self.marginal_dof, self.marginal_scale, self.mlp.output_dim, self.clip_eps
            )
        u, _ = marg.transform(e)
        metric = estimate_metric(u, self.shrinkage, self.ridge, self.center)
        return marg, metric

    def evaluate(self, w: np.ndarray, state):
        marg, metric = state
        out = cic_value_and_gradient(self.mlp, w, self.batch, marg, metric, self.config)
        return out.value, out.grad


class BaselineProblem:
    """Optimizer adapter for the stateless baseline losses."""

    refreshable = False

    def __init__(self, spec: LossSpec, mlp: MlpSpec, batch: Batch) -> None:
        if spec.kind == "cic":
            raise InvalidParameter("use CicProblem for the mixed objective")
        self.spec = spec
        self.mlp = mlp
        self.batch = batch

    def prepare(self, w: np.ndarray):
        return None

    def evaluate(self, w: np.ndarray, state):
        out = baseline_value_and_gradient(self.spec, self.mlp, w, self.batch)
        return out.value, out.grad


def make_problem(
    spec: LossSpec,
    mlp: MlpSpec,
    batch: Batch,
    marginal: str = "student_t",
    marginal_dof: float = 1.0,
    marginal_scale: float = 1.0,
    clip_eps: float = 1e-6,
    shrinkage: float = 0.35,
    ridge: float = 1e-8,
    center: np.ndarray | None = None,
):
    """Build the optimizer adapter for a loss spec."""
    if spec.kind == "cic":
        return CicProblem(
            mlp,
            batch,
            spec.cic,
            marginal=marginal,
            marginal_dof=marginal_dof,
            marginal_scale=marginal_scale,
            clip_eps=clip_eps,
            shrinkage=shrinkage,
            ridge=ridge,
            center=center,
        )
    return BaselineProblem(spec, mlp, batch)
