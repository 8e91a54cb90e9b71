"""Scikit-learn compatible regressor around the conjugate-gradient learner.

``CicCgRegressor`` trains the single-hidden-layer tanh network under one of
the supported robust losses (the mixed copula-correntropy objective by
default) and exposes the standard ``fit`` / ``predict`` / ``get_params``
surface so it composes with pipelines, grid search, and cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import numkit
from .model import Batch, MlpSpec, forward, init_parameters
from .objectives import CicConfig, LossSpec, make_problem
from .optimizer import CgConfig, run as cg_run


class CicCgRegressor(RegressorMixin, BaseEstimator):
    """Robust multi-output regressor trained by safeguarded conjugate gradient.

    Parameters
    ----------
    loss : str, default="cic"
        One of "cic", "mse", "huber", "student_t", "mcc". The default is the
        mixed marginal/dependence correntropy objective; the others are the
        benchmark baselines.
    hidden_units : int, default=14
        Width of the tanh hidden layer.
    max_iter : int, default=70
        Conjugate-gradient iteration budget.
    alpha, gamma, delta, sigma_k : float
        Mixed-objective scalars: radial shape, dependence mixing weight,
        radial smoothing, and marginal kernel width.
    marginal : str, default="student_t"
        Residual marginal family for the copula transform, "student_t" or
        "kde".
    marginal_dof, marginal_scale : float
        Parameters of the parametric Student's-t marginal.
    clip_eps : float, default=1e-6
        Copula-space clipping level.
    shrinkage, sigma_ridge : float
        Shrinkage weight and ridge of the copula-space metric.
    huber_delta, t_dof, t_scale, mcc_sigma : float
        Baseline-loss parameters.
    refresh_period : int, default=15
        Iterations between estimator refreshes of the mixed objective.
    eta, direction_cap, c1, c2, tol : float
        Optimizer safeguards: sufficient-descent threshold, direction-norm
        cap, strong Wolfe constants, and gradient-norm stopping tolerance.
    random_state : int or None
        Seed for the parameter initialization.

    Attributes
    ----------
    weights_ : ndarray of shape (n_params,)
        Flat trained parameter vector.
    history_ : list of IterationRecord
        Per-iteration optimizer diagnostics.
    n_iter_ : int
        Number of conjugate-gradient iterations performed.
    """

    def __init__(
        self,
        loss: str = "cic",
        hidden_units: int = 14,
        max_iter: int = 70,
        alpha: float = 1.2,
        gamma: float = 0.55,
        delta: float = 1e-12,
        sigma_k: float = 0.8,
        marginal: str = "student_t",
        marginal_dof: float = 1.0,
        marginal_scale: float = 1.0,
        clip_eps: float = 1e-6,
        shrinkage: float = 0.35,
        sigma_ridge: float = 1e-8,
        huber_delta: float = 1.0,
        t_dof: float = 3.0,
        t_scale: float = 1.0,
        mcc_sigma: float = 0.8,
        mcc_form: str = "componentwise",
        refresh_period: int = 15,
        eta: float = 1e-3,
        direction_cap: float = 10.0,
        c1: float = 1e-4,
        c2: float = 0.1,
        tol: float = 1e-10,
        random_state: int | None = None,
    ) -> None:
        self.loss = loss
        self.hidden_units = hidden_units
        self.max_iter = max_iter
        self.alpha = alpha
        self.gamma = gamma
        self.delta = delta
        self.sigma_k = sigma_k
        self.marginal = marginal
        self.marginal_dof = marginal_dof
        self.marginal_scale = marginal_scale
        self.clip_eps = clip_eps
        self.shrinkage = shrinkage
        self.sigma_ridge = sigma_ridge
        self.huber_delta = huber_delta
        self.t_dof = t_dof
        self.t_scale = t_scale
        self.mcc_sigma = mcc_sigma
        self.mcc_form = mcc_form
        self.refresh_period = refresh_period
        self.eta = eta
        self.direction_cap = direction_cap
        self.c1 = c1
        self.c2 = c2
        self.tol = tol
        self.random_state = random_state

    def _loss_spec(self) -> LossSpec:
        if self.loss == "cic":
            cic = CicConfig(
                alpha=self.alpha, gamma=self.gamma, delta=self.delta, sigma_k=self.sigma_k
            )
            return LossSpec(kind="cic", cic=cic)
        return LossSpec(
            kind=self.loss,
            huber_delta=self.huber_delta,
            t_dof=self.t_dof,
            t_scale=self.t_scale,
            mcc_sigma=self.mcc_sigma,
            mcc_form=self.mcc_form,
        )

    def fit(self, X, y):
        """Train the network on (X, y); y may be 1-D or (n_samples, n_outputs)."""
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True, dtype=float)
        self._y_was_1d = y.ndim == 1
        y2 = y[:, None] if self._y_was_1d else y
        spec = MlpSpec(X.shape[1], self.hidden_units, y2.shape[1])
        batch = Batch(X, y2)
        seed = (
            self.random_state
            if self.random_state is not None
            else np.random.SeedSequence().entropy
        )
        w0 = init_parameters(spec, numkit.spawn_rng(seed, 0))
        problem = make_problem(
            self._loss_spec(),
            spec,
            batch,
            marginal=self.marginal,
            marginal_dof=self.marginal_dof,
            marginal_scale=self.marginal_scale,
            clip_eps=self.clip_eps,
            shrinkage=self.shrinkage,
            ridge=self.sigma_ridge,
        )
        cfg = CgConfig(
            eta=self.eta,
            c1=self.c1,
            c2=self.c2,
            direction_cap=self.direction_cap,
            refresh_period=self.refresh_period,
            max_iter=self.max_iter,
            grad_tol=self.tol,
        )
        result = cg_run(problem, w0, cfg)
        self.spec_ = spec
        self.weights_ = result.weights
        self.history_ = result.records
        self.n_iter_ = len(result.records)
        self.n_features_in_ = X.shape[1]
        self.n_outputs_ = y2.shape[1]
        return self

    def predict(self, X):
        """Predict targets for X with the trained network."""
        check_is_fitted(self, "weights_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        y = forward(self.spec_, self.weights_, X)
        return y[:, 0] if self._y_was_1d else y
