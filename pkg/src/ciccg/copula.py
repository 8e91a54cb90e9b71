"""Copula-space dependence machinery: shrinkage metric and radial statistic.

The metric is a ridge-stabilized shrinkage covariance of the copula residuals;
the radial statistic is the squared Mahalanobis distance from the dependence
center under that metric, computed through Cholesky solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .exceptions import InvalidParameter, TooFewSamples


def default_center(dim: int) -> np.ndarray:
    """Dependence center at the middle of the unit cube."""
    return np.full(dim, 0.5)


@dataclass(frozen=True)
class CopulaMetric:
    """Positive definite metric in copula space with its Cholesky factor."""

    sigma: np.ndarray
    lower: np.ndarray = field(repr=False)
    center: np.ndarray
    shrinkage: float
    ridge: float

    @classmethod
    def from_sigma(
        cls,
        sigma: np.ndarray,
        center: np.ndarray | None = None,
        shrinkage: float = 0.0,
        ridge: float = 0.0,
    ) -> "CopulaMetric":
        """Wrap an explicitly given SPD matrix (used by limit checks/tests)."""
        sigma = np.asarray(sigma, dtype=float)
        lower = numkit.cholesky(sigma)
        if center is None:
            center = default_center(sigma.shape[0])
        center = np.asarray(center, dtype=float)
        if center.shape != (sigma.shape[0],):
            raise InvalidParameter("center length does not match metric dimension")
        return cls(sigma=sigma, lower=lower, center=center, shrinkage=shrinkage, ridge=ridge)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]


def estimate_metric(
    u: np.ndarray,
    shrinkage: float,
    ridge: float,
    center: np.ndarray | None = None,
) -> CopulaMetric:
    """Shrinkage covariance metric from copula residuals.

    sigma = (1 - shrinkage) * Cov(u) + shrinkage * tr(Cov(u)) * I / p + ridge * I

    with the mean-centered, 1/(N-1)-normalized sample covariance. The ridge
    keeps the metric strictly positive definite even for rank-deficient
    covariances.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise InvalidParameter("copula residuals must be a 2-D (N, p) array")
    n, p = u.shape
    if n < 2:
        raise TooFewSamples("need at least 2 copula residuals to estimate the metric")
    if not (0.0 <= shrinkage <= 1.0):
        raise InvalidParameter(f"shrinkage must lie in [0, 1], got {shrinkage}")
    if not ridge > 0.0:
        raise InvalidParameter(f"ridge must be positive, got {ridge}")
    centered_u = u - u.mean(axis=0)
    cov = centered_u.T @ centered_u / (n - 1)
    sigma = (1.0 - shrinkage) * cov + (shrinkage * np.trace(cov) / p + ridge) * np.eye(p)
    sigma = 0.5 * (sigma + sigma.T)
    lower = numkit.cholesky(sigma)
    if center is None:
        center = default_center(p)
    center = np.asarray(center, dtype=float)
    if center.shape != (p,):
        raise InvalidParameter("center length does not match metric dimension")
    return CopulaMetric(
        sigma=sigma, lower=lower, center=center, shrinkage=float(shrinkage), ridge=float(ridge)
    )


def centered(metric: CopulaMetric, u: np.ndarray):
    """Centered residual s = u - u0 and the solved direction sigma^{-1} s."""
    s = np.asarray(u, dtype=float) - metric.center
    return s, numkit.solve_spd(metric.lower, s)


def radial(metric: CopulaMetric, u: np.ndarray) -> float:
    """Squared Mahalanobis distance rho = s^T sigma^{-1} s, never negative."""
    s, sinv = centered(metric, u)
    return max(float(s @ sinv), 0.0)


def centered_batch(metric: CopulaMetric, u: np.ndarray):
    """Vectorized ``centered`` plus radial values for rows of ``u``.

    Returns (S, SInv, rho) with shapes (N, p), (N, p), (N,).
    """
    u = np.asarray(u, dtype=float)
    s = u - metric.center
    sinv = numkit.solve_spd(metric.lower, s.T).T
    rho = np.maximum(np.einsum("np,np->n", s, sinv), 0.0)
    return s, sinv, rho
