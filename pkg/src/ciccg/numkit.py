"""Dense numeric kernel: seeded substreams, SPD factorization and solves,
Student's-t distribution functions, and empirical quantiles.

Matrices are plain float64 numpy arrays, Cholesky factors are lower-triangular
arrays, and random streams are ``numpy.random.Generator`` instances derived
from ``SeedSequence`` spawn keys so that Monte Carlo substreams are
reproducible and non-overlapping regardless of scheduling.
"""

from __future__ import annotations

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from .exceptions import (
    DimensionMismatch,
    EmptyInput,
    InvalidParameter,
    NotPositiveDefinite,
)

_SYMMETRY_TOL = 1e-12


def spawn_rng(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for the substream addressed by ``(seed, *path)``.

    The same ``(seed, path)`` pair always yields an identical stream, and
    distinct paths yield statistically independent streams, which is what the
    per-run Monte Carlo substreams rely on.
    """
    key = tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor L of a symmetric positive definite m.

    Raises
    ------
    InvalidParameter
        If ``m`` is not square, not finite, or not symmetric within 1e-12.
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParameter(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidParameter("matrix entries must be finite")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if float(np.max(np.abs(m - m.T), initial=0.0)) > _SYMMETRY_TOL * scale:
        raise InvalidParameter("matrix must be symmetric within 1e-12")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc


def solve_spd(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (L L^T) x = b given the lower Cholesky factor L.

    ``b`` may be a vector or a matrix of stacked right-hand-side columns.
    """
    lower = np.asarray(lower, dtype=float)
    b = np.asarray(b, dtype=float)
    if lower.ndim != 2 or lower.shape[0] != lower.shape[1]:
        raise DimensionMismatch(f"factor must be square, got shape {lower.shape}")
    if b.shape[0] != lower.shape[0]:
        raise DimensionMismatch(
            f"right-hand side of length {b.shape[0]} does not match factor size {lower.shape[0]}"
        )
    y = solve_triangular(lower, b, lower=True)
    return solve_triangular(lower.T, y, lower=False)


def _check_t_params(nu: float, scale: float) -> None:
    if not (np.isfinite(nu) and nu > 0):
        raise InvalidParameter(f"degrees of freedom must be positive, got {nu}")
    if not (np.isfinite(scale) and scale > 0):
        raise InvalidParameter(f"scale must be positive, got {scale}")


def student_t_cdf(x, nu: float, scale: float = 1.0):
    """CDF of the Student's-t distribution with ``nu`` DoF and a scale factor."""
    _check_t_params(nu, scale)
    return stats.t.cdf(x, df=nu, loc=0.0, scale=scale)


def student_t_pdf(x, nu: float, scale: float = 1.0):
    """PDF of the Student's-t distribution with ``nu`` DoF and a scale factor."""
    _check_t_params(nu, scale)
    return stats.t.pdf(x, df=nu, loc=0.0, scale=scale)


def student_t_quantile(p, nu: float, scale: float = 1.0):
    """Quantile (inverse CDF) of the Student's-t distribution."""
    _check_t_params(nu, scale)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise InvalidParameter("quantile probabilities must lie strictly in (0, 1)")
    out = stats.t.ppf(p, df=nu, loc=0.0, scale=scale)
    return float(out) if out.ndim == 0 else out


def empirical_quantile(values, p: float) -> float:
    """Linear-interpolation quantile on the order statistics.

    The quantile sits at fractional position ``(n - 1) * p`` of the sorted
    values, interpolating linearly between neighbours.
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise EmptyInput("cannot take a quantile of an empty sequence")
    if not (0.0 <= p <= 1.0):
        raise InvalidParameter(f"quantile level must lie in [0, 1], got {p}")
    return float(np.quantile(values, p))
