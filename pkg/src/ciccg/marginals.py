"""Smooth marginal CDF/PDF estimators for residual components.

Two estimator families are supported: a Gaussian-kernel KDE fitted per
component, and a fixed parametric Student's-t marginal. Either is frozen into
an immutable snapshot that maps residual vectors into the open unit cube with
hard clipping away from the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import numkit
from .exceptions import InvalidParameter, TooFewSamples

#: Relative bandwidth floor applied when a component has (near) zero spread.
BANDWIDTH_FLOOR = 1e-6


def silverman_bandwidth(samples: np.ndarray) -> float:
    """Silverman's rule 1.06 * std * n^(-1/5), floored for degenerate data."""
    samples = np.asarray(samples, dtype=float)
    sigma = float(np.std(samples, ddof=1)) if samples.size > 1 else 0.0
    bw = 1.06 * sigma * samples.size ** (-0.2)
    return max(bw, BANDWIDTH_FLOOR * (1.0 + sigma))


@dataclass(frozen=True)
class KdeMarginal:
    """Gaussian-kernel KDE for one residual component."""

    samples: np.ndarray
    bandwidth: float

    def cdf(self, e):
        e = np.asarray(e, dtype=float)
        z = (e[..., None] - self.samples) / self.bandwidth
        return stats.norm.cdf(z).mean(axis=-1)

    def pdf(self, e):
        e = np.asarray(e, dtype=float)
        z = (e[..., None] - self.samples) / self.bandwidth
        return stats.norm.pdf(z).mean(axis=-1) / self.bandwidth


@dataclass(frozen=True)
class StudentTMarginal:
    """Parametric Student's-t marginal for one residual component."""

    dof: float
    scale: float

    def cdf(self, e):
        return numkit.student_t_cdf(e, self.dof, self.scale)

    def pdf(self, e):
        return numkit.student_t_pdf(e, self.dof, self.scale)


@dataclass(frozen=True)
class FrozenMarginals:
    """Immutable per-component marginal estimators plus the clipping level.

    Instances are frozen for the duration of a conjugate-gradient block; the
    optimizer replaces the whole snapshot when it refreshes estimators.
    """

    components: tuple
    clip_eps: float

    def __post_init__(self) -> None:
        if not self.components:
            raise InvalidParameter("need at least one marginal component")
        if not (0.0 < self.clip_eps < 0.5):
            raise InvalidParameter(f"clip epsilon must lie in (0, 0.5), got {self.clip_eps}")

    @property
    def dim(self) -> int:
        return len(self.components)

    def _stack(self, e: np.ndarray, attr: str) -> np.ndarray:
        cols = [getattr(comp, attr)(e[..., i]) for i, comp in enumerate(self.components)]
        return np.stack(cols, axis=-1)

    def transform(self, e: np.ndarray):
        """Map residuals into (0, 1)^p via the marginal CDFs, with clipping.

        Returns the clipped copula residuals and a boolean mask marking the
        coordinates where clipping was active.
        """
        e = np.asarray(e, dtype=float)
        if e.shape[-1] != self.dim:
            raise InvalidParameter(
                f"residual width {e.shape[-1]} does not match {self.dim} marginals"
            )
        raw = self._stack(e, "cdf")
        lo, hi = self.clip_eps, 1.0 - self.clip_eps
        clipped = (raw < lo) | (raw > hi)
        return np.clip(raw, lo, hi), clipped

    def density_diag(self, e: np.ndarray) -> np.ndarray:
        """Raw marginal densities (f_1(e_1), ..., f_p(e_p)) at the residuals.

        Entries are reported unmasked even where the CDF transform clipped;
        callers that hold clipped coordinates fixed apply the clip mask
        themselves.
        """
        e = np.asarray(e, dtype=float)
        if e.shape[-1] != self.dim:
            raise InvalidParameter(
                f"residual width {e.shape[-1]} does not match {self.dim} marginals"
            )
        return self._stack(e, "pdf")


def fit_kde(samples: np.ndarray, clip_eps: float = 1e-6) -> FrozenMarginals:
    """Fit per-component Gaussian-kernel KDE marginals to residual samples.

    ``samples`` has shape (N, p) with N >= 2. Components with zero spread fall
    back to the bandwidth floor so densities stay finite.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise InvalidParameter("samples must be a 2-D (N, p) array")
    if samples.shape[0] < 2:
        raise TooFewSamples("need at least 2 samples per component")
    comps = tuple(
        KdeMarginal(samples=samples[:, i].copy(), bandwidth=silverman_bandwidth(samples[:, i]))
        for i in range(samples.shape[1])
    )
    return FrozenMarginals(components=comps, clip_eps=clip_eps)


def fit_parametric_t(
    dof: float, scale: float, dim: int, clip_eps: float = 1e-6
) -> FrozenMarginals:
    """Fixed Student's-t marginals shared by all ``dim`` components."""
    if dim < 1:
        raise InvalidParameter("dim must be >= 1")
    if not (dof > 0 and scale > 0):
        raise InvalidParameter("degrees of freedom and scale must be positive")
    comps = tuple(StudentTMarginal(dof=float(dof), scale=float(scale)) for _ in range(dim))
    return FrozenMarginals(components=comps, clip_eps=clip_eps)
