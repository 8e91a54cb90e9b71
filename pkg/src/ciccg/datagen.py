"""Synthetic benchmark generator: nonlinear target mapping plus dependent
heavy-tailed noise from an equicorrelated multivariate Student's-t model.

Noise is drawn through the Gaussian scale mixture: correlated normals from the
Cholesky factor of the equicorrelation matrix divided by the square root of an
independent chi-square(dof)/dof variate shared across components, which yields
t marginals coupled by a Student's-t copula.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import numkit
from .exceptions import DimensionMismatch, InvalidParameter
from .model import Batch

# Substream layout: (seed, 0) draws inputs and clean targets, shared by every
# Monte Carlo run; (seed, 1, run, 0) draws the run's initialization and
# (seed, 1, run, 1) the run's training noise.
DATA_STREAM = 0
RUN_STREAM = 1
INIT_SUBSTREAM = 0
NOISE_SUBSTREAM = 1


@dataclass(frozen=True)
class NoiseSpec:
    """Student's-t noise: tail index, scale, pairwise dependence, dimension."""

    dof: float = 2.2
    scale: float = 0.35
    rho: float = 0.85
    dim: int = 3

    def __post_init__(self) -> None:
        if not self.dof > 0:
            raise InvalidParameter(f"degrees of freedom must be positive, got {self.dof}")
        if not self.scale > 0:
            raise InvalidParameter(f"noise scale must be positive, got {self.scale}")
        if not (0.0 <= self.rho < 1.0):
            raise InvalidParameter(f"dependence strength must lie in [0, 1), got {self.rho}")
        if self.dim < 1:
            raise InvalidParameter("noise dimension must be >= 1")


@dataclass(frozen=True)
class Dataset:
    """Noisy training batch plus a clean test batch and the drawn noise."""

    train: Batch
    test: Batch
    train_clean: np.ndarray
    noise: np.ndarray


def equicorrelation(dim: int, rho: float) -> np.ndarray:
    """Constant-correlation matrix (1 - rho) I + rho 11^T."""
    if not (0.0 <= rho < 1.0):
        raise InvalidParameter(f"dependence strength must lie in [0, 1), got {rho}")
    return (1.0 - rho) * np.eye(dim) + rho * np.ones((dim, dim))


def benchmark_targets(x: np.ndarray) -> np.ndarray:
    """Nonlinear 3-to-3 benchmark mapping with cross-input interactions."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise DimensionMismatch("benchmark mapping expects 3-dimensional inputs")
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    d1 = np.sin(1.2 * x1 * x2) + 0.2 * np.cos(2.0 * x3)
    d2 = np.cos(1.0 * x2 * x3) + 0.3 * np.sin(1.5 * x1)
    d3 = x1 * x1 - x3 + 0.15 * np.sin(2.2 * x2)
    return np.stack([d1, d2, d3], axis=-1)


def sample_noise(spec: NoiseSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n vectors of scaled equicorrelated multivariate-t noise."""
    if n < 1:
        raise InvalidParameter("need at least one noise draw")
    lower = numkit.cholesky(equicorrelation(spec.dim, spec.rho))
    z = rng.standard_normal((n, spec.dim)) @ lower.T
    mix = rng.chisquare(spec.dof, size=n) / spec.dof
    return spec.scale * z / np.sqrt(mix)[:, None]


def make_dataset(
    seed: int,
    noise: NoiseSpec,
    n_train: int = 600,
    n_test: int = 600,
    run: int = 0,
) -> Dataset:
    """Benchmark dataset: noisy training targets, clean test targets.

    The inputs and clean targets depend only on ``seed``; the noise
    realization additionally depends on ``run`` so Monte Carlo repetitions
    share the clean data while perturbing the training targets independently.
    """
    if noise.dim != 3:
        raise DimensionMismatch("benchmark mapping is 3-dimensional")
    rng_data = numkit.spawn_rng(seed, DATA_STREAM)
    x_train = rng_data.uniform(-1.0, 1.0, size=(n_train, 3))
    x_test = rng_data.uniform(-1.0, 1.0, size=(n_test, 3))
    d_train = benchmark_targets(x_train)
    d_test = benchmark_targets(x_test)
    rng_noise = numkit.spawn_rng(seed, RUN_STREAM, run, NOISE_SUBSTREAM)
    eps = sample_noise(noise, n_train, rng_noise)
    return Dataset(
        train=Batch(x_train, d_train + eps),
        test=Batch(x_test, d_test),
        train_clean=d_train,
        noise=eps,
    )


def init_rng(seed: int, run: int) -> np.random.Generator:
    """Substream for the run's parameter initialization."""
    return numkit.spawn_rng(seed, RUN_STREAM, run, INIT_SUBSTREAM)


def dump_dataset_csv(dataset: Dataset, path_train, path_test) -> None:
    """Write train/test splits with columns x1..x3, d1..d3 (clean), d1n..d3n."""
    header = ["x1", "x2", "x3", "d1", "d2", "d3", "d1n", "d2n", "d3n"]

    def rows(inputs, clean, noisy):
        for x, d, dn in zip(inputs, clean, noisy):
            yield [repr(float(v)) for v in (*x, *d, *dn)]

    with open(path_train, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows(dataset.train.inputs, dataset.train_clean, dataset.train.targets))
    with open(path_test, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows(dataset.test.inputs, dataset.test.targets, dataset.test.targets))
