"""Robust multivariate regression under dependent heavy-tailed noise.

The mixed copula-correntropy objective blends marginal correntropy robustness
with a dependence penalty measured in copula-transformed residual space, and
is minimized by a safeguarded PRP+ nonlinear conjugate-gradient method with
strong Wolfe line search and periodic estimator refresh. The package ships the
learning machinery, the baseline robust losses (MSE, Huber, Student's-t NLL,
Gaussian-kernel correntropy), a synthetic dependent heavy-tailed benchmark,
and a Monte Carlo experiment CLI.
"""

from .copula import CopulaMetric, estimate_metric
from .datagen import Dataset, NoiseSpec, benchmark_targets, make_dataset, sample_noise
from .estimator import CicCgRegressor
from .harness import ExperimentConfig, run_monte_carlo, run_sweep
from .marginals import FrozenMarginals, fit_kde, fit_parametric_t
from .model import Batch, MlpSpec
from .objectives import (
    CicConfig,
    LossSpec,
    baseline_value_and_gradient,
    cic_value,
    cic_value_and_gradient,
)
from .optimizer import CgConfig, RunResult, run

__version__ = "0.1.0"

__all__ = [
    "Batch",
    "CgConfig",
    "CicCgRegressor",
    "CicConfig",
    "CopulaMetric",
    "Dataset",
    "ExperimentConfig",
    "FrozenMarginals",
    "LossSpec",
    "MlpSpec",
    "NoiseSpec",
    "RunResult",
    "baseline_value_and_gradient",
    "benchmark_targets",
    "cic_value",
    "cic_value_and_gradient",
    "estimate_metric",
    "fit_kde",
    "fit_parametric_t",
    "make_dataset",
    "run",
    "run_monte_carlo",
    "run_sweep",
    "sample_noise",
]
