"""Single-hidden-layer tanh perceptron over a flat parameter vector.

The parameter layout is fixed so optimizer state serializes stably:
first-layer weights (row-major, hidden x input), first-layer biases,
second-layer weights (output x hidden), second-layer biases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, InvalidParameter


@dataclass(frozen=True)
class MlpSpec:
    """Network shape: input dimension, hidden width, output dimension."""

    input_dim: int
    hidden: int
    output_dim: int

    def __post_init__(self) -> None:
        for name in ("input_dim", "hidden", "output_dim"):
            if getattr(self, name) < 1:
                raise InvalidParameter(f"{name} must be >= 1")

    @property
    def n_params(self) -> int:
        d, h, p = self.input_dim, self.hidden, self.output_dim
        return d * h + h + h * p + p


@dataclass(frozen=True)
class Batch:
    """Paired inputs (N, d) and targets (N, p)."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        inputs = np.asarray(self.inputs, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if inputs.ndim != 2 or targets.ndim != 2:
            raise DimensionMismatch("inputs and targets must be 2-D arrays")
        if inputs.shape[0] != targets.shape[0]:
            raise DimensionMismatch(
                f"{inputs.shape[0]} inputs paired with {targets.shape[0]} targets"
            )
        if not (np.all(np.isfinite(inputs)) and np.all(np.isfinite(targets))):
            raise InvalidParameter("batch entries must be finite")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]


def unpack(spec: MlpSpec, w: np.ndarray):
    """Split a flat parameter vector into (W1, b1, W2, b2) views."""
    w = np.asarray(w, dtype=float)
    if w.shape != (spec.n_params,):
        raise DimensionMismatch(
            f"parameter vector of shape {w.shape} does not match spec ({spec.n_params},)"
        )
    d, h, p = spec.input_dim, spec.hidden, spec.output_dim
    i = 0
    w1 = w[i : i + h * d].reshape(h, d)
    i += h * d
    b1 = w[i : i + h]
    i += h
    w2 = w[i : i + p * h].reshape(p, h)
    i += p * h
    b2 = w[i : i + p]
    return w1, b1, w2, b2


def init_parameters(spec: MlpSpec, rng: np.random.Generator) -> np.ndarray:
    """Uniform Glorot weights on +-sqrt(6 / (fan_in + fan_out)), zero biases."""
    d, h, p = spec.input_dim, spec.hidden, spec.output_dim
    w = np.zeros(spec.n_params)
    lim1 = np.sqrt(6.0 / (d + h))
    lim2 = np.sqrt(6.0 / (h + p))
    i = 0
    w[i : i + h * d] = rng.uniform(-lim1, lim1, size=h * d)
    i += h * d + h  # first-layer biases stay zero
    w[i : i + p * h] = rng.uniform(-lim2, lim2, size=p * h)
    return w


def forward(spec: MlpSpec, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate y = W2 tanh(W1 x + b1) + b2 for one input or a batch."""
    w1, b1, w2, b2 = unpack(spec, w)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise DimensionMismatch(
            f"input of shape {x.shape} does not match input_dim {spec.input_dim}"
        )
    y = np.tanh(x @ w1.T + b1) @ w2.T + b2
    return y[0] if single else y


def residuals(spec: MlpSpec, w: np.ndarray, batch: Batch) -> np.ndarray:
    """Per-sample residuals e_n = d_n - f(x_n; w), shape (N, p)."""
    if batch.targets.shape[1] != spec.output_dim:
        raise DimensionMismatch(
            f"targets of width {batch.targets.shape[1]} do not match output_dim {spec.output_dim}"
        )
    return batch.targets - forward(spec, w, batch.inputs)


def jacobian_transpose_product(
    spec: MlpSpec, w: np.ndarray, x: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """Exact J^T v at (x, w), where J = dy/dw, by reverse accumulation."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (spec.input_dim,):
        raise DimensionMismatch(f"input of shape {x.shape} does not match spec")
    if v.shape != (spec.output_dim,):
        raise DimensionMismatch(f"cotangent of shape {v.shape} does not match spec")
    return accumulate_jacobian_products(spec, w, x[None, :], v[None, :])


def accumulate_jacobian_products(
    spec: MlpSpec, w: np.ndarray, x: np.ndarray, v: np.ndarray
) -> np.ndarray:
    """Sum of per-sample products J_n^T v_n over the rows of ``x`` and ``v``.

    This is the backpropagation pass shared by every objective gradient.
    """
    w1, b1, w2, _ = unpack(spec, w)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.ndim != 2 or v.ndim != 2 or x.shape[0] != v.shape[0]:
        raise DimensionMismatch("inputs and cotangents must be matching 2-D stacks")
    if x.shape[1] != spec.input_dim or v.shape[1] != spec.output_dim:
        raise DimensionMismatch("row widths do not match the network spec")
    a = np.tanh(x @ w1.T + b1)  # (N, h)
    dz = (v @ w2) * (1.0 - a * a)  # (N, h)
    out = np.empty(spec.n_params)
    d, h, p = spec.input_dim, spec.hidden, spec.output_dim
    i = 0
    out[i : i + h * d] = (dz.T @ x).ravel()
    i += h * d
    out[i : i + h] = dz.sum(axis=0)
    i += h
    out[i : i + p * h] = (v.T @ a).ravel()
    i += p * h
    out[i : i + p] = v.sum(axis=0)
    return out
