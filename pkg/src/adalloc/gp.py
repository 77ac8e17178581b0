"""Gaussian-process regression over the budget axis.

Zero-mean GP with an RBF kernel, exact inference through a Cholesky
factorization of ``K + noise_variance * diag(weights)``.  Per-point weights
inflate the observation noise of individual samples (used by the discounting
baseline).  Inputs may be normalized by a caller-supplied scale so a single
length scale stays meaningful across campaigns with very different budget
ranges; targets are never rescaled.

``saturate_mean`` clamps the predictive mean above the best observed budget
to the best predicted value, removing the zero-mean prior's pessimism at
high, unexplored budget levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import NumericalInstabilityError
from .knapsack import BudgetGrid

_BASE_JITTER = 1e-8
_MAX_JITTER = 1e-2


@dataclass(frozen=True)
class RbfKernelParams:
    """Signal variance and length scale of the RBF kernel."""

    signal_variance: float = 1.0
    length_scale: float = 1.0

    def __post_init__(self):
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")


@dataclass(frozen=True)
class GpDataset:
    """Training data: budget/cost inputs, reward targets, noise model."""

    inputs: np.ndarray
    targets: np.ndarray
    noise_variance: float = 0.0
    weights: np.ndarray | None = None

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float).ravel()
        targets = np.asarray(self.targets, dtype=float).ravel()
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        if inputs.size != targets.size:
            raise ValueError("inputs and targets must have equal length")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float).ravel()
            object.__setattr__(self, "weights", weights)
            if weights.size != inputs.size:
                raise ValueError("weights must match inputs in length")
            if np.any(weights <= 0):
                raise ValueError("weights must be positive")

    @property
    def size(self) -> int:
        return int(self.inputs.size)


@dataclass(frozen=True)
class GpPosterior:
    """Fitted GP state ready for repeated predictions.

    Holds copies of the (normalized) training inputs and targets together
    with the lower Cholesky factor of the regularized covariance matrix.
    An empty posterior predicts the prior: mean 0, variance signal_variance.
    """

    kernel: RbfKernelParams
    input_scale: float = 1.0
    train_inputs: np.ndarray = field(default_factory=lambda: np.empty(0))
    train_targets: np.ndarray = field(default_factory=lambda: np.empty(0))
    chol_lower: np.ndarray | None = None
    alpha: np.ndarray | None = None

    @property
    def size(self) -> int:
        return int(self.train_inputs.size)


def kernel_eval(a: float, b: float, params: RbfKernelParams) -> float:
    """RBF covariance between two budget values."""
    d = float(a) - float(b)
    return params.signal_variance * float(np.exp(-(d * d) / (2.0 * params.length_scale**2)))


def _kernel_matrix(xa: np.ndarray, xb: np.ndarray, params: RbfKernelParams) -> np.ndarray:
    d = xa[:, None] - xb[None, :]
    return params.signal_variance * np.exp(-(d * d) / (2.0 * params.length_scale**2))


def cholesky_with_jitter(matrix: np.ndarray, signal_variance: float) -> np.ndarray:
    """Lower Cholesky factor, escalating diagonal jitter until it succeeds.

    Jitter starts at 1e-8 * signal_variance and grows tenfold up to
    1e-2 * signal_variance before giving up.
    """
    jitter = _BASE_JITTER * signal_variance
    limit = _MAX_JITTER * signal_variance
    eye = np.eye(matrix.shape[0])
    while True:
        try:
            return cholesky(matrix + jitter * eye, lower=True)
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > limit * (1.0 + 1e-12):
                raise NumericalInstabilityError(
                    "covariance factorization failed after maximum jitter escalation"
                ) from None


def fit(data: GpDataset, params: RbfKernelParams, input_scale: float = 1.0) -> GpPosterior:
    """Fit the exact GP posterior; an empty dataset yields the prior."""
    if not input_scale > 0:
        raise ValueError("input_scale must be positive")
    if data.size == 0:
        return GpPosterior(kernel=params, input_scale=input_scale)

    x = data.inputs / input_scale
    y = data.targets.copy()
    k = _kernel_matrix(x, x, params)
    w = data.weights if data.weights is not None else np.ones(data.size)
    k[np.diag_indices_from(k)] += data.noise_variance * w
    lower = cholesky_with_jitter(k, params.signal_variance)
    alpha = cho_solve((lower, True), y)
    return GpPosterior(
        kernel=params,
        input_scale=input_scale,
        train_inputs=x,
        train_targets=y,
        chol_lower=lower,
        alpha=alpha,
    )


def predict_points(post: GpPosterior, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predictive mean and variance at raw (unnormalized) budget values."""
    xs = np.asarray(points, dtype=float).ravel() / post.input_scale
    prior_var = np.full(xs.size, post.kernel.signal_variance)
    if post.size == 0:
        return np.zeros(xs.size), prior_var
    k_star = _kernel_matrix(post.train_inputs, xs, post.kernel)
    means = k_star.T @ post.alpha
    v = solve_triangular(post.chol_lower, k_star, lower=True)
    variances = prior_var - np.sum(v * v, axis=0)
    return means, np.maximum(variances, 0.0)


def predict(post: GpPosterior, grid: BudgetGrid) -> tuple[np.ndarray, np.ndarray]:
    """Predictive means and standard deviations aligned to the grid."""
    means, variances = predict_points(post, grid.values)
    return means, np.sqrt(variances)


def posterior_covariance(post: GpPosterior, points: np.ndarray) -> np.ndarray:
    """Full predictive covariance matrix at raw budget values."""
    xs = np.asarray(points, dtype=float).ravel() / post.input_scale
    k_ss = _kernel_matrix(xs, xs, post.kernel)
    if post.size == 0:
        return k_ss
    k_star = _kernel_matrix(post.train_inputs, xs, post.kernel)
    v = solve_triangular(post.chol_lower, k_star, lower=True)
    return k_ss - v.T @ v


def saturate_mean(
    means: np.ndarray, grid: BudgetGrid, b_max: float, n_max: float
) -> np.ndarray:
    """Replace means above the best observed budget with the best prediction."""
    out = np.asarray(means, dtype=float).copy()
    out[grid.values > b_max] = n_max
    return out
