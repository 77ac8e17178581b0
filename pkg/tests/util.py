"""Shared fixtures and independent reference implementations for the tests.

The GP reference evaluates the textbook predictive equations with a plain
dense solve (no Cholesky), so it exercises a different numerical path than
the library while regularizing the same matrix.
"""

from __future__ import annotations

import numpy as np

from adalloc.gp import GpDataset, RbfKernelParams
from adalloc.knapsack import BudgetGrid

BASE_JITTER = 1e-8


def dense_gp_reference(
    data: GpDataset, params: RbfKernelParams, points, input_scale: float = 1.0
):
    """Predictive mean/variance via an explicit dense linear solve."""
    xs = np.asarray(points, dtype=float).ravel() / input_scale
    if data.size == 0:
        return np.zeros(xs.size), np.full(xs.size, params.signal_variance)
    x = data.inputs / input_scale
    sq = (x[:, None] - x[None, :]) ** 2
    k = params.signal_variance * np.exp(-sq / (2 * params.length_scale**2))
    w = data.weights if data.weights is not None else np.ones(data.size)
    a = k + np.diag(data.noise_variance * w) + BASE_JITTER * params.signal_variance * np.eye(data.size)
    k_star = params.signal_variance * np.exp(
        -((x[:, None] - xs[None, :]) ** 2) / (2 * params.length_scale**2)
    )
    solved = np.linalg.solve(a, np.column_stack([data.targets, k_star]))
    means = k_star.T @ solved[:, 0]
    variances = params.signal_variance - np.sum(k_star * solved[:, 1:], axis=0)
    return means, variances


def random_noisy_dataset(rng: np.random.Generator, max_size: int = 30) -> GpDataset:
    """Random dataset with enough observation noise to stay well conditioned."""
    n = int(rng.integers(1, max_size + 1))
    return GpDataset(
        inputs=rng.uniform(0.0, 5.0, size=n),
        targets=rng.uniform(-5.0, 10.0, size=n),
        noise_variance=float(rng.uniform(0.01, 1.0)),
        weights=None if rng.random() < 0.5 else rng.uniform(0.5, 4.0, size=n),
    )


def spaced_noiseless_dataset(rng: np.random.Generator, length_scale: float = 1.0) -> GpDataset:
    """Noiseless dataset whose inputs sit >= 1.5 length scales apart.

    With clustered inputs a noiseless kernel matrix is numerically singular
    and the stabilizing jitter necessarily perturbs interpolation; spacing
    keeps the matrix well conditioned so interpolation is testable at 1e-6.
    """
    n = int(rng.integers(2, 12))
    gaps = rng.uniform(1.5, 3.0, size=n) * length_scale
    inputs = np.cumsum(gaps)
    targets = rng.uniform(-5.0, 5.0, size=n)
    return GpDataset(inputs=inputs, targets=targets, noise_variance=0.0)


def random_mck_instance(rng: np.random.Generator):
    """Random small knapsack instance with a feasible cap."""
    n = int(rng.integers(1, 5))
    h = int(rng.integers(2, 13))
    min_budget = float(rng.choice([0.0, rng.uniform(0.0, 2.0)]))
    max_budget = min_budget + float(rng.uniform(1.0, 10.0))
    grid = BudgetGrid.linspace(min_budget, max_budget, h)
    rewards = rng.uniform(-1.0, 10.0, size=(n, h))
    cap = float(rng.uniform(n * min_budget, n * max_budget * 1.1))
    return rewards, grid, cap
