"""Multi-choice knapsack over a shared budget grid.

Each campaign picks one budget level from an evenly spaced grid; the sum of
the chosen levels must stay under a daily cap.  The dynamic program maximizes
the total of the per-campaign reward rows and backtracks one optimal
assignment.  ``brute_force_mck`` enumerates every combination and exists only
as a test oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleAllocationError

_REL_TOL = 1e-9


@dataclass(frozen=True)
class BudgetGrid:
    """Evenly spaced discretization of the feasible daily budget."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("budget grid needs at least two levels")
        diffs = np.diff(values)
        if np.any(diffs <= 0):
            raise ValueError("budget grid must be strictly ascending")
        scale = max(abs(values[-1] - values[0]), 1.0)
        if np.max(np.abs(diffs - diffs[0])) > _REL_TOL * scale:
            raise ValueError("budget grid must be evenly spaced")

    @classmethod
    def linspace(cls, min_budget: float, max_budget: float, granularity: int) -> "BudgetGrid":
        if granularity < 2:
            raise ValueError("granularity must be at least 2")
        if not max_budget > min_budget:
            raise ValueError("max_budget must exceed min_budget")
        return cls(np.linspace(min_budget, max_budget, granularity))

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def min_budget(self) -> float:
        return float(self.values[0])

    @property
    def max_budget(self) -> float:
        return float(self.values[-1])

    @property
    def step(self) -> float:
        return float(self.values[1] - self.values[0])


@dataclass(frozen=True)
class RewardTable:
    """Predicted reward per campaign per grid level, shape (N, H)."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        object.__setattr__(self, "rows", rows)
        if not np.all(np.isfinite(rows)):
            raise ValueError("reward table entries must be finite")

    @property
    def n_campaigns(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True)
class Allocation:
    """One day's budget choice per campaign plus its predicted total value."""

    per_campaign_budget: list[float] = field(default_factory=list)
    total_value: float = 0.0

    @property
    def total_budget(self) -> float:
        return float(sum(self.per_campaign_budget))


def _max_index_sum(grid: BudgetGrid, n: int, cap: float) -> int:
    """Largest total grid-index sum whose budget total fits under the cap."""
    tol = _REL_TOL * max(abs(cap), 1.0)
    slack = cap + tol - n * grid.min_budget
    if slack < 0:
        raise InfeasibleAllocationError(
            f"cap {cap} cannot cover {n} campaigns at minimum budget {grid.min_budget}"
        )
    return min(n * (grid.size - 1), int(slack / grid.step))


def solve_mck(table: RewardTable, grid: BudgetGrid, cap: float) -> Allocation:
    """Exact DP solution of the grid-restricted allocation problem.

    State is the total of the chosen grid indices, so budget arithmetic
    reduces to index arithmetic on the evenly spaced grid.  Ties are broken
    toward the smallest budget: each campaign keeps the lowest grid level
    achieving the running maximum, and the final sweep keeps the smallest
    feasible total.
    """
    rows = table.rows
    if rows.shape[1] != grid.size:
        raise ValueError("reward rows must align with the grid")
    n, h = rows.shape
    s_max = _max_index_sum(grid, n, cap)

    best = np.full(s_max + 1, -np.inf)
    best[0] = 0.0
    choice = np.zeros((n, s_max + 1), dtype=np.int64)
    for j in range(n):
        new_best = np.full(s_max + 1, -np.inf)
        for x in range(min(h, s_max + 1)):
            cand = best[: s_max + 1 - x] + rows[j, x]
            seg = new_best[x:]
            better = cand > seg
            seg[better] = cand[better]
            choice[j, x:][better] = x
        best = new_best

    best_s = int(np.argmax(best))  # first occurrence = smallest total on ties
    if not np.isfinite(best[best_s]):
        raise InfeasibleAllocationError("no reachable allocation under the cap")

    budgets = [0.0] * n
    s = best_s
    for j in range(n - 1, -1, -1):
        x = int(choice[j, s])
        budgets[j] = float(grid.values[x])
        s -= x
    return Allocation(per_campaign_budget=budgets, total_value=float(best[best_s]))


def brute_force_mck(table: RewardTable, grid: BudgetGrid, cap: float) -> Allocation:
    """Exhaustive enumeration oracle for small instances (tests only)."""
    rows = table.rows
    n, h = rows.shape
    if n > 5 or h > 15:
        raise ValueError(f"instance too large for enumeration (N={n}, H={h})")
    _max_index_sum(grid, n, cap)  # surfaces infeasible caps identically

    tol = _REL_TOL * max(abs(cap), 1.0)
    best_value = -np.inf
    best_combo = None
    for combo in itertools.product(range(h), repeat=n):
        total = float(np.sum(grid.values[list(combo)]))
        if total > cap + tol:
            continue
        value = 0.0
        for j, x in enumerate(combo):
            value += rows[j, x]
        if value > best_value:
            best_value = value
            best_combo = combo
    if best_combo is None:
        raise InfeasibleAllocationError("no reachable allocation under the cap")
    budgets = [float(grid.values[x]) for x in best_combo]
    return Allocation(per_campaign_budget=budgets, total_value=float(best_value))
