"""Oracle allocation, regret accounting, and efficiency metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .knapsack import Allocation, BudgetGrid, RewardTable, solve_mck
from .sim import PowerLawModel, expected_reward


@dataclass(frozen=True)
class DailyMetrics:
    """Per-day accounting for one experiment run."""

    day: int
    budgets: list[float]
    costs: list[float]
    rewards: list[float]
    oracle_value: float
    policy_value: float
    regret: float
    realized_regret: float
    cum_clicks: float
    cum_regret: float
    running_cpc: float | None


def oracle_allocate(
    true_models: list[PowerLawModel], grid: BudgetGrid, cap: float
) -> Allocation:
    """Optimal grid allocation under full knowledge of the reward curves."""
    rows = np.array([m.alpha * grid.values**m.omega for m in true_models])
    return solve_mck(RewardTable(rows), grid, cap)


def instantaneous_regret(
    true_models: list[PowerLawModel],
    oracle_alloc: Allocation,
    policy_alloc: Allocation,
) -> float:
    """Expected-value gap between the oracle's and the policy's budgets.

    Both allocations are scored on the noise-free reward curves at their
    allocated budgets, so the gap is nonnegative whenever both used the
    same grid and cap.
    """
    oracle_value = sum(
        expected_reward(m, b) for m, b in zip(true_models, oracle_alloc.per_campaign_budget)
    )
    policy_value = sum(
        expected_reward(m, b) for m, b in zip(true_models, policy_alloc.per_campaign_budget)
    )
    return oracle_value - policy_value


def cpc_metric(history) -> float | None:
    """Group-level cost per click: total cost over total clicks.

    ``history`` is any iterable of objects with ``cost`` and ``reward``
    attributes (clicks); returns None when no clicks were observed.
    """
    total_cost = 0.0
    total_clicks = 0.0
    for item in history:
        total_cost += item.cost
        total_clicks += item.reward
    if total_clicks <= 0:
        return None
    return total_cost / total_clicks


def pseudo_conversion(clicks: list[float], conversions: list[float], day: int) -> float:
    """Clicks over the trailing 7-day window scaled by its conversion rate.

    The window covers days ``day-6 .. day`` inclusive (clamped at the series
    start).  Zero clicks in the window yield 0.
    """
    if day < 0 or day >= len(clicks):
        raise ValueError("day outside the series")
    start = max(day - 6, 0)
    window_clicks = float(np.sum(clicks[start : day + 1]))
    window_conv = float(np.sum(conversions[start : day + 1]))
    if window_clicks <= 0:
        return 0.0
    return window_clicks * (window_conv / window_clicks)
