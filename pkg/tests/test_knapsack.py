"""Knapsack DP against the enumeration oracle and its structural properties."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adalloc.errors import InfeasibleAllocationError
from adalloc.knapsack import (
    Allocation,
    BudgetGrid,
    RewardTable,
    brute_force_mck,
    solve_mck,
)

from util import random_mck_instance


# ---------------------------------------------------------------------------
# BudgetGrid validation
# ---------------------------------------------------------------------------

class TestBudgetGrid:
    def test_linspace_endpoints(self):
        grid = BudgetGrid.linspace(1.0, 5.0, 9)
        assert grid.min_budget == 1.0
        assert grid.max_budget == 5.0
        assert grid.size == 9
        assert grid.step == pytest.approx(0.5)

    def test_rejects_descending(self):
        with pytest.raises(ValueError):
            BudgetGrid(np.array([2.0, 1.0, 0.0]))

    def test_rejects_uneven_spacing(self):
        with pytest.raises(ValueError):
            BudgetGrid(np.array([0.0, 1.0, 3.0]))

    def test_rejects_tiny_granularity(self):
        with pytest.raises(ValueError):
            BudgetGrid.linspace(0.0, 1.0, 1)


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

class TestSolveExamples:
    def test_single_campaign_argmax(self):
        grid = BudgetGrid.linspace(0, 2, 3)
        alloc = solve_mck(RewardTable([[0.0, 3.0, 4.0]]), grid, cap=2.0)
        assert alloc.per_campaign_budget == [2.0]
        assert alloc.total_value == 4.0

    def test_two_campaign_tie_breaking(self):
        # (1,1) and (0,2) both reach value 5; the smallest per-campaign
        # budget wins during backtracking, giving (1,1).
        grid = BudgetGrid.linspace(0, 2, 3)
        table = RewardTable([[0.0, 3.0, 4.0], [0.0, 2.0, 5.0]])
        alloc = solve_mck(table, grid, cap=2.0)
        assert alloc.total_value == 5.0
        assert alloc.per_campaign_budget == [1.0, 1.0]

    def test_zero_cap_zero_min(self):
        grid = BudgetGrid.linspace(0, 2, 3)
        table = RewardTable([[1.0, 3.0, 4.0], [2.0, 2.0, 5.0]])
        alloc = solve_mck(table, grid, cap=0.0)
        assert alloc.per_campaign_budget == [0.0, 0.0]
        assert alloc.total_value == 3.0

    def test_infeasible_cap(self):
        grid = BudgetGrid.linspace(1.0, 2.0, 3)
        table = RewardTable([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
        with pytest.raises(InfeasibleAllocationError):
            solve_mck(table, grid, cap=1.5)

    def test_negative_rewards_allowed(self):
        grid = BudgetGrid.linspace(0, 2, 3)
        alloc = solve_mck(RewardTable([[-1.0, -3.0, -0.5]]), grid, cap=2.0)
        assert alloc.per_campaign_budget == [2.0]
        assert alloc.total_value == -0.5


class TestBruteForceExamples:
    def test_matches_solver_on_worked_examples(self):
        grid = BudgetGrid.linspace(0, 2, 3)
        for table, cap in [
            (RewardTable([[0.0, 3.0, 4.0]]), 2.0),
            (RewardTable([[0.0, 3.0, 4.0], [0.0, 2.0, 5.0]]), 2.0),
            (RewardTable([[1.0, 3.0, 4.0], [2.0, 2.0, 5.0]]), 0.0),
        ]:
            assert brute_force_mck(table, grid, cap).total_value == solve_mck(table, grid, cap).total_value

    def test_all_zero_rewards(self):
        grid = BudgetGrid.linspace(0, 1, 2)
        alloc = brute_force_mck(RewardTable(np.zeros((3, 2))), grid, cap=3.0)
        assert alloc.total_value == 0.0

    def test_slack_cap_row_argmax(self):
        grid = BudgetGrid.linspace(0, 2, 3)
        table = RewardTable([[0.0, 9.0, 4.0], [0.0, 2.0, 5.0]])
        alloc = brute_force_mck(table, grid, cap=10.0)
        assert alloc.per_campaign_budget == [1.0, 2.0]
        assert alloc.total_value == 14.0

    def test_size_guard(self):
        grid = BudgetGrid.linspace(0, 1, 2)
        with pytest.raises(ValueError):
            brute_force_mck(RewardTable(np.zeros((6, 2))), grid, cap=6.0)
        big_grid = BudgetGrid.linspace(0, 1, 16)
        with pytest.raises(ValueError):
            brute_force_mck(RewardTable(np.zeros((1, 16))), big_grid, cap=1.0)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

def _feasible(alloc: Allocation, grid: BudgetGrid, cap: float) -> bool:
    tol = 1e-9 * max(abs(cap), 1.0)
    if alloc.total_budget > cap + tol:
        return False
    return all(
        grid.min_budget <= b <= grid.max_budget
        and np.isclose((b - grid.min_budget) / grid.step, round((b - grid.min_budget) / grid.step))
        for b in alloc.per_campaign_budget
    )


def test_random_instances_match_brute_force():
    rng = np.random.default_rng(1234)
    for _ in range(200):
        rewards, grid, cap = random_mck_instance(rng)
        table = RewardTable(rewards)
        fast = solve_mck(table, grid, cap)
        slow = brute_force_mck(table, grid, cap)
        assert fast.total_value == slow.total_value
        assert _feasible(fast, grid, cap)


def test_relaxing_cap_never_hurts():
    rng = np.random.default_rng(77)
    for _ in range(50):
        rewards, grid, cap = random_mck_instance(rng)
        table = RewardTable(rewards)
        base = solve_mck(table, grid, cap).total_value
        relaxed = solve_mck(table, grid, cap + float(rng.uniform(0.0, 5.0))).total_value
        assert relaxed >= base


@settings(max_examples=50, deadline=None)
@given(
    shift=st.integers(min_value=-20, max_value=20),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_row_shift_moves_value_by_exactly_the_shift(shift, seed):
    # Integer-valued rewards keep every partial sum exact in floating point.
    rng = np.random.default_rng(seed)
    n, h = int(rng.integers(1, 4)), int(rng.integers(2, 8))
    rewards = rng.integers(-5, 20, size=(n, h)).astype(float)
    grid = BudgetGrid.linspace(0, h - 1.0, h)
    cap = float(rng.integers(0, n * (h - 1) + 1))
    row = int(rng.integers(0, n))
    base = solve_mck(RewardTable(rewards), grid, cap).total_value
    shifted = rewards.copy()
    shifted[row] += shift
    assert solve_mck(RewardTable(shifted), grid, cap).total_value == base + shift
