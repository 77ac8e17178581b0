"""Reproducible simulator and bandit allocators for multichannel ad budgets."""

from .knapsack import Allocation, BudgetGrid, RewardTable, brute_force_mck, solve_mck
from .policy import Allocator, PolicyConfig
from .sim import Environment, EnvConfig, LoggedRecord, PowerLawModel

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "Allocator",
    "BudgetGrid",
    "EnvConfig",
    "Environment",
    "LoggedRecord",
    "PolicyConfig",
    "PowerLawModel",
    "RewardTable",
    "brute_force_mck",
    "solve_mck",
    "__version__",
]
