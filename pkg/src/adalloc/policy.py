"""Daily budget-allocation policies.

The main policy keeps one GP reward model per sub-campaign, clamps its mean
above the best observed spend (so the zero-mean prior does not punish
unexplored high budgets), adds an exploration bonus only at budget levels
above the best observed spend, scales that bonus by campaign efficiency, and
resets its data buffer when a long-history model and a recent-window model
disagree by more than a threshold on average across the grid.

Baselines cover the standard alternatives: plain UCB with and without
change-point detection, fixed sliding windows with UCB or posterior-sample
exploration, and discounting of past data via per-point noise inflation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gp
from .gp import GpDataset, GpPosterior, RbfKernelParams
from .knapsack import Allocation, BudgetGrid, RewardTable, solve_mck
from .sim import Observation

TUCB_MAE = "TUCB_MAE"
UCB_MAE = "UCB_MAE"
UCB_NCPD = "UCB_NCPD"
UCB_SW = "UCB_SW"
TS_SW = "TS_SW"
UCB_DS = "UCB_DS"
VARIANTS = (TUCB_MAE, UCB_MAE, UCB_NCPD, UCB_SW, TS_SW, UCB_DS)

CPC = "CPC"
CPA = "CPA"


@dataclass(frozen=True)
class PolicyConfig:
    variant: str = TUCB_MAE
    beta: float = 2.0
    tau: float = 4.0
    window_length: int = 7
    sliding_window: int = 10
    discount: float = 0.9
    efficiency_metric: str = CPC
    use_saturating_mean: bool = True
    use_targeted_ucb: bool = True
    use_efficiency: bool = True
    gp_signal_variance: float = 1.0
    gp_length_scale: float = 1.0
    gp_noise_variance: float = 0.01

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.window_length < 1 or self.sliding_window < 1:
            raise ValueError("window lengths must be positive")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must lie in (0, 1]")
        if self.efficiency_metric not in (CPC, CPA):
            raise ValueError(f"unknown efficiency metric {self.efficiency_metric!r}")

    def kernel(self) -> RbfKernelParams:
        return RbfKernelParams(self.gp_signal_variance, self.gp_length_scale)


@dataclass(frozen=True)
class BufferEntry:
    day: int
    budget: float
    cost: float
    reward: float
    conversions: float = 0.0


@dataclass
class CampaignBuffer:
    """Chronological observations plus the index where the current phase starts."""

    entries: list[BufferEntry] = field(default_factory=list)
    phase_start: int = 0

    def phase_entries(self) -> list[BufferEntry]:
        return self.entries[self.phase_start :]

    def truncate_to_window(self, window_length: int) -> None:
        self.phase_start = max(len(self.entries) - window_length, 0)


@dataclass(frozen=True)
class DualModels:
    """Long-history model and recent-window model for the same campaign."""

    long_model: GpPosterior
    short_model: GpPosterior


# ---------------------------------------------------------------------------
# Policy building blocks
# ---------------------------------------------------------------------------

def compute_efficiency(buffers: list[CampaignBuffer], metric: str = CPC) -> np.ndarray:
    """Normalized cost-per-outcome in [0, 1]; 1 marks the least efficient arm.

    The raw ratio is the sum over observed days of cost divided by clicks
    (or conversions, for CPA), counting only days with a positive outcome.
    Campaigns with no such day yet are treated as least efficient.
    """
    ratios = np.full(len(buffers), np.nan)
    for j, buf in enumerate(buffers):
        total, seen = 0.0, False
        for entry in buf.entries:
            outcome = entry.reward if metric == CPC else entry.conversions
            if outcome > 0:
                total += entry.cost / outcome
                seen = True
        if seen:
            ratios[j] = total
    theta = np.ones(len(buffers))
    defined = ~np.isnan(ratios)
    if defined.any():
        top = float(np.max(ratios[defined]))
        if top > 0:
            theta[defined] = ratios[defined] / top
    return theta


def acquisition(
    means: np.ndarray,
    stds: np.ndarray,
    theta_j: float,
    beta: float,
    b_max: float,
    grid: BudgetGrid,
    targeted: bool = True,
) -> np.ndarray:
    """Exploration-adjusted values: mean plus ``beta * (1 - theta) * std``.

    With targeting, the bonus applies only at grid levels strictly above the
    best observed spend ``b_max``; untargeted variants apply it everywhere
    (pass ``theta_j = 0`` for a plain UCB bonus).
    """
    values = np.asarray(means, dtype=float).copy()
    bonus = beta * (1.0 - theta_j) * np.asarray(stds, dtype=float)
    if targeted:
        mask = grid.values > b_max
        values[mask] += bonus[mask]
    else:
        values += bonus
    return values


def ts_sample(post: GpPosterior, grid: BudgetGrid, rng: np.random.Generator) -> np.ndarray:
    """One joint draw from the posterior over the grid."""
    means, _ = gp.predict_points(post, grid.values)
    cov = gp.posterior_covariance(post, grid.values)
    lower = gp.cholesky_with_jitter(cov, post.kernel.signal_variance)
    return means + lower @ rng.standard_normal(grid.size)


def prediction_gap(models: DualModels, grid: BudgetGrid) -> float:
    """Mean absolute gap between the two models' predictions over the grid."""
    long_means, _ = gp.predict(models.long_model, grid)
    short_means, _ = gp.predict(models.short_model, grid)
    return float(np.mean(np.abs(long_means - short_means)))


def detect_changepoint(models: DualModels, grid: BudgetGrid, tau: float) -> bool:
    return prediction_gap(models, grid) > tau


# ---------------------------------------------------------------------------
# The daily allocate-observe loop
# ---------------------------------------------------------------------------

class Allocator:
    """Stateful allocator running the daily loop for one policy variant."""

    def __init__(self, config: PolicyConfig, n_campaigns: int):
        if n_campaigns < 1:
            raise ValueError("need at least one campaign")
        self.config = config
        self.n_campaigns = n_campaigns
        self.buffers = [CampaignBuffer() for _ in range(n_campaigns)]
        self.last_break_day: list[int | None] = [None] * n_campaigns
        self.last_acquisition: list[np.ndarray] | None = None
        self._last_budgets: list[float] | None = None
        self._kernel = config.kernel()

    # -- data handling -------------------------------------------------------

    def _record(self, day: int, observations: list[Observation]) -> None:
        if len(observations) != self.n_campaigns:
            raise ValueError("one observation per campaign required")
        budgets = self._last_budgets or [0.0] * self.n_campaigns
        for j, obs in enumerate(observations):
            self.buffers[j].entries.append(
                BufferEntry(
                    day=day - 1,
                    budget=budgets[j],
                    cost=obs.cost,
                    reward=obs.reward,
                    conversions=obs.conversions,
                )
            )

    def _fit_window(self, j: int, day: int) -> list[BufferEntry]:
        cfg = self.config
        buf = self.buffers[j]
        if cfg.variant in (UCB_SW, TS_SW):
            return buf.entries[-cfg.sliding_window :]
        if cfg.variant in (UCB_NCPD, UCB_DS):
            return buf.entries
        return buf.phase_entries()

    def _fit(self, entries: list[BufferEntry], day: int, grid: BudgetGrid) -> GpPosterior:
        cfg = self.config
        weights = None
        if cfg.variant == UCB_DS and entries:
            ages = np.array([(day - 1) - e.day for e in entries], dtype=float)
            weights = cfg.discount**-ages
        data = GpDataset(
            inputs=np.array([e.cost for e in entries]),
            targets=np.array([e.reward for e in entries]),
            noise_variance=cfg.gp_noise_variance,
            weights=weights,
        )
        return gp.fit(data, self._kernel, input_scale=grid.max_budget)

    def _run_cpd(self, j: int, day: int, long_post: GpPosterior, grid: BudgetGrid) -> GpPosterior:
        """Detect a breakpoint and truncate the buffer; returns the live model."""
        cfg = self.config
        buf = self.buffers[j]
        phase = buf.phase_entries()
        if len(phase) <= 2 * cfg.window_length:
            return long_post
        last_break = self.last_break_day[j]
        if last_break is not None and day - last_break <= cfg.window_length:
            return long_post
        short = buf.entries[-cfg.window_length :]
        short_post = self._fit(short, day, grid)
        if detect_changepoint(DualModels(long_post, short_post), grid, cfg.tau):
            buf.truncate_to_window(cfg.window_length)
            self.last_break_day[j] = day
            return short_post  # the truncated buffer is exactly the short window
        return long_post

    # -- the daily step --------------------------------------------------------

    def allocate_day(
        self,
        day: int,
        observations: list[Observation] | None,
        grid: BudgetGrid,
        cap: float,
        rng_for=None,
    ) -> Allocation:
        """Consume the prior day's feedback and choose today's budgets.

        ``rng_for(j)`` must return a fresh generator for campaign ``j``; it
        is only consulted by the posterior-sampling variant.
        """
        cfg = self.config
        if observations is not None:
            self._record(day, observations)

        theta = compute_efficiency(self.buffers, cfg.efficiency_metric)
        rows = np.empty((self.n_campaigns, grid.size))
        acquisitions = []
        for j in range(self.n_campaigns):
            long_post = self._fit(self._fit_window(j, day), day, grid)
            if cfg.variant in (TUCB_MAE, UCB_MAE):
                long_post = self._run_cpd(j, day, long_post, grid)

            if cfg.variant == TS_SW:
                if rng_for is None:
                    raise ValueError("posterior sampling needs an rng factory")
                values = ts_sample(long_post, grid, rng_for(j))
            else:
                means, stds = gp.predict(long_post, grid)
                has_data = long_post.size > 0
                b_max = n_max = 0.0
                if has_data:
                    point_means, _ = gp.predict_points(long_post, long_post.train_inputs * long_post.input_scale)
                    best = int(np.argmax(point_means))
                    b_max = float(long_post.train_inputs[best] * long_post.input_scale)
                    n_max = float(point_means[best])
                if cfg.variant == TUCB_MAE:
                    if has_data and cfg.use_saturating_mean:
                        means = gp.saturate_mean(means, grid, b_max, n_max)
                    values = acquisition(
                        means,
                        stds,
                        theta_j=float(theta[j]) if cfg.use_efficiency else 0.0,
                        beta=cfg.beta,
                        b_max=b_max,
                        grid=grid,
                        targeted=has_data and cfg.use_targeted_ucb,
                    )
                else:
                    values = acquisition(
                        means, stds, theta_j=0.0, beta=cfg.beta, b_max=0.0, grid=grid, targeted=False
                    )
            rows[j] = values
            acquisitions.append(values)

        self.last_acquisition = acquisitions
        allocation = solve_mck(RewardTable(rows), grid, cap)
        self._last_budgets = list(allocation.per_campaign_budget)
        return allocation
