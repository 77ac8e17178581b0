"""Campaign environment driven by logged data.

Ground truth for each sub-campaign is a power-law cost-to-clicks curve whose
parameters are re-estimated daily.  Allocated budgets turn into stochastic
realized costs (truncated normal, as ad platforms over/under-deliver), costs
turn into noisy rewards, and the reward curve is abruptly replaced when the
curve fitted on the most recent logged window drifts more than 20% in scale
from the active one.  All randomness flows through counter-based streams
keyed on (seed, campaign, day) so different policies face identical noise.
"""

from __future__ import annotations

import calendar
import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError

LOGGED_CSV_HEADER = ["date", "group_id", "sub_campaign_id", "channel", "cost", "clicks", "conversions"]

_OMEGA_MIN = 1e-6
_STREAM_COST = 0
_STREAM_REWARD = 1
_STREAM_POLICY = 2


@dataclass(frozen=True)
class LoggedRecord:
    """One day of one sub-campaign's observed spend and outcomes."""

    date: dt.date
    group_id: str
    sub_campaign_id: str
    channel: str
    cost: float
    clicks: float
    conversions: float

    def __post_init__(self):
        if self.cost < 0 or self.clicks < 0 or self.conversions < 0:
            raise ValueError("cost, clicks and conversions must be nonnegative")


@dataclass(frozen=True)
class PowerLawModel:
    """Reward curve ``alpha * cost ** omega`` with diminishing returns."""

    alpha: float
    omega: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.omega <= 1:
            raise ValueError("omega must lie in (0, 1]")


@dataclass(frozen=True)
class Observation:
    """Feedback for one campaign after one simulated day."""

    cost: float
    reward: float
    conversions: float = 0.0


def rng_stream(*key: int) -> np.random.Generator:
    """Deterministic generator for a (seed, campaign, day, purpose) key."""
    return np.random.default_rng(np.random.SeedSequence(key))


# ---------------------------------------------------------------------------
# Curve fitting and sampling primitives
# ---------------------------------------------------------------------------

def fit_power_law(points) -> PowerLawModel:
    """Least-squares power-law fit in log-log space.

    Points with zero cost or zero reward carry no information about the
    curve and are dropped; at least two usable points must remain.  The
    exponent is clamped to (0, 1] to keep the curve monotone with
    diminishing returns even when noisy logs suggest otherwise.
    """
    pts = [(c, r) for c, r in points if c > 0 and r > 0]
    if len(pts) < 2:
        raise InsufficientDataError(f"power-law fit needs >= 2 usable points, got {len(pts)}")
    log_c = np.log([c for c, _ in pts])
    log_r = np.log([r for _, r in pts])
    design = np.column_stack([np.ones_like(log_c), log_c])
    coef, *_ = np.linalg.lstsq(design, log_r, rcond=None)
    alpha = float(np.exp(coef[0]))
    omega = float(np.clip(coef[1], _OMEGA_MIN, 1.0))
    return PowerLawModel(alpha=alpha, omega=omega)


def sample_cost(budget: float, sigma: float, rng: np.random.Generator) -> float:
    """Realized spend: normal around the budget, truncated to [0, 2*budget]."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if budget == 0 or sigma == 0:
        return float(budget)
    while True:
        x = rng.normal(budget, sigma)
        if 0.0 <= x <= 2.0 * budget:
            return float(x)


def expected_reward(model: PowerLawModel, cost: float) -> float:
    """Noise-free reward at a given spend."""
    if cost < 0:
        raise ValueError("cost must be nonnegative")
    return float(model.alpha * cost**model.omega)


def realize_reward(
    model: PowerLawModel, cost: float, rng: np.random.Generator, noise_std: float = 0.1
) -> float:
    """Noisy reward draw, clamped at zero (negative clicks are meaningless)."""
    value = expected_reward(model, cost)
    if noise_std > 0:
        value += rng.normal(0.0, noise_std)
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# Daily budget caps
# ---------------------------------------------------------------------------

def daily_budget_cap(records: list[LoggedRecord]) -> float:
    """Monthly group spend divided by the calendar days of that month."""
    if not records:
        raise ValueError("no records for the month")
    month = (records[0].date.year, records[0].date.month)
    for rec in records:
        if (rec.date.year, rec.date.month) != month:
            raise ValueError("records span more than one month")
    days = calendar.monthrange(*month)[1]
    return sum(rec.cost for rec in records) / days


def monthly_cap_schedule(records: list[LoggedRecord]) -> dict[tuple[int, int], float]:
    """Piecewise-constant cap per (year, month) over the whole log."""
    by_month: dict[tuple[int, int], list[LoggedRecord]] = {}
    for rec in records:
        by_month.setdefault((rec.date.year, rec.date.month), []).append(rec)
    return {month: daily_budget_cap(recs) for month, recs in sorted(by_month.items())}


# ---------------------------------------------------------------------------
# Logged-data CSV format
# ---------------------------------------------------------------------------

def write_logged_csv(records: list[LoggedRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(LOGGED_CSV_HEADER)
        for rec in records:
            writer.writerow(
                [
                    rec.date.isoformat(),
                    rec.group_id,
                    rec.sub_campaign_id,
                    rec.channel,
                    repr(float(rec.cost)),
                    int(rec.clicks),
                    int(rec.conversions),
                ]
            )


def read_logged_csv(path) -> list[LoggedRecord]:
    records = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != LOGGED_CSV_HEADER:
            raise ValueError(f"unexpected header {header!r}, want {LOGGED_CSV_HEADER!r}")
        for i, row in enumerate(reader, start=2):
            try:
                records.append(
                    LoggedRecord(
                        date=dt.date.fromisoformat(row[0]),
                        group_id=row[1],
                        sub_campaign_id=row[2],
                        channel=row[3],
                        cost=float(row[4]),
                        clicks=float(row[5]),
                        conversions=float(row[6]),
                    )
                )
            except (IndexError, ValueError) as exc:
                raise ValueError(f"malformed row {i}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Environment
# ---------------------------------------------------------------------------

@dataclass
class EnvConfig:
    stationary_period: int = 20
    cost_sigma_rel: float = 0.25
    reward_noise_std: float = 0.1
    switch_threshold: float = 0.20


@dataclass
class _CampaignState:
    current: PowerLawModel
    future: PowerLawModel | None = None
    phase_data: list[tuple[float, float]] = field(default_factory=list)
    phase_index: int = 0
    breakpoints: list[int] = field(default_factory=list)
    last_switch_day: int = 0
    conv_rate: float = 0.0


class Environment:
    """Replays a logged campaign group with policy-chosen budgets.

    The per-campaign reward curve is seeded from the earliest logged window,
    refit daily on the realized observations of the current phase, and
    abruptly replaced by the curve of the trailing logged window when its
    scale parameter drifts more than the switch threshold (with at least one
    stationary period between switches).
    """

    def __init__(self, records: list[LoggedRecord], seed: int, config: EnvConfig | None = None):
        if not records:
            raise ValueError("environment needs at least one logged record")
        self.config = config or EnvConfig()
        self.seed = int(seed)
        self.day = 0

        dates = sorted({rec.date for rec in records})
        self.dates = dates
        self.horizon = len(dates)
        date_index = {d: i for i, d in enumerate(dates)}

        self.campaign_ids = sorted({rec.sub_campaign_id for rec in records})
        n, t = len(self.campaign_ids), self.horizon
        self._logged_cost = np.zeros((n, t))
        self._logged_clicks = np.zeros((n, t))
        logged_conv = np.zeros((n, t))
        camp_index = {c: j for j, c in enumerate(self.campaign_ids)}
        for rec in records:
            j, i = camp_index[rec.sub_campaign_id], date_index[rec.date]
            self._logged_cost[j, i] += rec.cost
            self._logged_clicks[j, i] += rec.clicks
            logged_conv[j, i] += rec.conversions

        self._caps = monthly_cap_schedule(records)

        self.campaigns: list[_CampaignState] = []
        for j in range(n):
            seed_pts = self._seed_points(j)
            state = _CampaignState(current=fit_power_law(seed_pts), phase_data=list(seed_pts))
            clicks_total = self._logged_clicks[j].sum()
            if clicks_total > 0:
                state.conv_rate = float(logged_conv[j].sum() / clicks_total)
            self.campaigns.append(state)

    # -- construction helpers ------------------------------------------------

    def _seed_points(self, j: int) -> list[tuple[float, float]]:
        window = self.config.stationary_period
        while window <= self.horizon:
            pts = list(zip(self._logged_cost[j, :window], self._logged_clicks[j, :window]))
            usable = sum(1 for c, r in pts if c > 0 and r > 0)
            if usable >= 2:
                return pts
            window += self.config.stationary_period
        raise InsufficientDataError(
            f"campaign {self.campaign_ids[j]} lacks two usable logged points"
        )

    # -- public surface -------------------------------------------------------

    @property
    def n_campaigns(self) -> int:
        return len(self.campaigns)

    def cap_for_day(self, day: int) -> float:
        date = self.dates[day]
        return self._caps[(date.year, date.month)]

    def current_models(self) -> list[PowerLawModel]:
        return [state.current for state in self.campaigns]

    def breakpoints(self) -> list[list[int]]:
        return [list(state.breakpoints) for state in self.campaigns]

    def maybe_switch_model(self, j: int) -> bool:
        """Apply the 20% scale-drift switch rule for campaign ``j`` today."""
        state = self.campaigns[j]
        if state.future is None:
            return False
        if self.day - state.last_switch_day < self.config.stationary_period:
            return False
        drift = abs(state.current.alpha - state.future.alpha) / state.current.alpha
        if drift <= self.config.switch_threshold:
            return False
        state.current = state.future
        state.phase_data = self._trailing_logged_points(j)
        state.phase_index += 1
        state.breakpoints.append(self.day)
        state.last_switch_day = self.day
        return True

    def step(self, budgets: list[float]) -> list[Observation]:
        """Simulate one day at the given per-campaign budgets."""
        if self.day >= self.horizon:
            raise ValueError("horizon exceeded")
        if len(budgets) != self.n_campaigns:
            raise ValueError("one budget per campaign required")

        observations = []
        for j, state in enumerate(self.campaigns):
            budget = float(budgets[j])
            cost_rng = rng_stream(self.seed, j, self.day, _STREAM_COST)
            cost = sample_cost(budget, self.config.cost_sigma_rel * budget, cost_rng)
            reward_rng = rng_stream(self.seed, j, self.day, _STREAM_REWARD)
            reward = realize_reward(state.current, cost, reward_rng, self.config.reward_noise_std)
            observations.append(
                Observation(cost=cost, reward=reward, conversions=reward * state.conv_rate)
            )

            state.phase_data.append((cost, reward))
            try:
                state.current = fit_power_law(state.phase_data)
            except InsufficientDataError:
                pass
            try:
                state.future = fit_power_law(self._trailing_logged_points(j))
            except InsufficientDataError:
                state.future = None
            self.maybe_switch_model(j)
        self.day += 1
        return observations

    def _trailing_logged_points(self, j: int) -> list[tuple[float, float]]:
        start = max(0, self.day - self.config.stationary_period + 1)
        stop = self.day + 1
        return list(zip(self._logged_cost[j, start:stop], self._logged_clicks[j, start:stop]))
