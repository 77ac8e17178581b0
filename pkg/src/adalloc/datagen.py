"""Synthetic logged-campaign generation and the Criteo-style log adapter.

Real campaign logs are proprietary, so experiments run on generated ones: an
operator budget path (clipped Gaussian random walk around a spend level)
pushed through the same cost and reward sampling the environment uses, with
scripted phase changes in the reward curve.  ``load_criteo`` maps an
attribution-style event log onto the same per-day record schema.
"""

from __future__ import annotations

import csv
import datetime as dt
import warnings
from dataclasses import dataclass, field

import numpy as np

from .sim import (
    LoggedRecord,
    PowerLawModel,
    expected_reward,
    realize_reward,
    sample_cost,
)

_CHANNELS = ["search", "display", "video", "discovery"]


@dataclass(frozen=True)
class PhaseSpec:
    """One stationary phase of a campaign's reward curve."""

    start_day: int
    alpha: float
    omega: float

    def model(self) -> PowerLawModel:
        return PowerLawModel(alpha=self.alpha, omega=self.omega)


@dataclass(frozen=True)
class ScenarioSpec:
    """Blueprint for a synthetic campaign group.

    ``phases[j]`` lists campaign ``j``'s phases in order; the first phase
    must start at day 0, consecutive starts must be at least
    ``stationary_period`` apart, and adjacent phases must differ by at
    least ``tau`` in expected reward at the reference cap (the daily spend
    of the whole group), so every scripted change is detectable.
    """

    n_campaigns: int
    horizon: int
    phases: list[list[PhaseSpec]]
    daily_spend: float
    seed: int = 0
    stationary_period: int = 20
    tau: float = 4.0
    conv_rate: float = 0.08
    cost_sigma_rel: float = 0.25
    reward_noise_std: float = 0.1
    start_date: dt.date = dt.date(2023, 1, 1)
    group_id: str = "group-1"

    def __post_init__(self):
        if self.n_campaigns < 1:
            raise ValueError("n_campaigns must be positive")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if len(self.phases) != self.n_campaigns:
            raise ValueError("need one phase list per campaign")
        if not self.daily_spend > 0:
            raise ValueError("daily_spend must be positive")
        cap_ref = self.n_campaigns * self.daily_spend
        for j, phase_list in enumerate(self.phases):
            if not phase_list:
                raise ValueError(f"campaign {j} has no phases")
            if phase_list[0].start_day != 0:
                raise ValueError(f"campaign {j}: first phase must start at day 0")
            for prev, cur in zip(phase_list, phase_list[1:]):
                if cur.start_day - prev.start_day < self.stationary_period:
                    raise ValueError(
                        f"campaign {j}: phase starts closer than {self.stationary_period} days"
                    )
                gap = abs(
                    expected_reward(cur.model(), cap_ref)
                    - expected_reward(prev.model(), cap_ref)
                )
                if gap < self.tau:
                    raise ValueError(
                        f"campaign {j}: adjacent phases differ by {gap:.3f} < tau={self.tau} "
                        f"at the reference cap"
                    )

    def model_for_day(self, j: int, day: int) -> PowerLawModel:
        active = self.phases[j][0]
        for phase in self.phases[j]:
            if phase.start_day <= day:
                active = phase
        return active.model()


def generate_logged_campaign(spec: ScenarioSpec) -> list[LoggedRecord]:
    """Sample a full logged history for the scenario, deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    records = []
    walk_sigma = 0.1 * spec.daily_spend
    lo, hi = 0.5 * spec.daily_spend, 1.5 * spec.daily_spend
    for j in range(spec.n_campaigns):
        budget = spec.daily_spend
        for day in range(spec.horizon):
            budget = float(np.clip(budget + rng.normal(0.0, walk_sigma), lo, hi))
            cost = sample_cost(budget, spec.cost_sigma_rel * budget, rng)
            model = spec.model_for_day(j, day)
            reward = realize_reward(model, cost, rng, spec.reward_noise_std)
            clicks = int(round(reward))
            conversions = int(rng.binomial(clicks, spec.conv_rate)) if clicks > 0 else 0
            records.append(
                LoggedRecord(
                    date=spec.start_date + dt.timedelta(days=day),
                    group_id=spec.group_id,
                    sub_campaign_id=f"c{j:02d}",
                    channel=_CHANNELS[j % len(_CHANNELS)],
                    cost=cost,
                    clicks=clicks,
                    conversions=conversions,
                )
            )
    records.sort(key=lambda r: (r.date, r.sub_campaign_id))
    return records


# ---------------------------------------------------------------------------
# Criteo-style attribution log adapter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriteoColumnMap:
    """Source-column names and units for the attribution-log adapter.

    Defaults match the public attribution dataset: event rows carry a
    relative timestamp in seconds, a campaign id, a per-event cost, and
    0/1 click and conversion flags.
    """

    timestamp: str = "timestamp"
    campaign: str = "campaign"
    cost: str = "cost"
    click: str = "click"
    conversion: str = "conversion"
    seconds_per_day: int = 86_400
    base_date: dt.date = dt.date(2023, 1, 1)
    group_id: str = "criteo"
    channel: str = "display"


def load_criteo(
    path,
    campaign_ids: list[str],
    column_map: CriteoColumnMap | None = None,
) -> list[LoggedRecord]:
    """Aggregate an event-level attribution log to daily campaign records.

    Rows are filtered to the requested campaign ids and summed per
    (campaign, day).  Ids absent from the file produce a warning, not an
    error; malformed rows report their line number.  The delimiter (tab or
    comma) is sniffed from the header line.
    """
    cmap = column_map or CriteoColumnMap()
    wanted = [str(c) for c in campaign_ids]

    with open(path, newline="", encoding="utf-8") as handle:
        first = handle.readline()
        if not first:
            raise ValueError("empty file")
        delimiter = "\t" if "\t" in first else ","
        header = [h.strip() for h in first.rstrip("\n").split(delimiter)]
        col = {}
        for name in (cmap.timestamp, cmap.campaign, cmap.cost, cmap.click, cmap.conversion):
            if name not in header:
                raise ValueError(f"missing column {name!r} in header")
            col[name] = header.index(name)

        totals: dict[tuple[str, int], list[float]] = {}
        seen = set()
        reader = csv.reader(handle, delimiter=delimiter)
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                campaign = str(row[col[cmap.campaign]]).strip()
                if campaign not in wanted:
                    continue
                day = int(float(row[col[cmap.timestamp]])) // cmap.seconds_per_day
                cost = float(row[col[cmap.cost]])
                click = float(row[col[cmap.click]])
                conversion = float(row[col[cmap.conversion]])
            except (IndexError, ValueError) as exc:
                raise ValueError(f"malformed row {i}: {exc}") from exc
            seen.add(campaign)
            bucket = totals.setdefault((campaign, day), [0.0, 0.0, 0.0])
            bucket[0] += cost
            bucket[1] += click
            bucket[2] += conversion

    missing = [c for c in wanted if c not in seen]
    if missing:
        warnings.warn(f"campaign ids not found in {path}: {missing}", stacklevel=2)

    records = []
    for (campaign, day), (cost, clicks, conversions) in sorted(totals.items()):
        records.append(
            LoggedRecord(
                date=cmap.base_date + dt.timedelta(days=int(day)),
                group_id=cmap.group_id,
                sub_campaign_id=campaign,
                channel=cmap.channel,
                cost=cost,
                clicks=clicks,
                conversions=conversions,
            )
        )
    return records
