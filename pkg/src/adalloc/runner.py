"""Experiment driver: run a (policy x seed) grid and write metric CSVs.

Every (policy, seed) cell replays the same logged data through its own
environment instance; because environment noise comes from counter-based
streams keyed on (seed, campaign, day), all policies under one seed face
identical noise, which makes their comparison paired.  Outputs are a per-day
CSV per cell, a cross-seed summary table, a per-policy metadata file, and
(optionally) rendered figures next to the CSVs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .datagen import PhaseSpec, ScenarioSpec, generate_logged_campaign
from .errors import ConfigError
from .knapsack import BudgetGrid
from .metrics import DailyMetrics, instantaneous_regret, oracle_allocate
from .policy import TUCB_MAE, Allocator, PolicyConfig
from .sim import (
    EnvConfig,
    Environment,
    LoggedRecord,
    read_logged_csv,
    rng_stream,
)

_STREAM_POLICY = 2

DAILY_HEADER = [
    "day",
    "campaign",
    "budget",
    "cost",
    "reward",
    "oracle_value",
    "regret",
    "cum_regret",
    "cum_clicks",
]
SUMMARY_HEADER = [
    "policy",
    "clicks_mean",
    "clicks_std",
    "regret_mean",
    "regret_std",
    "cpc_mean",
    "cpc_std",
]


@dataclass
class ExperimentConfig:
    scenario: str | ScenarioSpec
    policies: dict[str, PolicyConfig]
    seeds: list[int] = field(default_factory=lambda: [1, 42, 76])
    granularity: int = 500
    min_budget: float = 0.0
    stationary_period: int = 20
    cost_sigma_rel: float = 0.25
    reward_noise_std: float = 0.1
    switch_threshold: float = 0.20
    out_dir: str = "results"
    figures: bool = True

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds: must be nonempty")
        if self.granularity < 2:
            raise ConfigError("granularity: must be at least 2")
        if not self.policies:
            raise ConfigError("policies: must define at least one policy")

    def env_config(self) -> EnvConfig:
        return EnvConfig(
            stationary_period=self.stationary_period,
            cost_sigma_rel=self.cost_sigma_rel,
            reward_noise_std=self.reward_noise_std,
            switch_threshold=self.switch_threshold,
        )


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

def parse_scenario(raw) -> str | ScenarioSpec:
    if isinstance(raw, str):
        if not Path(raw).exists():
            raise ConfigError(f"scenario: path {raw!r} does not exist")
        return raw
    if not isinstance(raw, dict):
        raise ConfigError("scenario: must be a CSV path or an inline scenario object")
    try:
        phases = [
            [PhaseSpec(int(p["start_day"]), float(p["alpha"]), float(p["omega"])) for p in plist]
            for plist in raw["phases"]
        ]
        kwargs = {
            k: raw[k]
            for k in (
                "seed",
                "stationary_period",
                "tau",
                "conv_rate",
                "cost_sigma_rel",
                "reward_noise_std",
                "group_id",
            )
            if k in raw
        }
        return ScenarioSpec(
            n_campaigns=int(raw["n_campaigns"]),
            horizon=int(raw["horizon"]),
            phases=phases,
            daily_spend=float(raw["daily_spend"]),
            **kwargs,
        )
    except KeyError as exc:
        raise ConfigError(f"scenario: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def parse_policy(name: str, raw: dict) -> PolicyConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"policies.{name}: must be an object")
    try:
        return PolicyConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"policies.{name}: {exc}") from exc


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    if "scenario" not in raw:
        raise ConfigError("scenario: required")
    if "policies" not in raw:
        raise ConfigError("policies: required")

    scenario = parse_scenario(raw["scenario"])
    policies = {name: parse_policy(name, spec) for name, spec in raw["policies"].items()}
    simple = {
        k: raw[k]
        for k in (
            "seeds",
            "granularity",
            "min_budget",
            "stationary_period",
            "cost_sigma_rel",
            "reward_noise_std",
            "switch_threshold",
            "out_dir",
            "figures",
        )
        if k in raw
    }
    try:
        return ExperimentConfig(scenario=scenario, policies=policies, **simple)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Single cell: one policy, one seed
# ---------------------------------------------------------------------------

def run_cell(
    records: list[LoggedRecord],
    policy_config: PolicyConfig,
    seed: int,
    config: ExperimentConfig,
) -> list[DailyMetrics]:
    env = Environment(records, seed=seed, config=config.env_config())
    allocator = Allocator(policy_config, env.n_campaigns)
    observations = None
    cum_clicks = cum_regret = cum_cost = 0.0
    days: list[DailyMetrics] = []
    for day in range(env.horizon):
        cap = env.cap_for_day(day)
        if cap <= config.min_budget:
            raise ValueError(f"day {day}: cap {cap} does not exceed min_budget")
        grid = BudgetGrid.linspace(config.min_budget, cap, config.granularity)

        def rng_for(j, _day=day):
            return rng_stream(seed, j, _day, _STREAM_POLICY)

        allocation = allocator.allocate_day(day, observations, grid, cap, rng_for)
        models = env.current_models()
        oracle = oracle_allocate(models, grid, cap)
        observations = env.step(allocation.per_campaign_budget)

        regret = instantaneous_regret(models, oracle, allocation)
        oracle_value = sum(
            m.alpha * b**m.omega for m, b in zip(models, oracle.per_campaign_budget)
        )
        day_reward = sum(o.reward for o in observations)
        day_cost = sum(o.cost for o in observations)
        cum_clicks += day_reward
        cum_regret += regret
        cum_cost += day_cost
        days.append(
            DailyMetrics(
                day=day,
                budgets=list(allocation.per_campaign_budget),
                costs=[o.cost for o in observations],
                rewards=[o.reward for o in observations],
                oracle_value=oracle_value,
                policy_value=oracle_value - regret,
                regret=regret,
                realized_regret=oracle_value - day_reward,
                cum_clicks=cum_clicks,
                cum_regret=cum_regret,
                running_cpc=(cum_cost / cum_clicks) if cum_clicks > 0 else None,
            )
        )
    return days


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------

def _write_daily_csv(path: Path, campaign_ids: list[str], days: list[DailyMetrics]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(DAILY_HEADER)
        for metrics in days:
            for j, campaign in enumerate(campaign_ids):
                writer.writerow(
                    [
                        metrics.day,
                        campaign,
                        repr(float(metrics.budgets[j])),
                        repr(float(metrics.costs[j])),
                        repr(float(metrics.rewards[j])),
                        repr(float(metrics.oracle_value)),
                        repr(float(metrics.regret)),
                        repr(float(metrics.cum_regret)),
                        repr(float(metrics.cum_clicks)),
                    ]
                )


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    std = 0.0 if arr.size < 2 else float(np.std(arr, ddof=1))
    return mean, std


def _load_records(config: ExperimentConfig) -> list[LoggedRecord]:
    if isinstance(config.scenario, ScenarioSpec):
        return generate_logged_campaign(config.scenario)
    return read_logged_csv(config.scenario)


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | None = None,
) -> dict[str, dict[str, float]]:
    """Run the full (policy x seed) grid and write all output files.

    Returns the summary rows keyed by policy name so callers can assert on
    them without re-reading the CSV.
    """
    out = Path(out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = _load_records(config)

    campaign_ids = sorted({rec.sub_campaign_id for rec in records})
    summary: dict[str, dict[str, float]] = {}
    per_policy_curves: dict[str, dict[str, np.ndarray]] = {}
    for name, policy_config in config.policies.items():
        clicks, regrets, cpcs = [], [], []
        regret_curves, clicks_curves = [], []
        for seed in config.seeds:
            days = run_cell(records, policy_config, seed, config)
            _write_daily_csv(out / f"{name}_{seed}_daily.csv", campaign_ids, days)
            clicks.append(days[-1].cum_clicks)
            regrets.append(days[-1].cum_regret)
            total_cost = sum(sum(m.costs) for m in days)
            total_clicks = days[-1].cum_clicks
            cpcs.append(total_cost / total_clicks if total_clicks > 0 else float("nan"))
            regret_curves.append([m.cum_regret for m in days])
            clicks_curves.append([m.cum_clicks for m in days])
        clicks_mean, clicks_std = _mean_std(clicks)
        regret_mean, regret_std = _mean_std(regrets)
        cpc_mean, cpc_std = _mean_std(cpcs)
        summary[name] = {
            "clicks_mean": clicks_mean,
            "clicks_std": clicks_std,
            "regret_mean": regret_mean,
            "regret_std": regret_std,
            "cpc_mean": cpc_mean,
            "cpc_std": cpc_std,
        }
        per_policy_curves[name] = {
            "cum_regret": np.mean(np.asarray(regret_curves), axis=0),
            "cum_clicks": np.mean(np.asarray(clicks_curves), axis=0),
        }

    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_HEADER)
        for name, row in summary.items():
            writer.writerow([name] + [repr(float(row[k])) for k in SUMMARY_HEADER[1:]])

    metadata = {
        name: {
            "variant": p.variant,
            "beta": p.beta,
            "tau": p.tau,
            "window_length": p.window_length,
            "sliding_window": p.sliding_window,
            "discount": p.discount,
            "efficiency_metric": p.efficiency_metric,
            "use_saturating_mean": p.use_saturating_mean,
            "use_targeted_ucb": p.use_targeted_ucb,
            "use_efficiency": p.use_efficiency,
        }
        for name, p in config.policies.items()
    }
    with open(out / "policies.json", "w", encoding="utf-8") as handle:
        json.dump(metadata, handle, indent=2, sort_keys=True)
        handle.write("\n")

    if config.figures:
        from . import report

        report.render_figures(out, summary, per_policy_curves)
    return summary


def ablation_policies(base_name: str, base: PolicyConfig) -> dict[str, PolicyConfig]:
    """Expand one full-policy config into the four ablation variants."""
    full = replace(
        base, use_saturating_mean=True, use_targeted_ucb=True, use_efficiency=True
    )
    return {
        base_name: full,
        f"{base_name}_NO_SATMEAN": replace(full, use_saturating_mean=False),
        f"{base_name}_NO_EFFICIENCY": replace(full, use_efficiency=False),
        f"{base_name}_NO_TARGETING": replace(full, use_targeted_ucb=False),
    }


def run_ablation(config: ExperimentConfig, out_dir: str | None = None):
    """Run the ablation grid derived from the configured full policy."""
    base = next(
        ((name, p) for name, p in config.policies.items() if p.variant == TUCB_MAE),
        None,
    )
    if base is None:
        raise ConfigError("policies: ablation needs one policy with the TUCB_MAE variant")
    expanded = replace(config, policies=ablation_policies(*base))
    return run_experiment(expanded, out_dir=out_dir)
