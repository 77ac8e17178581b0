"""Command-line entry point.

Subcommands:
  run     load a config, run the (policy x seed) grid, write CSVs + figures
  ablate  expand the configured full policy into its ablation variants
  gen     generate a synthetic logged-campaign CSV from a scenario spec

Exit codes: 0 success, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .datagen import ScenarioSpec, generate_logged_campaign
from .errors import ConfigError
from .runner import parse_config, parse_scenario, run_ablation, run_experiment
from .sim import write_logged_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment grid")
    run_p.add_argument("--config", required=True, help="experiment config (JSON)")
    run_p.add_argument("--out", default=None, help="output directory override")
    run_p.add_argument("--seeds", default=None, help="comma-separated seed override")
    run_p.add_argument("--policies", default=None, help="comma-separated policy subset")
    run_p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    abl_p = sub.add_parser("ablate", help="run the ablation variants of the full policy")
    abl_p.add_argument("--config", required=True, help="experiment config (JSON)")
    abl_p.add_argument("--out", default=None, help="output directory override")
    abl_p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    gen_p = sub.add_parser("gen", help="generate a synthetic logged-campaign CSV")
    gen_p.add_argument("--spec", required=True, help="scenario spec (JSON)")
    gen_p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _apply_overrides(config, args):
    if getattr(args, "seeds", None):
        try:
            config = replace(config, seeds=[int(s) for s in args.seeds.split(",") if s])
        except ValueError as exc:
            raise ConfigError(f"seeds: {exc}") from exc
    if getattr(args, "policies", None):
        wanted = [p for p in args.policies.split(",") if p]
        unknown = [p for p in wanted if p not in config.policies]
        if unknown:
            raise ConfigError(f"policies: unknown name(s) {unknown}")
        config = replace(config, policies={p: config.policies[p] for p in wanted})
    if getattr(args, "no_figures", False):
        config = replace(config, figures=False)
    return config


def _cmd_run(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    summary = run_experiment(config, out_dir=args.out)
    for name, row in summary.items():
        print(
            f"{name}: clicks {row['clicks_mean']:.1f}+/-{row['clicks_std']:.1f}  "
            f"regret {row['regret_mean']:.1f}+/-{row['regret_std']:.1f}  "
            f"cpc {row['cpc_mean']:.4f}+/-{row['cpc_std']:.4f}"
        )
    return EXIT_OK


def _cmd_ablate(args) -> int:
    config = _apply_overrides(parse_config(args.config), args)
    summary = run_ablation(config, out_dir=args.out)
    for name, row in summary.items():
        print(f"{name}: clicks {row['clicks_mean']:.1f}  regret {row['regret_mean']:.1f}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        with open(args.spec, encoding="utf-8") as handle:
            raw = json.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"spec file {args.spec!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spec file {args.spec!r} is not valid JSON: {exc}") from exc
    scenario = parse_scenario(raw)
    if not isinstance(scenario, ScenarioSpec):
        raise ConfigError("spec file must contain an inline scenario object")
    records = generate_logged_campaign(scenario)
    write_logged_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "ablate": _cmd_ablate, "gen": _cmd_gen}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001  (CLI boundary)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
