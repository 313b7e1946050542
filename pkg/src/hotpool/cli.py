"""Command line interface.

Subcommands:

* ``simulate`` - run one scenario, write summary.csv, timeseries.csv,
  report.json and a fleet plot, print the SLA verdict.
* ``compare`` - run several scenarios and add a comparison.csv plus a
  side-by-side plot.
* ``validate`` - check a scenario document and exit.

Exit status: 0 on success, 1 when ``--strict`` is set and an SLA verdict
failed, 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Optional, Sequence

from .config import ConfigError, DynamicMode, ScenarioConfig, find_config
from .metrics import SlaPolicy, aggregate, evaluate_sla
from .reporting import emit_comparison, emit_outputs, format_rational
from .runner import run_all
from .workload import total_requests

USAGE_ERROR = 2


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed_value(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotpool",
        description="Simulate a hot pool of cloud workers under bursty load.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and report")
    sim.add_argument("config",
                     help="scenario file or bundled name (e.g. static-80)")
    sim.add_argument("--runs", type=_positive_int,
                     help="override the configured run count")
    sim.add_argument("--seed", type=_seed_value,
                     help="override the configured master seed")
    sim.add_argument("--out", default="out", help="output directory")
    sim.add_argument("--no-figures", action="store_true",
                     help="skip plot rendering")
    sim.add_argument("--strict", action="store_true",
                     help="exit 1 when the SLA verdict fails")

    cmp_ = sub.add_parser("compare", help="run several scenarios side by side")
    cmp_.add_argument("configs", nargs="+",
                      help="scenario files or bundled names")
    cmp_.add_argument("--runs", type=_positive_int,
                      help="override every scenario's run count")
    cmp_.add_argument("--out", default="out", help="output directory")
    cmp_.add_argument("--no-figures", action="store_true",
                      help="skip plot rendering")
    cmp_.add_argument("--strict", action="store_true",
                      help="exit 1 when any SLA verdict fails")

    val = sub.add_parser("validate", help="check a scenario document")
    val.add_argument("config", help="scenario file or bundled name")
    return parser


def _describe(cfg: ScenarioConfig) -> str:
    if isinstance(cfg.mode, DynamicMode):
        mode = (f"dynamic (baseline {cfg.mode.baseline}, "
                f"resize cycle {cfg.mode.resize_cycle})")
    else:
        mode = f"static ({cfg.mode.workers} workers)"
    return (f"{cfg.name}: {mode}, {len(cfg.phases)} phases, "
            f"{total_requests(cfg.phases)} requests, horizon {cfg.horizon}, "
            f"{cfg.runs} runs, seed {cfg.seed}")


def _verdict_line(report, verdict, policy) -> str:
    rate = format_rational(report.mean_success_rate)
    cost = format_rational(report.mean_billing_cost)
    s_flag = "PASS" if verdict.success_ok else "FAIL"
    c_flag = "PASS" if verdict.cost_ok else "FAIL"
    total = "PASS" if verdict.passed else "FAIL"
    return (f"{report.scenario}: mean success rate {rate} "
            f"(>= {format_rational(policy.min_success_rate)}: {s_flag}), "
            f"mean billing cost {cost} "
            f"(<= {format_rational(policy.max_billing_cost)}: {c_flag}) "
            f"-> SLA {total}")


def _apply_overrides(cfg: ScenarioConfig, runs: Optional[int],
                     seed: Optional[int]) -> ScenarioConfig:
    if runs is not None:
        cfg = dataclasses.replace(cfg, runs=runs)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def _run_one(cfg: ScenarioConfig, out_dir, figures: bool, policy: SlaPolicy):
    metrics = run_all(cfg)
    report = aggregate(metrics)
    verdict = evaluate_sla(report, policy)
    emit_outputs(out_dir, metrics, report, verdict, policy, figures=figures)
    return report, verdict


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    policy = SlaPolicy()
    try:
        if args.command == "validate":
            cfg = find_config(args.config)
            print(f"ok: {_describe(cfg)}")
            return 0

        if args.command == "simulate":
            cfg = _apply_overrides(find_config(args.config), args.runs,
                                   args.seed)
            print(_describe(cfg))
            report, verdict = _run_one(cfg, args.out, not args.no_figures,
                                       policy)
            print(_verdict_line(report, verdict, policy))
            print(f"wrote summary.csv, timeseries.csv, report.json"
                  f"{'' if args.no_figures else ', timeseries.png'} "
                  f"in {args.out}")
            return 1 if (args.strict and not verdict.passed) else 0

        # compare
        rows = []
        for name in args.configs:
            cfg = _apply_overrides(find_config(name), args.runs, None)
            print(_describe(cfg))
            report, verdict = _run_one(
                cfg, f"{args.out}/{cfg.name}", not args.no_figures, policy)
            print(_verdict_line(report, verdict, policy))
            rows.append((report, verdict))
        emit_comparison(args.out, rows, figures=not args.no_figures)
        print(f"wrote comparison.csv in {args.out}")
        return 1 if (args.strict and any(not v.passed for _, v in rows)) else 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
