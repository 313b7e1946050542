"""Delimited and JSON report files, rendered from exact rationals.

Numbers are written with six fractional digits, rounding half to even,
so two identical runs produce byte-identical files on any platform.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .metrics import AggregateReport, RunMetrics, SlaPolicy, SlaVerdict

SUMMARY_HEADER = "run,seed,issued,completed,successes,success_rate,billing_cost"
TIMESERIES_HEADER = "run,t,provisioned,in_use"
COMPARISON_HEADER = "scenario,mean_success_rate,mean_billing_cost,sla_pass"


def format_rational(value, places: int = 6) -> str:
    """Fixed-point decimal string, round half to even at the last digit."""
    scale = 10 ** places
    scaled = round(Fraction(value) * scale)   # Fraction.__round__ is half-even
    sign = "-" if scaled < 0 else ""
    whole, frac = divmod(abs(scaled), scale)
    return f"{sign}{whole}.{frac:0{places}d}"


def summary_lines(runs: Sequence[RunMetrics]) -> Iterable[str]:
    yield SUMMARY_HEADER
    for m in runs:
        yield (f"{m.run_index},{m.seed},{m.issued},{m.completed},"
               f"{m.successes},{format_rational(m.success_rate)},"
               f"{format_rational(m.billing_cost)}")


def timeseries_lines(runs: Sequence[RunMetrics]) -> Iterable[str]:
    yield TIMESERIES_HEADER
    for m in runs:
        for t, (provisioned, in_use) in enumerate(m.samples):
            yield f"{m.run_index},{t},{provisioned},{in_use}"


def comparison_lines(rows: Sequence[tuple]) -> Iterable[str]:
    """Rows are (report, verdict) pairs, one scenario each."""
    yield COMPARISON_HEADER
    for report, verdict in rows:
        flag = "true" if verdict.passed else "false"
        yield (f"{report.scenario},{format_rational(report.mean_success_rate)},"
               f"{format_rational(report.mean_billing_cost)},{flag}")


def report_document(report: AggregateReport, verdict: SlaVerdict,
                    policy: SlaPolicy) -> dict:
    return {
        "scenario": report.scenario,
        "runs": report.runs,
        "horizon": report.horizon,
        "mean_success_rate": format_rational(report.mean_success_rate),
        "mean_billing_cost": format_rational(report.mean_billing_cost),
        "per_run": {
            "success_rates": [format_rational(r) for r in report.success_rates],
            "billing_costs": [format_rational(c) for c in report.billing_costs],
        },
        "mean_provisioned": [format_rational(v) for v in report.mean_provisioned],
        "mean_in_use": [format_rational(v) for v in report.mean_in_use],
        "sla": {
            "min_success_rate": format_rational(policy.min_success_rate),
            "max_billing_cost": format_rational(policy.max_billing_cost),
            "success_ok": verdict.success_ok,
            "cost_ok": verdict.cost_ok,
            "passed": verdict.passed,
        },
    }


def _write_lines(path: Path, lines: Iterable[str]) -> None:
    path.write_text("\n".join(lines) + "\n")


def emit_outputs(out_dir, runs: Sequence[RunMetrics], report: AggregateReport,
                 verdict: SlaVerdict, policy: SlaPolicy,
                 figures: bool = True) -> list:
    """Write summary.csv, timeseries.csv and report.json (and, unless
    disabled, a fleet-occupancy plot) into ``out_dir``.  Returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    summary = out / "summary.csv"
    _write_lines(summary, summary_lines(runs))
    paths.append(summary)

    timeseries = out / "timeseries.csv"
    _write_lines(timeseries, timeseries_lines(runs))
    paths.append(timeseries)

    report_path = out / "report.json"
    doc = report_document(report, verdict, policy)
    report_path.write_text(json.dumps(doc, indent=2) + "\n")
    paths.append(report_path)

    if figures:
        from .figures import render_timeseries
        figure = out / "timeseries.png"
        render_timeseries(report, figure)
        paths.append(figure)
    return paths


def emit_comparison(out_dir, rows: Sequence[tuple],
                    figures: bool = True) -> list:
    """Write comparison.csv (and a comparison plot) for several scenarios."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    comparison = out / "comparison.csv"
    _write_lines(comparison, comparison_lines(rows))
    paths.append(comparison)
    if figures:
        from .figures import render_comparison
        figure = out / "comparison.png"
        render_comparison(rows, figure)
        paths.append(figure)
    return paths
