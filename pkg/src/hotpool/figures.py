"""Plots rendered next to the delimited reports.

matplotlib is imported lazily with the Agg backend so headless runs and
figure-free installs never touch a display.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_timeseries(report, path) -> Path:
    """Mean provisioned and busy machine counts over time, one scenario."""
    plt = _pyplot()
    xs = range(len(report.mean_provisioned))
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.step(xs, [float(v) for v in report.mean_provisioned],
            where="post", label="provisioned", color="tab:blue")
    ax.step(xs, [float(v) for v in report.mean_in_use],
            where="post", label="in use", color="tab:red")
    ax.set_xlabel("time")
    ax.set_ylabel("machines (mean over runs)")
    ax.set_title(f"{report.scenario}: fleet occupancy, {report.runs} runs")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_comparison(rows: Sequence[tuple], path) -> Path:
    """Success rate and billing cost side by side for several scenarios."""
    plt = _pyplot()
    names = [report.scenario for report, _ in rows]
    rates = [float(report.mean_success_rate) for report, _ in rows]
    costs = [float(report.mean_billing_cost) for report, _ in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.5))
    ax1.bar(names, rates, color="tab:blue")
    ax1.axhline(0.9, color="black", linestyle="--", linewidth=1,
                label="SLA floor")
    ax1.set_ylim(0, 1.05)
    ax1.set_ylabel("mean success rate")
    ax1.legend(loc="lower right")
    ax2.bar(names, costs, color="tab:orange")
    ax2.axhline(250000, color="black", linestyle="--", linewidth=1,
                label="SLA ceiling")
    ax2.set_ylabel("mean billing cost")
    ax2.legend(loc="lower right")
    for ax in (ax1, ax2):
        ax.tick_params(axis="x", rotation=20)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
