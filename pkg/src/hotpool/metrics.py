"""Per-run measurements, aggregation across runs, and the SLA verdict.

All statistics stay exact rationals end to end; rounding happens only
when a report is rendered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence


@dataclass
class RequestRecord:
    """One service invocation as seen at the endpoint."""

    issued_at: Fraction
    completed_at: Optional[Fraction] = None
    success: bool = False


@dataclass
class RunMetrics:
    """Everything measured in a single simulation run."""

    scenario: str
    run_index: int
    seed: int
    samples: list   # (provisioned, in_use) at t = 0, 1, ..., horizon
    requests: list
    billing_cost: Fraction
    deadlocked: bool = False

    @property
    def issued(self) -> int:
        return len(self.requests)

    @property
    def completed(self) -> int:
        return sum(1 for r in self.requests if r.completed_at is not None)

    @property
    def successes(self) -> int:
        # A request still in flight when the run ends counts as a failure.
        return sum(1 for r in self.requests if r.success)

    @property
    def success_rate(self) -> Fraction:
        if not self.requests:
            return Fraction(1)
        return Fraction(self.successes, self.issued)


@dataclass
class AggregateReport:
    """Cross-run means for one scenario."""

    scenario: str
    runs: int
    horizon: int
    success_rates: list
    billing_costs: list
    mean_success_rate: Fraction
    mean_billing_cost: Fraction
    mean_provisioned: list   # per sample instant, averaged over runs
    mean_in_use: list


def aggregate(metrics: Sequence[RunMetrics]) -> AggregateReport:
    """Average a scenario's runs.  Refuses mixed scenarios."""
    if not metrics:
        raise ValueError("nothing to aggregate")
    scenario = metrics[0].scenario
    if any(m.scenario != scenario for m in metrics):
        raise ValueError("mixed scenarios in one aggregate")
    width = len(metrics[0].samples)
    if any(len(m.samples) != width for m in metrics):
        raise ValueError("runs sampled over different horizons")
    n = len(metrics)
    rates = [m.success_rate for m in metrics]
    costs = [m.billing_cost for m in metrics]
    mean_prov = []
    mean_use = []
    for t in range(width):
        mean_prov.append(Fraction(sum(m.samples[t][0] for m in metrics), n))
        mean_use.append(Fraction(sum(m.samples[t][1] for m in metrics), n))
    return AggregateReport(
        scenario=scenario,
        runs=n,
        horizon=width - 1,
        success_rates=rates,
        billing_costs=costs,
        mean_success_rate=sum(rates, Fraction(0)) / n,
        mean_billing_cost=sum(costs, Fraction(0)) / n,
        mean_provisioned=mean_prov,
        mean_in_use=mean_use,
    )


@dataclass(frozen=True)
class SlaPolicy:
    """Service-level agreement thresholds on cross-run means."""

    min_success_rate: Fraction = Fraction(9, 10)
    max_billing_cost: Fraction = Fraction(250000)


@dataclass(frozen=True)
class SlaVerdict:
    success_ok: bool
    cost_ok: bool

    @property
    def passed(self) -> bool:
        return self.success_ok and self.cost_ok


def evaluate_sla(report: AggregateReport,
                 policy: SlaPolicy = SlaPolicy()) -> SlaVerdict:
    """Check the two SLA clauses independently against the means."""
    return SlaVerdict(
        success_ok=report.mean_success_rate >= policy.min_success_rate,
        cost_ok=report.mean_billing_cost <= policy.max_billing_cost,
    )
