"""Burst workloads: waves of closed and open clients.

A closed client keeps at most one request in flight, sleeping a think
cycle before each call.  An open client fires requests on a fixed clock
no matter how slowly the service answers, so it can flood a saturated
pool.  A workload is a sorted list of phases, each spawning a wave of
identical clients at its start time.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .kernel import Actor, AwaitDuration, AwaitFuture, Send
from .service import ServiceEndpoint

CLOSED = "closed"
OPEN = "open"


class WorkloadError(Exception):
    """Ill-formed workload description."""


@dataclass(frozen=True)
class ClientSpec:
    """Behaviour shared by every client in one phase.

    ``jitter`` widens the per-request cost to a uniform draw from
    ``task_cost - jitter .. task_cost + jitter`` in integer steps; zero
    (the default) keeps costs deterministic.
    """

    kind: str
    cycle: Fraction
    task_cost: Fraction
    jobs: int
    jitter: int = 0

    def __post_init__(self):
        if self.kind not in (CLOSED, OPEN):
            raise WorkloadError(f"unknown client kind {self.kind!r}")
        if self.cycle <= 0:
            raise WorkloadError("cycle must be positive")
        if self.task_cost <= 0:
            raise WorkloadError("task cost must be positive")
        if self.jobs < 1:
            raise WorkloadError("jobs must be >= 1")
        if self.jitter < 0:
            raise WorkloadError("jitter must be >= 0")
        if self.task_cost - self.jitter <= 0:
            raise WorkloadError("task cost must stay positive under jitter")


def request_cost(spec: ClientSpec, rng) -> Fraction:
    if spec.jitter == 0:
        return spec.task_cost
    return spec.task_cost - spec.jitter + rng.randrange(2 * spec.jitter + 1)


class ClosedClient(Actor):
    """Think, call, wait for the answer; never more than one outstanding."""

    def __init__(self, endpoint: ServiceEndpoint, spec: ClientSpec):
        self.endpoint = endpoint
        self.spec = spec

    def run(self):
        spec = self.spec
        for _ in range(spec.jobs):
            yield AwaitDuration(spec.cycle, spec.cycle)
            cost = request_cost(spec, self.kernel.rng)
            yield from self.call(self.endpoint, "invoke_service", cost)


class OpenClient(Actor):
    """Issue on a fixed clock starting immediately, then drain the replies."""

    def __init__(self, endpoint: ServiceEndpoint, spec: ClientSpec):
        self.endpoint = endpoint
        self.spec = spec

    def run(self):
        spec = self.spec
        pending = []
        for k in range(spec.jobs):
            cost = request_cost(spec, self.kernel.rng)
            pending.append((yield Send(self.endpoint, "invoke_service", cost)))
            if k + 1 < spec.jobs:
                yield AwaitDuration(spec.cycle, spec.cycle)
        for fut in pending:
            yield AwaitFuture(fut)


@dataclass(frozen=True)
class Phase:
    """A wave of ``count`` identical clients released at ``start``."""

    start: Fraction
    count: int
    spec: ClientSpec

    def __post_init__(self):
        if self.start < 0:
            raise WorkloadError("phase start must be >= 0")
        if self.count < 1:
            raise WorkloadError("phase count must be >= 1")


def check_phases(phases: Sequence[Phase]) -> tuple:
    if not phases:
        raise WorkloadError("no phases")
    for earlier, later in zip(phases, phases[1:]):
        if later.start < earlier.start:
            raise WorkloadError("unsorted phases")
    return tuple(phases)


def total_requests(phases: Sequence[Phase]) -> int:
    """Requests the workload will issue if every client finishes."""
    return sum(ph.count * ph.spec.jobs for ph in phases)


class WorkloadDriver(Actor):
    """Spawns each phase's client wave at its start time."""

    def __init__(self, endpoint: ServiceEndpoint, phases: Sequence[Phase]):
        self.endpoint = endpoint
        self.phases = check_phases(phases)

    def run(self):
        for phase in self.phases:
            delay = phase.start - self.now()
            if delay > 0:
                yield AwaitDuration(delay, delay)
            ctor = ClosedClient if phase.spec.kind == CLOSED else OpenClient
            for _ in range(phase.count):
                self.kernel.spawn(ctor(self.endpoint, phase.spec))
