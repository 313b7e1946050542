"""Hot pool of workers behind a round-robin balancer.

A request enters through the :class:`ServiceEndpoint`, which borrows a
worker from the balancer, has it execute the job's compute cost on its
machine, checks the response deadline against the database, and returns
the worker.  In dynamic deployments an :class:`Autoscaler` grows and
shrinks the pool from periodic idle/busy snapshots.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from .cloud import SPEED, CloudProvider
from .kernel import Actor, AwaitCondition, AwaitDuration, Cost, Send
from .metrics import RequestRecord


class BalancerError(Exception):
    """Worker registry misuse: duplicate add or stray release."""


class Database(Actor):
    """Fixed-latency data store that reports whether a deadline still holds."""

    def __init__(self, transaction_time: Any = 1):
        self.transaction_time = Fraction(transaction_time)
        if self.transaction_time < 0:
            raise ValueError("transaction time must be >= 0")

    def access_data(self, remaining: Fraction):
        t = self.transaction_time
        if t > 0:
            yield AwaitDuration(t, t)
        return remaining >= t


class Worker(Actor):
    """Executes one job at a time on its machine."""

    def __init__(self, db: Database):
        self.db = db

    def process(self, task_cost: Fraction, started: Fraction,
                deadline: Fraction):
        yield Cost(task_cost)
        remaining = deadline - (self.now() - started)
        ok = yield from self.call(self.db, "access_data", remaining)
        return ok

    def get_location(self):
        return self.location


class RoundRobinBalancer(Actor):
    """Hands out idle workers oldest first and takes them back at the tail,
    so consecutive requests rotate through the whole pool.

    Requests are admitted in arrival order: each ``get_worker`` call takes
    a ticket and only the head of the line may claim a worker, so a borrow
    that arrived while the pool was empty cannot be overtaken by a later
    one that got luckier with scheduling.
    """

    def __init__(self):
        self.available: deque = deque()
        self.inuse: list = []
        self._members: set = set()   # membership only, never iterated
        self._line: deque = deque()
        self._next_ticket = 0

    def _has_idle(self) -> bool:
        return bool(self.available)

    def add_worker(self, worker: Worker) -> None:
        if worker in self._members:
            raise BalancerError("duplicate worker")
        self._members.add(worker)
        self.available.append(worker)

    def get_worker(self):
        line = self._line
        ticket = self._next_ticket
        self._next_ticket += 1
        line.append(ticket)
        yield AwaitCondition(
            lambda: bool(self.available) and line[0] == ticket)
        line.popleft()
        worker = self.available.popleft()
        self.inuse.append(worker)
        return worker

    def release_worker(self, worker: Worker) -> None:
        try:
            self.inuse.remove(worker)
        except ValueError:
            raise BalancerError("released worker not in use") from None
        self.available.append(worker)

    def firing_worker(self):
        """Withdraw the most recently returned idle worker; blocks while
        every worker is busy.  Busy workers are never fired."""
        yield AwaitCondition(self._has_idle)
        worker = self.available.pop()
        self._members.discard(worker)
        return worker

    def counts(self) -> tuple:
        return (len(self.available), len(self.inuse))


class ServiceEndpoint(Actor):
    """Client-facing entry point; records every request's fate."""

    def __init__(self, balancer: RoundRobinBalancer, deadline: Any):
        self.balancer = balancer
        self.deadline = Fraction(deadline)
        self.records: list = []

    def invoke_service(self, task_cost: Fraction):
        record = RequestRecord(issued_at=self.now())
        self.records.append(record)
        worker = yield from self.call(self.balancer, "get_worker")
        ok = yield from self.call(worker, "process", task_cost,
                                  record.issued_at, self.deadline)
        yield from self.call(self.balancer, "release_worker", worker)
        record.completed_at = self.now()
        record.success = bool(ok)
        return record.success


class ResizeKind(Enum):
    NO_CHANGE = "no-change"
    SCALE_UP = "scale-up"
    SCALE_DOWN = "scale-down"


@dataclass(frozen=True)
class ResizeAction:
    kind: ResizeKind
    count: int = 0


def decide_resize(available: int, inuse: int, baseline: int) -> ResizeAction:
    """Resize policy over one (available, inuse) snapshot, exact arithmetic.

    Grow by twice the busy count when fewer than a quarter of the pool is
    idle; shed half the idle workers (rounded up) when idle capacity
    exceeds a third of the busy count and the pool is above the baseline.
    """
    if available < 0 or inuse < 0:
        raise ValueError("counts must be >= 0")
    if 3 * available < inuse:
        return ResizeAction(ResizeKind.SCALE_UP, 2 * inuse)
    if inuse < 3 * available and available > baseline:
        return ResizeAction(ResizeKind.SCALE_DOWN, (available + 1) // 2)
    return ResizeAction(ResizeKind.NO_CHANGE)


class Autoscaler(Actor):
    """Provisions a baseline pool, then resizes it every cycle.

    Each step takes one snapshot of the balancer's counts and acts on it;
    the pool may shift underneath while machines launch or drain, which
    the next snapshot then sees.
    """

    def __init__(self, provider: CloudProvider, balancer: RoundRobinBalancer,
                 db: Database, baseline: int, per_vm_speed: Any, cycle: Any):
        self.provider = provider
        self.balancer = balancer
        self.db = db
        self.baseline = baseline
        self.per_vm_speed = Fraction(per_vm_speed)
        self.cycle = Fraction(cycle)

    def _recruit(self) -> Worker:
        vm = self.provider.launch_instance({SPEED: self.per_vm_speed})
        return self.kernel.spawn(Worker(self.db), location=vm)

    def run(self):
        for _ in range(self.baseline):
            yield from self.call(self.balancer, "add_worker", self._recruit())
        yield Send(self, "resize")

    def resize(self):
        yield AwaitDuration(self.cycle, self.cycle)
        available, inuse = yield from self.call(self.balancer, "counts")
        action = decide_resize(available, inuse, self.baseline)
        if action.kind is ResizeKind.SCALE_UP:
            for _ in range(action.count):
                yield from self.call(self.balancer, "add_worker",
                                     self._recruit())
        elif action.kind is ResizeKind.SCALE_DOWN:
            for _ in range(action.count):
                worker = yield from self.call(self.balancer, "firing_worker")
                vm = yield from self.call(worker, "get_location")
                self.provider.shutdown_instance(vm)
        yield Send(self, "resize")
