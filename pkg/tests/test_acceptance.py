"""Acceptance checks for the hot-pool experiment.

One verdict line prints per criterion (visible live under ``pytest -s``).
The desk-scale fixture runs every bundled scenario 20 times and is shared
by the rate, cost and congestion checks; everything else is either a
closed form or a property suite of at least a thousand cases.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hotpool.cli import main as cli_main
from hotpool.cloud import SPEED, CloudProvider
from hotpool.config import find_config
from hotpool.kernel import (Actor, AwaitDuration, AwaitFuture, Cost, Future,
                            Kernel, KernelError)
from hotpool.kernel import Send as SendEffect
from hotpool.metrics import SlaPolicy, aggregate, evaluate_sla
from hotpool.runner import run_all
from hotpool.service import ResizeAction, ResizeKind, RoundRobinBalancer, decide_resize

F = Fraction

STATIC_FLEETS = (("static-80", 80), ("static-100", 100), ("static-120", 120))
SCENARIOS = ("static-80", "static-100", "static-120", "dynamic")
DESK_RUNS = 20
DESK_BUDGET_SECONDS = 120

UP, DOWN, SAME = ResizeKind.SCALE_UP, ResizeKind.SCALE_DOWN, ResizeKind.NO_CHANGE


@contextmanager
def verdict(capsys, label):
    ok = False
    try:
        yield
        ok = True
    finally:
        with capsys.disabled():
            print(f"{label}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="module")
def desk():
    """20 runs of each bundled scenario: {name: (metrics, report)}, elapsed."""
    started = time.monotonic()
    results = {}
    for name in SCENARIOS:
        metrics = run_all(find_config(name), runs=DESK_RUNS)
        results[name] = (metrics, aggregate(metrics))
    return results, time.monotonic() - started


# -- 1: billing closed forms ------------------------------------------------

def test_acceptance_1_billing_closed_forms(capsys):
    with verdict(capsys, "acceptance 1, billing closed forms"):
        policy = SlaPolicy()
        for fleet, total in ((80, F(240000)), (100, F(300000)),
                             (120, F(360000))):
            provider = CloudProvider(Kernel(seed=1), price=50, period=5)
            for _ in range(fleet):
                provider.launch_instance({SPEED: F(64)})
            cost = provider.accumulated_cost(F(300))
            assert cost == total                       # exact, tolerance 0
            assert cost == fleet * 50 * 60
            # Only the 80-machine fleet stays inside the cost budget.
            assert (cost <= policy.max_billing_cost) == (fleet == 80)


# -- 2: success-rate ordering at desk scale ----------------------------------

def test_acceptance_2_success_rate_ordering(desk, capsys):
    with verdict(capsys, "acceptance 2, success-rate ordering"):
        results, elapsed = desk
        rate = {name: results[name][1].mean_success_rate
                for name in SCENARIOS}
        assert rate["static-80"] < rate["static-100"] <= rate["static-120"]
        assert rate["static-120"] == 1
        assert F(2, 5) <= rate["static-80"] <= F(3, 4)
        assert F(22, 25) <= rate["static-100"] < 1
        assert F(9, 10) <= rate["dynamic"] <= 1
        # Static aggregates are arrival-order determined, so they are exact.
        assert rate["static-80"] == F(8, 11)
        assert rate["static-100"] == F(10, 11)
        assert elapsed <= DESK_BUDGET_SECONDS


# -- 3: dynamic cost dominance ------------------------------------------------

def test_acceptance_3_dynamic_cost_dominance(desk, capsys):
    with verdict(capsys, "acceptance 3, dynamic cost dominance"):
        results, _ = desk
        cost = {name: results[name][1].mean_billing_cost
                for name in SCENARIOS}
        assert cost["dynamic"] < F(240000)             # strictly below 80
        assert cost["dynamic"] < min(cost[name] for name, _ in STATIC_FLEETS)
        clause = {name: evaluate_sla(results[name][1]).cost_ok
                  for name in SCENARIOS}
        assert clause == {"static-80": True, "static-100": False,
                          "static-120": False, "dynamic": True}
        assert evaluate_sla(results["dynamic"][1]).passed


# -- 4: congestion shape ------------------------------------------------------

def test_acceptance_4_congestion_shape(desk, capsys):
    with verdict(capsys, "acceptance 4, congestion shape"):
        results, _ = desk
        saturated = {}
        for name, fleet in STATIC_FLEETS:
            samples = results[name][0][0].samples
            assert all(provisioned == fleet for provisioned, _ in samples)
            busy = [t for t, (_, used) in enumerate(samples) if used == fleet]
            assert any(100 <= t <= 150 for t in busy)  # first burst saturates
            assert any(200 <= t <= 250 for t in busy)  # second burst saturates
            saturated[fleet] = len(busy)
        assert saturated[80] > saturated[100] > saturated[120]
        assert (saturated[80], saturated[100], saturated[120]) == (46, 34, 26)

        provisioned = [p for p, _ in results["dynamic"][0][0].samples]
        quiet = provisioned[99]
        first_peak = max(provisioned[100:161])
        trough = min(provisioned[160:201])
        second_peak = max(provisioned[200:261])
        final = provisioned[300]
        assert first_peak > quiet and first_peak >= 100
        assert trough < first_peak and trough <= 10
        assert second_peak > trough and second_peak >= 100
        assert final < second_peak and final <= 10


# -- 5: property suites -------------------------------------------------------

class Box:
    """Minimal location: speed, active flag, consumption tally."""

    def __init__(self, speed):
        self.speed = F(speed)
        self.active = True
        self.consumed = F(0)


class Peer(Actor):
    """Runs a random plan of sleeps, costs and calls to other peers."""

    def __init__(self, plan):
        self.plan = plan
        self.peers = []

    def poke(self, n):
        return n + 1

    def work(self, amount):
        yield Cost(amount)
        return amount

    def run(self):
        for kind, arg in self.plan:
            if kind == "sleep":
                yield AwaitDuration(arg)
            elif kind == "cost":
                yield Cost(arg)
            elif kind == "poke":
                yield from self.call(self.peers[arg], "poke", 1)
            else:
                yield from self.call(self.peers[arg], "work", F(1, 2))


def build_micro_model(rnd, kernel_seed, trace):
    """A few peers on a few machines with random plans.  Never deadlocks:
    plans are finite and calls release the caller's group."""
    kernel = Kernel(seed=kernel_seed, trace=trace)
    locations = [Box(F(rnd.randint(1, 5))) for _ in range(rnd.randint(1, 3))]
    count = rnd.randint(2, 4)
    peers = []
    for _ in range(count):
        plan = []
        for _ in range(rnd.randint(1, 5)):
            kind = rnd.choice(("sleep", "cost", "poke", "work"))
            if kind == "sleep":
                plan.append((kind, F(rnd.randint(0, 8), rnd.randint(1, 4))))
            elif kind == "cost":
                plan.append((kind, F(rnd.randint(1, 12), rnd.randint(1, 3))))
            else:
                plan.append((kind, rnd.randrange(count)))
        peers.append(Peer(plan))
    for peer in peers:
        peer.peers = peers
        kernel.spawn(peer, rnd.choice(locations))
    return kernel


def _suite_time_monotonicity():
    rnd = random.Random(0xACCE01)
    for _ in range(1000):
        kernel = build_micro_model(rnd, rnd.getrandbits(64), trace=True)
        kernel.run(60)
        times = [entry[0] for entry in kernel.events]
        assert times and all(a <= b for a, b in zip(times, times[1:]))
        assert not kernel.deadlocked


def _suite_trace_determinism():
    rnd = random.Random(0xACCE02)
    for _ in range(1000):
        model_seed = rnd.getrandbits(64)
        kernel_seed = rnd.getrandbits(64)
        first = build_micro_model(random.Random(model_seed), kernel_seed,
                                  trace=True)
        second = build_micro_model(random.Random(model_seed), kernel_seed,
                                   trace=True)
        a = first.run(60)
        b = second.run(60)
        assert list(first.trace_lines()) == list(second.trace_lines())
        assert (a.final_time, a.steps) == (b.final_time, b.steps)


class Producer(Actor):
    def produce(self, delay, value):
        yield AwaitDuration(delay)
        return value


class Watcher(Actor):
    def __init__(self, future, log):
        self.future = future
        self.log = log

    def watch(self):
        value = yield AwaitFuture(self.future)
        self.log.append(value)


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(watchers=st.integers(min_value=1, max_value=8),
       value=st.integers(min_value=-10 ** 9, max_value=10 ** 9),
       seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def _suite_future_single_assignment(watchers, value, seed):
    kernel = Kernel(seed=seed)
    producer = kernel.spawn(Producer())
    fut = kernel.post(producer, "produce", 2, value)
    log = []
    for _ in range(watchers):
        kernel.post(kernel.spawn(Watcher(fut, log)), "watch")
    kernel.run(10)
    assert fut.resolved and fut.value == value
    assert log == [value] * watchers
    with pytest.raises(KernelError, match="resolved twice"):
        fut._resolve(value)


class Meter(Actor):
    def __init__(self, amount, log):
        self.amount = amount
        self.log = log

    def run(self):
        yield Cost(self.amount)
        self.log.append(self.now())


_rational = st.fractions(min_value=F(1, 64), max_value=F(64),
                         max_denominator=64)


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(cost=_rational, speed=_rational,
       seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def _suite_sole_task_timing(cost, speed, seed):
    kernel = Kernel(seed=seed)
    box = Box(speed)
    log = []
    kernel.spawn(Meter(cost, log), box)
    kernel.run(cost / speed + 1)
    assert log == [cost / speed]                       # exact, tolerance 0
    assert box.consumed == cost


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(n=st.integers(min_value=1, max_value=8), cost=_rational,
       speed=_rational, seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def _suite_fair_share_timing(n, cost, speed, seed):
    kernel = Kernel(seed=seed)
    box = Box(speed)
    log = []
    for _ in range(n):
        kernel.spawn(Meter(cost, log), box)
    kernel.run(n * cost / speed + 1)
    assert log == [n * cost / speed] * n
    assert box.consumed == n * cost


class FleetScript(Actor):
    """Launches and stops machines at scripted times."""

    def __init__(self, provider, plan):
        self.provider = provider
        self.plan = plan            # [(when, "launch" | "stop", key)]
        self.fleet = {}

    def run(self):
        for when, op, key in self.plan:
            wait = when - self.now()
            if wait > 0:
                yield AwaitDuration(wait)
            if op == "launch":
                self.fleet[key] = self.provider.launch_instance({SPEED: F(1)})
            else:
                assert self.provider.shutdown_instance(self.fleet[key])


def _billing_recount(instances, price, period, horizon):
    """Literal walk over every billing boundary, the slow way."""
    total = F(0)
    boundary = period
    while boundary <= horizon:
        for vm in instances:
            if vm.launched_at <= boundary and (vm.shutdown_at is None
                                               or vm.shutdown_at > boundary):
                total += price
        boundary += period
    return total


def _suite_billing_oracle():
    rnd = random.Random(0xACCE03)
    for _ in range(1000):
        kernel = Kernel(seed=rnd.getrandbits(64))
        price = F(rnd.randint(1, 100), rnd.choice((1, 2, 4)))
        period = F(rnd.randint(1, 12), rnd.choice((1, 2, 3)))
        horizon = F(rnd.randint(1, 60))
        provider = CloudProvider(kernel, price=price, period=period)
        plan = []
        for key in range(rnd.randint(1, 6)):
            launch = F(rnd.randint(0, 50), rnd.choice((1, 2)))
            plan.append((launch, "launch", key))
            if rnd.random() < 0.6:
                stop = launch + F(rnd.randint(0, 40), rnd.choice((1, 2)))
                plan.append((stop, "stop", key))
        plan.sort(key=lambda event: (event[0], event[1] == "stop"))
        kernel.spawn(FleetScript(provider, plan))
        kernel.run(100)
        assert (provider.accumulated_cost(horizon)
                == _billing_recount(provider.instances, price, period,
                                    horizon))


class PoolUser(Actor):
    """Thinks, borrows a worker, holds it, hands it back; repeats."""

    def __init__(self, balancer, naps):
        self.balancer = balancer
        self.naps = naps            # [(think, hold)]

    def run(self):
        for think, hold in self.naps:
            yield AwaitDuration(think)
            worker = yield from self.call(self.balancer, "get_worker")
            yield AwaitDuration(hold)
            yield SendEffect(self.balancer, "release_worker", worker)


class Fireman(Actor):
    def __init__(self, balancer, times):
        self.balancer = balancer
        self.times = times

    def run(self):
        for when in self.times:
            wait = when - self.now()
            if wait > 0:
                yield AwaitDuration(wait)
            yield from self.call(self.balancer, "firing_worker")


class PoolAuditor(Actor):
    """Snapshots the pool twice per interval and files any violation."""

    def __init__(self, balancer, samples):
        self.balancer = balancer
        self.samples = samples
        self.bad = []

    def run(self):
        for _ in range(self.samples):
            yield AwaitDuration(F(1, 2))
            idle = list(self.balancer.available)
            busy = list(self.balancer.inuse)
            members = self.balancer._members
            if set(idle) & set(busy):
                self.bad.append((self.now(), "overlap"))
            if set(idle) | set(busy) != members:
                self.bad.append((self.now(), "lost"))
            if len(idle) + len(busy) != len(members):
                self.bad.append((self.now(), "duplicate"))


def _suite_balancer_conservation():
    rnd = random.Random(0xACCE04)
    for _ in range(1000):
        kernel = Kernel(seed=rnd.getrandbits(64))
        balancer = kernel.spawn(RoundRobinBalancer())
        workers = rnd.randint(1, 5)
        for _ in range(workers):
            balancer.add_worker(object())
        for _ in range(rnd.randint(0, 3)):
            naps = [(F(rnd.randint(0, 4), 2), F(rnd.randint(1, 3), 2))
                    for _ in range(rnd.randint(1, 3))]
            kernel.spawn(PoolUser(balancer, naps))
        fired = rnd.randint(0, workers - 1) if workers > 1 else 0
        if fired:
            times = sorted(F(rnd.randint(0, 40), 2) for _ in range(fired))
            kernel.spawn(Fireman(balancer, times))
        auditor = kernel.spawn(PoolAuditor(balancer, 50))
        outcome = kernel.run(30)
        assert not outcome.deadlocked
        assert auditor.bad == []
        assert balancer.counts() == (workers - fired, 0)


def _suite_decide_exclusivity():
    baseline = 10
    checked = 0
    for available in range(101):
        for inuse in range(101):
            action = decide_resize(available, inuse, baseline)
            grow = 3 * available < inuse
            shed = inuse < 3 * available and available > baseline
            assert not (grow and shed)
            if grow:
                assert action == ResizeAction(UP, 2 * inuse)
            elif shed:
                assert action == ResizeAction(DOWN, (available + 1) // 2)
            else:
                assert action == ResizeAction(SAME)
            checked += 1
    assert checked == 101 * 101


def test_acceptance_5_property_suites(capsys):
    with verdict(capsys, "acceptance 5, kernel and resource property suites"):
        _suite_time_monotonicity()
        _suite_trace_determinism()
        _suite_future_single_assignment()
        _suite_sole_task_timing()
        _suite_fair_share_timing()
        _suite_billing_oracle()
        _suite_balancer_conservation()
        _suite_decide_exclusivity()


# -- 6: autoscaler decision table ----------------------------------------------

def test_acceptance_6_autoscaler_decision_table(capsys):
    with verdict(capsys, "acceptance 6, autoscaler decision table"):
        assert decide_resize(2, 10, 10) == ResizeAction(UP, 20)
        assert decide_resize(12, 9, 10) == ResizeAction(DOWN, 6)
        assert decide_resize(5, 15, 10) == ResizeAction(SAME)   # 3*5 == 15
        assert decide_resize(0, 0, 1) == ResizeAction(SAME)
        assert decide_resize(5, 9, 10) == ResizeAction(SAME)    # at baseline


# -- 7: end-to-end reproducibility ----------------------------------------------

def test_acceptance_7_reproducibility(tmp_path, capsys):
    with verdict(capsys, "acceptance 7, end-to-end reproducibility"):
        outs = []
        for sub in ("first", "second"):
            out = tmp_path / sub
            rc = cli_main(["simulate", "static-80", "--runs", "2",
                           "--out", str(out), "--no-figures"])
            assert rc == 0
            outs.append(out)
        for name in ("summary.csv", "timeseries.csv", "report.json"):
            first = (outs[0] / name).read_bytes()
            second = (outs[1] / name).read_bytes()
            assert first and first == second
