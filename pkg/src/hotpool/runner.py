"""Builds a simulated world from a scenario config and runs it.

Each run gets its own kernel seeded from the master seed and the run
index, so run k of a scenario is reproducible in isolation.  Fleet
occupancy is sampled at every integer instant from 0 to the horizon.
"""

from __future__ import annotations

from typing import Optional

from .cloud import SPEED, CloudProvider
from .config import DynamicMode, ScenarioConfig, StaticMode
from .kernel import Actor, AwaitDuration, Kernel
from .metrics import RunMetrics
from .rng import derive_run_seed
from .service import (Autoscaler, Database, RoundRobinBalancer,
                      ServiceEndpoint, Worker)
from .workload import WorkloadDriver


class FleetSampler(Actor):
    """Records (provisioned machines, busy workers) at each integer instant."""

    def __init__(self, provider: CloudProvider, balancer: RoundRobinBalancer,
                 horizon: int):
        self.provider = provider
        self.balancer = balancer
        self.horizon = horizon
        self.samples: list = []

    def run(self):
        for t in range(self.horizon + 1):
            self.samples.append(
                (self.provider.active_count(), len(self.balancer.inuse)))
            if t < self.horizon:
                yield AwaitDuration(1, 1)


def run_scenario(cfg: ScenarioConfig, run_index: int,
                 trace: bool = False) -> RunMetrics:
    """Execute one run of the scenario and collect its measurements."""
    seed = derive_run_seed(cfg.seed, run_index)
    kernel = Kernel(seed, trace=trace)
    provider = CloudProvider(kernel, cfg.billing.price, cfg.billing.period)
    db = kernel.spawn(Database(cfg.db_duration))
    balancer = kernel.spawn(RoundRobinBalancer())
    endpoint = kernel.spawn(ServiceEndpoint(balancer, cfg.deadline))

    if isinstance(cfg.mode, StaticMode):
        # A fixed fleet, fully provisioned before time starts.
        for _ in range(cfg.mode.workers):
            vm = provider.launch_instance({SPEED: cfg.per_vm_speed})
            worker = kernel.spawn(Worker(db), location=vm)
            balancer.add_worker(worker)
    else:
        kernel.spawn(Autoscaler(provider, balancer, db,
                                cfg.mode.baseline, cfg.per_vm_speed,
                                cfg.mode.resize_cycle))

    kernel.spawn(WorkloadDriver(endpoint, cfg.phases))
    sampler = kernel.spawn(FleetSampler(provider, balancer, cfg.horizon))

    outcome = kernel.run(cfg.horizon)
    return RunMetrics(
        scenario=cfg.name,
        run_index=run_index,
        seed=seed,
        samples=sampler.samples,
        requests=endpoint.records,
        billing_cost=provider.accumulated_cost(cfg.horizon),
        deadlocked=outcome.deadlocked,
    )


def run_all(cfg: ScenarioConfig, runs: Optional[int] = None) -> list:
    """Run the scenario ``runs`` times (defaults to the configured count)."""
    n = cfg.runs if runs is None else runs
    if n < 1:
        raise ValueError("runs must be >= 1")
    return [run_scenario(cfg, i) for i in range(n)]
