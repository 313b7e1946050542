"""Deterministic simulator for a hot pool of cloud workers.

A cooperative actor kernel with exact rational time drives virtual
machines rented from a billing cloud, a round-robin worker pool with an
optional autoscaler, and bursty closed/open client workloads.  The
harness layer runs seeded scenario batches and reports whether the
deployment meets its service-level agreement.
"""

from .cloud import SPEED, CloudError, CloudProvider, VirtualMachine
from .config import (BillingSpec, ConfigError, DynamicMode, ScenarioConfig,
                     StaticMode, find_config, load_config, parse_config)
from .kernel import (Actor, AwaitCondition, AwaitDuration, AwaitFuture,
                     BadDurationError, Cost, DeadLocationError, Future,
                     Kernel, KernelError, RunOutcome, Send)
from .metrics import (AggregateReport, RequestRecord, RunMetrics, SlaPolicy,
                      SlaVerdict, aggregate, evaluate_sla)
from .reporting import emit_comparison, emit_outputs, format_rational
from .rng import Pcg32, derive_run_seed, splitmix64
from .runner import FleetSampler, run_all, run_scenario
from .service import (Autoscaler, BalancerError, Database, ResizeAction,
                      ResizeKind, RoundRobinBalancer, ServiceEndpoint, Worker,
                      decide_resize)
from .workload import (ClientSpec, ClosedClient, OpenClient, Phase,
                       WorkloadDriver, WorkloadError, check_phases,
                       total_requests)

__version__ = "0.1.0"
