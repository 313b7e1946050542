"""Cooperative actor kernel with exact rational time.

Actors are plain objects whose methods run as processes.  A method may be
an ordinary function (it runs to completion in one step) or a generator
that yields effect objects:

* ``Send(target, method, *args)`` - enqueue a process on another actor and
  continue immediately; the yield evaluates to a :class:`Future`.
* ``AwaitFuture(fut)`` - suspend until the future resolves; the yield
  evaluates to the resolved value.
* ``AwaitCondition(pred)`` - suspend until ``pred()`` is true.  The
  predicate is re-checked when the process is dispatched, so it holds at
  the moment execution resumes.
* ``AwaitDuration(lo, hi)`` - suspend; become ready again at ``now + lo``.
* ``Cost(amount)`` - consume ``amount`` units of compute on the actor's
  location.  No other process of the actor runs until the cost completes.

Between two yields a process runs atomically: at most one process per
actor is ever mid-step, and nothing else observes intermediate state.
Which ready process runs next is the kernel's only random choice, drawn
from a seeded generator, so a (seed, model) pair replays exactly.

Time is a :class:`fractions.Fraction` and only advances when no process
is ready, to the earliest pending wake-up or cost completion.

Locations (virtual machines) are any objects with ``speed`` (positive
rational), ``active`` (bool) and ``consumed`` (rational tally) attributes.
A location's speed is divided equally among the cost tasks currently on
it, re-split whenever a task starts or finishes, so a task of cost c
alone on speed s finishes in exactly c/s time.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from types import GeneratorType
from typing import Any, Callable, Iterable, Optional

from .rng import Pcg32

Rational = Fraction
ZERO = Fraction(0)


class KernelError(Exception):
    """Misuse of the kernel API detected at run time."""


class BadDurationError(KernelError):
    """Duration bounds are negative or out of order."""


class DeadLocationError(KernelError):
    """A cost annotation ran on a location that is shut down."""


def _as_rational(value: Any, what: str) -> Fraction:
    try:
        return value if type(value) is Fraction else Fraction(value)
    except (TypeError, ValueError) as exc:
        raise KernelError(f"{what} is not a rational: {value!r}") from exc


class Future:
    """Single-assignment result slot.  Resolved at most once, by the kernel."""

    __slots__ = ("resolved", "value", "_waiters")

    def __init__(self) -> None:
        self.resolved = False
        self.value: Any = None
        self._waiters: list[Process] = []

    def _resolve(self, value: Any) -> None:
        if self.resolved:
            raise KernelError("future resolved twice")
        self.resolved = True
        self.value = value


class Send:
    __slots__ = ("target", "method", "args")

    def __init__(self, target: "Actor", method: str, *args: Any):
        self.target = target
        self.method = method
        self.args = args


class AwaitFuture:
    __slots__ = ("future",)

    def __init__(self, future: Future):
        self.future = future


class AwaitCondition:
    __slots__ = ("predicate",)

    def __init__(self, predicate: Callable[[], bool]):
        self.predicate = predicate


class AwaitDuration:
    __slots__ = ("low", "high")

    def __init__(self, low: Any, high: Any = None):
        self.low = low
        self.high = low if high is None else high


class Cost:
    __slots__ = ("amount",)

    def __init__(self, amount: Any):
        self.amount = amount


class Actor:
    """Base class for things the kernel schedules.  Subclass and add methods."""

    kernel: "Kernel"
    location: Optional[Any]
    name: str

    def call(self, target: "Actor", method: str, *args: Any):
        """Send and await the reply.  Use as ``x = yield from self.call(...)``."""
        fut = yield Send(target, method, *args)
        value = yield AwaitFuture(fut)
        return value

    def now(self) -> Fraction:
        return self.kernel.now()


# Process states.
_READY = 0
_FUT_WAIT = 1
_COND_WAIT = 2
_SLEEPING = 3
_LOCK_WAIT = 4
_CONSUMING = 5
_DONE = 6

_BLOCKED_STATES = (_FUT_WAIT, _COND_WAIT, _LOCK_WAIT)


class Process:
    __slots__ = (
        "pid", "actor", "method", "args", "gen", "state",
        "value_in", "guard", "future", "remaining",
    )

    def __init__(self, pid: int, actor: Actor, method: str, args: tuple,
                 future: Optional[Future]):
        self.pid = pid
        self.actor = actor
        self.method = method
        self.args = args
        self.gen = None
        self.state = _READY
        self.value_in: Any = None
        self.guard: Optional[Callable[[], bool]] = None
        self.future = future
        self.remaining: Fraction = ZERO   # unfinished cost while consuming


class _Work:
    """Cost tasks sharing one location's speed, settled lazily."""

    __slots__ = ("location", "tasks", "settled_at", "version")

    def __init__(self, location: Any, settled_at: Fraction):
        self.location = location
        self.tasks: list[Process] = []
        self.settled_at = settled_at
        self.version = 0

    def next_done(self) -> Fraction:
        least = min(p.remaining for p in self.tasks)
        return self.settled_at + least * len(self.tasks) / self.location.speed


class RunOutcome:
    """What a call to :meth:`Kernel.run` observed."""

    __slots__ = ("final_time", "steps", "deadlocked")

    def __init__(self, final_time: Fraction, steps: int, deadlocked: bool):
        self.final_time = final_time
        self.steps = steps
        self.deadlocked = deadlocked


class Kernel:
    """Single-threaded run loop over a set of actors."""

    def __init__(self, seed: int, trace: bool = False):
        self.rng = Pcg32(seed)
        self.clock: Fraction = ZERO
        self._ready: list[Process] = []
        self._heap: list = []          # (time, seq, payload); payload wakes or settles
        self._seq = 0
        self._next_pid = 1
        self._next_actor_id = 1
        self._works: dict = {}         # location -> _Work, insertion ordered
        self._blocked = 0              # processes in future/condition/lock wait
        self.deadlocked = False
        self.steps = 0
        self.events: Optional[list] = [] if trace else None

    # -- construction ------------------------------------------------------

    def spawn(self, actor: Actor, location: Any = None) -> Actor:
        """Register an actor, optionally pinned to a location.

        If the actor defines ``run``, a process for it is scheduled
        immediately.
        """
        if getattr(actor, "kernel", None) is not None:
            raise KernelError("actor already spawned")
        if location is not None and not location.active:
            raise DeadLocationError("cannot spawn on an inactive location")
        actor.kernel = self
        actor.location = location
        if not getattr(actor, "name", ""):
            actor.name = f"{type(actor).__name__.lower()}-{self._next_actor_id}"
        self._next_actor_id += 1
        actor._cond_waiters = []       # condition-blocked processes, oldest first
        actor._lock_holder = None      # process mid-cost, if any
        actor._lock_waiters = []
        self._event(actor.name, "spawn", actor.name)
        if callable(getattr(actor, "run", None)):
            self._enqueue(actor, "run", (), Future(), sender="kernel")
        return actor

    def post(self, target: Actor, method: str, *args: Any) -> Future:
        """Inject a message from outside any actor (tests, world building)."""
        return self._enqueue(target, method, args, Future(), sender="env")

    def now(self) -> Fraction:
        return self.clock

    # -- internal plumbing -------------------------------------------------

    def _event(self, actor: str, kind: str, detail: str = "") -> None:
        if self.events is not None:
            self.events.append((self.clock, actor, kind, detail))

    def _push(self, time: Fraction, payload) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, payload))

    def _enqueue(self, target: Actor, method: str, args: tuple,
                 future: Future, sender: str) -> Future:
        if getattr(target, "kernel", None) is not self:
            raise KernelError("send target was never spawned")
        loc = target.location
        if loc is not None and not loc.active:
            # Messages to an actor on a dead machine vanish; the future
            # stays unresolved forever.
            self._event(sender, "send-lost", f"{target.name}.{method}")
            return future
        proc = Process(self._next_pid, target, method, args, future)
        self._next_pid += 1
        self._ready.append(proc)
        self._event(sender, "send", f"{target.name}.{method}")
        return future

    def _make_ready(self, proc: Process) -> None:
        proc.state = _READY
        self._ready.append(proc)

    def _finish(self, proc: Process, value: Any) -> None:
        proc.state = _DONE
        fut = proc.future
        if fut is not None:
            fut._resolve(value)
            self._event(proc.actor.name, "resolve", proc.method)
            waiters = fut._waiters
            if waiters:
                for w in waiters:
                    w.value_in = value
                    self._blocked -= 1
                    self._make_ready(w)
                fut._waiters = []

    def _release_lock(self, actor: Actor) -> None:
        actor._lock_holder = None
        waiters = actor._lock_waiters
        if waiters:
            for w in waiters:
                self._blocked -= 1
                self._make_ready(w)
            actor._lock_waiters = []

    def _scan_conditions(self, actor: Actor) -> None:
        """Wake the oldest condition-blocked process whose predicate holds.

        One process at a time: the woken process re-checks its predicate at
        dispatch, and every dispatch on the actor ends with another scan, so
        chained wake-ups still reach everyone once the state allows it.
        """
        waiters = actor._cond_waiters
        for i, proc in enumerate(waiters):
            if proc.guard():
                del waiters[i]
                self._blocked -= 1
                self._make_ready(proc)
                return

    def location_busy(self, location: Any) -> bool:
        """True while any cost task is consuming the location."""
        work = self._works.get(location)
        return work is not None and bool(work.tasks)

    def _settle(self, work: _Work, at: Fraction) -> None:
        """Charge linear consumption since the last settlement; finish tasks."""
        elapsed = at - work.settled_at
        work.settled_at = at
        if elapsed == 0 or not work.tasks:
            return
        share = work.location.speed * elapsed / len(work.tasks)
        work.location.consumed += share * len(work.tasks)
        done = None
        for proc in work.tasks:
            proc.remaining -= share
            if proc.remaining == 0:
                if done is None:
                    done = [proc]
                else:
                    done.append(proc)
        if done:
            work.version += 1
            for proc in done:
                work.tasks.remove(proc)
                self._event(proc.actor.name, "cost-done", proc.method)
                # The actor's lock stays with proc: finishing a cost is not
                # a release point, the continuation runs before anything
                # else on this actor.
                self._make_ready(proc)
            if work.tasks:
                self._push(work.next_done(), ("work", work, work.version))

    def _start_cost(self, proc: Process, amount: Fraction) -> None:
        loc = proc.actor.location
        work = self._works.get(loc)
        if work is None:
            work = _Work(loc, self.clock)
            self._works[loc] = work
        else:
            self._settle(work, self.clock)
        proc.remaining = amount
        proc.state = _CONSUMING
        proc.actor._lock_holder = proc
        work.tasks.append(proc)
        work.version += 1
        self._push(work.next_done(), ("work", work, work.version))
        self._event(proc.actor.name, "cost-start", str(amount))

    # -- the run loop ------------------------------------------------------

    def run(self, until: Any) -> RunOutcome:
        """Execute until the next event would fall after ``until``.

        Returns the outcome; ``deadlocked`` reports whether blocked
        processes remained with no future event to wake anything.
        """
        horizon = _as_rational(until, "horizon")
        ready = self._ready
        rng = self.rng
        heap = self._heap
        while True:
            if ready:
                i = rng.randrange(len(ready))
                last = ready.pop()
                if i < len(ready):
                    proc = ready[i]
                    ready[i] = last
                else:
                    proc = last
                self._dispatch(proc)
                continue
            # Clock phase: find the earliest still-valid event.
            while heap:
                time, _, payload = heap[0]
                if payload[0] == "work" and payload[1].version != payload[2]:
                    heapq.heappop(heap)
                    continue
                break
            if not heap:
                if self._blocked:
                    self.deadlocked = True
                    self._event("kernel", "deadlock", f"{self._blocked} blocked")
                break
            time = heap[0][0]
            if time > horizon:
                break
            if time != self.clock:
                self.clock = time
                self._event("kernel", "advance", str(time))
            # Apply every event due now; later ones wait for the next pass.
            while heap and heap[0][0] == time:
                _, _, payload = heapq.heappop(heap)
                if payload[0] == "wake":
                    proc = payload[1]
                    self._event(proc.actor.name, "wake", proc.method)
                    self._make_ready(proc)
                else:
                    work = payload[1]
                    if work.version == payload[2]:
                        self._settle(work, time)
        return RunOutcome(self.clock, self.steps, self.deadlocked)

    def _dispatch(self, proc: Process) -> None:
        actor = proc.actor
        if proc.guard is not None:
            # Condition processes re-check on dispatch; the state may have
            # been consumed by someone who ran between wake and dispatch.
            if not proc.guard():
                proc.state = _COND_WAIT
                self._blocked += 1
                actor._cond_waiters.append(proc)
                self._scan_conditions(actor)
                return
            proc.guard = None
        if actor._lock_holder is not None and actor._lock_holder is not proc:
            proc.state = _LOCK_WAIT
            self._blocked += 1
            actor._lock_waiters.append(proc)
            return
        self.steps += 1
        gen = proc.gen
        if gen is None:
            self._event(actor.name, "begin", proc.method)
            fn = getattr(actor, proc.method, None)
            if fn is None:
                raise KernelError(
                    f"{actor.name} has no method {proc.method!r}")
            result = fn(*proc.args)
            if not isinstance(result, GeneratorType):
                self._finish(proc, result)
                self._epilogue(proc, actor)
                return
            proc.gen = gen = result
        value = proc.value_in
        proc.value_in = None
        while True:
            try:
                effect = gen.send(value)
            except StopIteration as stop:
                self._event(actor.name, "end", proc.method)
                self._finish(proc, stop.value)
                break
            cls = type(effect)
            if cls is Send:
                value = self._enqueue(effect.target, effect.method,
                                      effect.args, Future(), sender=actor.name)
                continue
            if cls is AwaitFuture:
                fut = effect.future
                if fut.resolved:
                    # A release point even when the value is already there:
                    # the process goes back through the scheduler.
                    proc.value_in = fut.value
                    self._make_ready(proc)
                else:
                    proc.state = _FUT_WAIT
                    self._blocked += 1
                    fut._waiters.append(proc)
                    self._event(actor.name, "await", proc.method)
                break
            if cls is AwaitDuration:
                low = _as_rational(effect.low, "duration low bound")
                high = _as_rational(effect.high, "duration high bound")
                if low < 0 or high < low:
                    raise BadDurationError(f"bad duration [{low}, {high}]")
                if low == 0:
                    self._make_ready(proc)
                else:
                    proc.state = _SLEEPING
                    self._push(self.clock + low, ("wake", proc))
                    self._event(actor.name, "sleep", str(low))
                break
            if cls is AwaitCondition:
                pred = effect.predicate
                proc.guard = pred
                if pred():
                    self._make_ready(proc)
                else:
                    proc.state = _COND_WAIT
                    self._blocked += 1
                    actor._cond_waiters.append(proc)
                    self._event(actor.name, "block", proc.method)
                break
            if cls is Cost:
                amount = _as_rational(effect.amount, "cost")
                if amount < 0:
                    raise KernelError(f"negative cost {amount}")
                loc = actor.location
                if loc is None or amount == 0:
                    # No machine to meter (environment actors) or nothing
                    # to consume: the annotation is free and instantaneous.
                    value = None
                    continue
                if not loc.active:
                    raise DeadLocationError(
                        f"{actor.name} ran cost on an inactive location")
                self._start_cost(proc, amount)
                break
            raise KernelError(f"unknown effect {effect!r}")
        self._epilogue(proc, actor)

    def _epilogue(self, proc: Process, actor: Actor) -> None:
        # Awaits, suspensions and completion are release points; sitting in
        # or resuming from a cost is not.
        if actor._lock_holder is proc and proc.state != _CONSUMING:
            self._release_lock(actor)
        self._scan_conditions(actor)

    # -- introspection -----------------------------------------------------

    def trace_lines(self) -> Iterable[str]:
        """Trace as ``time,actor,event,detail`` lines (tracing must be on)."""
        if self.events is None:
            raise KernelError("kernel was created with trace=False")
        for time, actor, kind, detail in self.events:
            yield f"{time},{actor},{kind},{detail}"
