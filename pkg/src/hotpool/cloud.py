"""Virtual machines rented from a billing cloud provider.

A machine is a kernel location: actors pinned to it consume its ``speed``
through ``Cost`` effects, with the speed split equally among concurrent
tasks.  The provider tracks launch and shutdown instants and charges a
flat price per machine at every billing boundary (multiples of the
billing period) at which the machine is up.  A machine shut down exactly
at a boundary is not charged for it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Optional

from .kernel import Kernel, ZERO

SPEED = "Speed"

_KNOWN_UNSUPPORTED = ("Memory", "Bandwidth", "Cores", "Startupduration")


class CloudError(Exception):
    """Invalid request to the cloud provider."""


class VirtualMachine:
    """One rented machine.  Satisfies the kernel's location protocol."""

    __slots__ = ("id", "speed", "active", "launched_at", "shutdown_at",
                 "consumed")

    def __init__(self, vm_id: int, speed: Fraction, launched_at: Fraction):
        self.id = vm_id
        self.speed = speed
        self.active = True
        self.launched_at = launched_at
        self.shutdown_at: Optional[Fraction] = None
        self.consumed: Fraction = ZERO

    def __repr__(self) -> str:
        state = "up" if self.active else "down"
        return f"VirtualMachine(id={self.id}, speed={self.speed}, {state})"


def _as_speed(value: Any) -> Fraction:
    try:
        speed = value if type(value) is Fraction else Fraction(value)
    except (TypeError, ValueError) as exc:
        raise CloudError(f"bad capacity: speed {value!r} is not a rational") from exc
    if speed <= 0:
        raise CloudError(f"bad capacity: speed must be positive, got {speed}")
    return speed


class CloudProvider:
    """Launches and shuts down machines; meters cost at billing boundaries."""

    def __init__(self, kernel: Kernel, price: Any = 50, period: Any = 5):
        self.kernel = kernel
        self.price = Fraction(price)
        self.period = Fraction(period)
        if self.price <= 0 or self.period <= 0:
            raise CloudError("price and period must be positive")
        self.instances: list[VirtualMachine] = []
        self._active = 0

    def launch_instance(self, capacity: dict) -> VirtualMachine:
        """Provision a machine with the requested capacity, available now.

        Only the ``Speed`` resource is supported; asking for anything else
        is rejected rather than silently ignored.
        """
        if SPEED not in capacity:
            raise CloudError("bad capacity: no Speed requested")
        for kind in capacity:
            if kind != SPEED:
                raise CloudError(f"unsupported resource {kind!r}")
        vm = VirtualMachine(len(self.instances) + 1, _as_speed(capacity[SPEED]),
                            self.kernel.now())
        self.instances.append(vm)
        self._active += 1
        return vm

    def shutdown_instance(self, vm: VirtualMachine) -> bool:
        """Retire a machine.  Refused (returns False) if it is already down
        or still executing a cost task."""
        if not vm.active:
            return False
        if self.kernel.location_busy(vm):
            return False
        vm.active = False
        vm.shutdown_at = self.kernel.now()
        self._active -= 1
        return True

    def active_count(self) -> int:
        return self._active

    def accumulated_cost(self, until: Any) -> Fraction:
        """Total billed cost over (0, until].

        Each machine is charged ``price`` at every boundary k*period in
        that window where it was launched at or before the boundary and
        not yet shut down (shutdown exactly at the boundary escapes the
        charge).
        """
        t = Fraction(until)
        if t < 0:
            raise CloudError("billing horizon must be >= 0")
        boundaries = math.floor(t / self.period)
        total = ZERO
        for vm in self.instances:
            # First boundary at or after launch, but at least period itself.
            k_lo = max(1, math.ceil(vm.launched_at / self.period))
            if vm.shutdown_at is None:
                k_hi = boundaries
            else:
                # Last boundary strictly before shutdown.
                k_hi = min(boundaries,
                           math.ceil(vm.shutdown_at / self.period) - 1)
            if k_hi >= k_lo:
                total += self.price * (k_hi - k_lo + 1)
        return total
