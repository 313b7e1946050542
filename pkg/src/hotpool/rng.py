"""Seeded pseudo-random number generation with stable integer semantics.

The scheduler draws every random choice from PCG32 (O'Neill's XSH-RR
64/32 variant) so that a run is a pure function of its seed, independent
of platform, Python version, or hash randomization.  SplitMix64 stretches
one master seed into well-separated per-run seeds.  Both generators are
small enough to pin down exactly in tests.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1

_PCG_MULT = 6364136223846793005
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """Return the SplitMix64 output for the state *after* one increment."""
    z = (state + _SPLITMIX_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Seed for run number ``run_index`` (0-based) under ``master_seed``.

    Equivalent to seeding SplitMix64 with the master seed and taking
    output ``run_index + 1``; consecutive runs get decorrelated streams
    while remaining reproducible from the single configured seed.
    """
    if run_index < 0:
        raise ValueError("run_index must be >= 0")
    state = (master_seed + run_index * _SPLITMIX_GAMMA) & MASK64
    return splitmix64(state)


class Pcg32:
    """PCG32 generator: 64-bit LCG state, XSH-RR output, 32-bit draws."""

    __slots__ = ("state", "inc")

    def __init__(self, seed: int, seq: int = 0):
        self.inc = (((seq << 1) | 1)) & MASK64
        self.state = 0
        self._step()
        self.state = (self.state + (seed & MASK64)) & MASK64
        self._step()

    def _step(self) -> None:
        self.state = (self.state * _PCG_MULT + self.inc) & MASK64

    def next_u32(self) -> int:
        old = self.state
        self.state = (old * _PCG_MULT + self.inc) & MASK64
        xorshifted = ((old >> 18) ^ old) >> 27 & MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << (32 - rot & 31))) & MASK32

    def randrange(self, bound: int) -> int:
        """Uniform integer in [0, bound) with no modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # Rejection sampling over the low end of the 32-bit range, as in
        # pcg32_boundedrand_r: reject draws below 2**32 mod bound.
        threshold = (1 << 32) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound
