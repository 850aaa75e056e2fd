"""Seeded randomness and the unit-rate Poisson event clock.

Every randomized optimizer in this package is driven by an ordered
sequence of event times whose increments are i.i.d. Exponential(1).
Sampling goes through the inverse CDF so that a (master_seed, stream_id)
pair reproduces the exact same bit pattern on every platform; rejection
samplers do not give that guarantee.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SeededRng",
    "JumpSchedule",
    "derive_stream_id",
    "increment_from_uniform",
    "sample_increment",
    "build_schedule",
]

_MASK64 = (1 << 64) - 1


def derive_stream_id(config_id: str, run_index: int) -> int:
    """Stable 64-bit stream id for one run of one configuration.

    blake2b keeps the derivation independent of Python's hash
    randomization, so individual CSV rows can be regenerated.
    """
    digest = hashlib.blake2b(
        f"{config_id}|run={run_index}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") & _MASK64


@dataclass
class SeededRng:
    """A PCG64 stream keyed by (master_seed, stream_id).

    The pair fully determines the sample sequence; distinct stream_ids
    give statistically independent streams. A SeededRng is owned by a
    single run and never shared across threads.
    """

    master_seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 bits")
        if not 0 <= self.stream_id <= _MASK64:
            raise ValueError("stream_id must fit in 64 bits")
        seq = np.random.SeedSequence((self.master_seed, self.stream_id))
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def uniform(self) -> float:
        """One double in [0, 1)."""
        return float(self._gen.random())

    def standard_normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def integers(self, high: int, size=None):
        """Uniform integers in [0, high)."""
        return self._gen.integers(0, high, size=size)

    def spawn(self, tag: str) -> "SeededRng":
        """Child stream for a named sub-purpose of this run."""
        child = hashlib.blake2b(
            f"{self.stream_id}|{tag}".encode(), digest_size=8
        ).digest()
        return SeededRng(self.master_seed, int.from_bytes(child, "big") & _MASK64)


@dataclass(frozen=True)
class JumpSchedule:
    """Ordered event times T_1 < T_2 < ... with Exponential(1) increments."""

    times: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1:
            raise ValueError("times must be a 1-d sequence")
        if t.size and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("times must be strictly increasing and positive")

    def __len__(self) -> int:
        return int(self.times.size)


def increment_from_uniform(u: float) -> float:
    """Inverse CDF of Exponential(1) at u in [0, 1).

    -log1p(-u) maps u=0 to 0+ and never evaluates log(0), so increments
    are finite and positive for every representable draw.
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    return -math.log1p(-u)


def sample_increment(rng: SeededRng) -> float:
    """One Exponential(1) waiting time; advances the stream."""
    u = rng.uniform()
    delta = increment_from_uniform(u)
    if delta <= 0.0:
        # u == 0.0 maps to 0.0; treat as the smallest positive subnormal
        # step so schedules stay strictly increasing.
        delta = 5e-324
    return delta


def build_schedule(rng: SeededRng, k_max: int) -> JumpSchedule:
    """Event times T_1..T_{k_max} as the running sum of k_max increments."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1; an empty schedule drives nothing")
    increments = np.empty(k_max, dtype=float)
    for k in range(k_max):
        increments[k] = sample_increment(rng)
    return JumpSchedule(times=np.cumsum(increments))
