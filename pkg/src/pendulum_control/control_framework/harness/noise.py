# src/pendulum_control/control_framework/harness/noise.py

"""
Reproducible bounded torque noise.

The generator is xoshiro256** (Blackman and Vigna) seeded by expanding a 64-bit seed
with SplitMix64. Everything is pinned so sequences can be reproduced bit for bit in any
language:

    SplitMix64:  state += 0x9E3779B97F4A7C15
                 z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                 out = z ^ (z >> 31)
    seeding:     s0..s3 = four successive SplitMix64 outputs starting from state = seed
    xoshiro256**: out = rotl(s1 * 5, 7) * 9, then the standard xoshiro256 state update
    uniform:     u = (out >> 11) * 2**-53 in [0, 1);  x = lo + (hi - lo) * u
    split:       child seed = first SplitMix64 output from state = seed ^ (stream * 0xD1B54A32D192ED03)

All arithmetic is modulo 2**64.
"""

import logging
from dataclasses import dataclass
from typing import List

from pendulum_control.control_framework.core.errors import ConfigError

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
SPLIT_MULTIPLIER = 0xD1B54A32D192ED03
TWO_POW_M53 = 2.0 ** -53


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """Seed of an independent child stream."""
    return SplitMix64(seed ^ ((stream * SPLIT_MULTIPLIER) & MASK64)).next()


class Xoshiro256StarStar:
    def __init__(self, seed: int):
        expander = SplitMix64(seed)
        self.s = [expander.next() for _ in range(4)]

    def next(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next() >> 11) * TWO_POW_M53

    def uniform(self, lo: float, hi: float) -> float:
        return min(hi, lo + (hi - lo) * self.random())


@dataclass(frozen=True)
class NoiseConfig:
    """Bounded uniform torque noise in [lo, hi] N m."""
    lo: float
    hi: float
    seed: int = 0

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ConfigError(f"noise interval is empty: lo={self.lo} > hi={self.hi}")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


class NoiseStream:
    """Draws noise values one at a time, in the same order as uniform_noise()."""

    def __init__(self, cfg: NoiseConfig):
        self.cfg = cfg
        self._rng = Xoshiro256StarStar(cfg.seed)

    def draw(self) -> float:
        return self._rng.uniform(self.cfg.lo, self.cfg.hi)


def uniform_noise(cfg: NoiseConfig, n: int) -> List[float]:
    if n < 0:
        raise ConfigError(f"sample count must be non-negative, got {n}")
    stream = NoiseStream(cfg)
    return [stream.draw() for _ in range(n)]


def zero_noise(seed: int = 0) -> NoiseConfig:
    return NoiseConfig(lo=0.0, hi=0.0, seed=seed)
