"""Keyed, splittable random streams.

Every stream is identified by a 64-bit key derived from a root seed and a
path of non-negative integers (sample index, jump index, channel, ...).
Keys are derived with the SplitMix64 finalizer and each stream is a
SplitMix64 sequence started at its key, so a stream can be rebuilt from its
path alone, on any platform and in any worker. The compiled core in
``_core.pyx`` implements the same arithmetic bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .errors import InvalidRate

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
ROOT_SALT = 0x5851F42D4C957F2D
TWO_M53 = 1.0 / 9007199254740992.0
# Poisson means above this are split into chunks so exp(-mean) never underflows.
POISSON_CHUNK = 30.0


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def root_key(seed: int) -> int:
    return mix64((seed & MASK64) ^ ROOT_SALT)


def child_key(key: int, index: int) -> int:
    return mix64(mix64(key) ^ (((index + 1) * GOLDEN) & MASK64))


class Stream:
    """Sequential generator over one key. Not shared between workers."""

    __slots__ = ("key", "_state")

    def __init__(self, key: int):
        self.key = key & MASK64
        self._state = self.key

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform variate on (0, 1]; never exactly zero."""
        return ((self.next_u64() >> 11) + 1) * TWO_M53

    def exponential(self, rate: float) -> float:
        if not rate > 0:
            raise InvalidRate(f"exponential rate must be positive, got {rate}")
        return -math.log(self.uniform()) / rate

    def poisson(self, mean: float) -> int:
        if not (mean >= 0) or math.isinf(mean):
            raise InvalidRate(f"Poisson mean must be finite and >= 0, got {mean}")
        n = 0
        while mean > POISSON_CHUNK:
            n += self._poisson_inversion(POISSON_CHUNK)
            mean -= POISSON_CHUNK
        if mean > 0:
            n += self._poisson_inversion(mean)
        return n

    def _poisson_inversion(self, mean: float) -> int:
        u = self.uniform()
        p = math.exp(-mean)
        cdf = p
        k = 0
        while u > cdf and p > 0.0:
            k += 1
            p = p * mean / k
            cdf += p
        return k


@dataclass(frozen=True)
class StreamKey:
    """Address of an independent stream: root seed plus a nesting path."""

    root_seed: int
    path: Tuple[int, ...] = ()

    @property
    def key(self) -> int:
        k = root_key(self.root_seed)
        for idx in self.path:
            k = child_key(k, idx)
        return k

    def child(self, *indices: int) -> "StreamKey":
        return StreamKey(self.root_seed, self.path + tuple(indices))

    def stream(self) -> Stream:
        return Stream(self.key)


def uniform(stream: Stream) -> float:
    return stream.uniform()


def exponential(stream: Stream, rate: float) -> float:
    return stream.exponential(rate)


def poisson(stream: Stream, mean: float) -> int:
    return stream.poisson(mean)
