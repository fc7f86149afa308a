"""Portable seeded random streams.

SplitMix64 is used instead of :mod:`random` so that a seed maps to the same
boards and fallback draws in any language that reimplements these few lines.
"""

from __future__ import annotations

from typing import MutableSequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood constants)."""

    __slots__ = ("state",)

    def __init__(self, state: int) -> None:
        self.state = state & MASK64

    @classmethod
    def for_stream(cls, seed: int, stream_key: int) -> "SplitMix64":
        return cls((seed & MASK64) ^ stream_key)

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def shuffle(self, items: MutableSequence[T], prefix: int | None = None) -> None:
        """Forward Fisher-Yates; with ``prefix`` only the first positions are fixed.

        Stopping after ``prefix`` swaps leaves ``items[:prefix]`` distributed
        exactly as in a full shuffle.
        """
        n = len(items)
        stop = n - 1 if prefix is None else min(prefix, n - 1)
        for i in range(stop):
            j = i + self.below(n - i)
            items[i], items[j] = items[j], items[i]

    def choice(self, items: list[T]) -> T:
        return items[self.below(len(items))]
