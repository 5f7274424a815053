"""Order distributions: the histogram ``order -> count`` of a finite group."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping


@dataclass(frozen=True)
class OrderDistribution:
    """Element-order histogram of a finite group.

    ``entries`` is a sorted tuple of ``(order, count)`` pairs; ``total`` is
    the group order.
    """

    entries: tuple[tuple[int, int], ...]
    total: int

    def __post_init__(self):
        counts = dict(self.entries)
        if counts.get(1) != 1:
            raise ValueError("exactly one element of order 1 is required")
        if sum(counts.values()) != self.total:
            raise ValueError("counts do not sum to the group order")
        for d, c in self.entries:
            if c <= 0 or d <= 0:
                raise ValueError(f"bad entry {d}:{c}")
            if self.total % d:
                raise ValueError(f"order {d} does not divide |G| = {self.total}")

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> OrderDistribution:
        entries = tuple(sorted((int(d), int(c)) for d, c in counts.items() if c))
        return cls(entries, sum(c for _, c in entries))

    @classmethod
    def trivial(cls) -> OrderDistribution:
        return cls(((1, 1),), 1)

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    @property
    def exponent(self) -> int:
        return math.lcm(*(d for d, _ in self.entries))

    def __str__(self):
        return "{" + ", ".join(f"{d}:{c}" for d, c in self.entries) + "}"


def lcm_convolve(d1: OrderDistribution, d2: OrderDistribution) -> OrderDistribution:
    """Order distribution of the direct product of the two groups."""
    out: dict[int, int] = {}
    for a, ca in d1.entries:
        for b, cb in d2.entries:
            d = a * b // math.gcd(a, b)
            out[d] = out.get(d, 0) + ca * cb
    return OrderDistribution.from_counts(out)


def psi(dist: OrderDistribution) -> int:
    """Sum of element orders."""
    return sum(d * c for d, c in dist.entries)
