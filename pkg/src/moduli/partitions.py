"""Exact rational plumbing and the shared combinatorial substrate.

Everything downstream (Hurwitz counts, intersection numbers, spin
correlators) is an exact rational built out of integer partitions,
automorphism factors and small enumerations, so those live here.
Rationals are plain ``fractions.Fraction`` values; the helpers below pin
the "p/q" wire format used by the CLI and cache files.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Iterator, Sequence, TypeVar

__all__ = [
    "Partition",
    "RamificationProfile",
    "NonIntegralGenus",
    "NegativeGenus",
    "aut_partition",
    "aut_sequence",
    "riemann_hurwitz_genus",
    "partitions_of",
    "all_partitions",
    "subsets",
    "binomial",
    "factorial",
    "format_rational",
    "parse_rational",
]

#: A partition is a nonincreasing tuple of positive integers.
Partition = tuple[int, ...]

T = TypeVar("T")


class NonIntegralGenus(ValueError):
    """Ramification data whose branching defect is odd."""


class NegativeGenus(ValueError):
    """Ramification data that would force genus < 0."""


def as_partition(parts: Iterable[int]) -> Partition:
    """Normalize ``parts`` into a valid partition tuple (sorted, positive)."""
    p = tuple(sorted(parts, reverse=True))
    if not p or p[-1] < 1:
        raise ValueError(f"not a partition: {parts!r}")
    return p


def aut_partition(p: Sequence[int]) -> int:
    """Number of order-preserving symmetries: prod over values of mult!."""
    out = 1
    for mult in Counter(p).values():
        out *= factorial(mult)
    return out


def aut_sequence(xs: Iterable[T]) -> int:
    """aut of a multiset of arbitrary comparable items (empty -> 1)."""
    out = 1
    for mult in Counter(xs).values():
        out *= factorial(mult)
    return out


@dataclass(frozen=True)
class RamificationProfile:
    """Degree n together with the branch-point passports.

    Each passport is a partition of n recording preimage multiplicities
    over one branch point.  The profile is valid only if the total
    branching defect is even and at least 2n-2 (genus >= 0).
    """

    degree: int
    passports: tuple[Partition, ...]

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError("degree must be positive")
        object.__setattr__(
            self, "passports", tuple(as_partition(p) for p in self.passports)
        )
        for p in self.passports:
            if sum(p) != self.degree:
                raise ValueError(f"passport {p} does not sum to degree {self.degree}")

    @property
    def num_branch_points(self) -> int:
        return len(self.passports)

    def genus(self) -> int:
        return riemann_hurwitz_genus(self)


def riemann_hurwitz_genus(profile: RamificationProfile) -> int:
    """Genus g with sum of (a-1) over all passport entries = 2n-2+2g.

    Raises NonIntegralGenus / NegativeGenus when no valid g exists.
    """
    defect = sum(sum(a - 1 for a in p) for p in profile.passports)
    excess = defect - (2 * profile.degree - 2)
    if excess % 2 != 0:
        raise NonIntegralGenus(
            f"branching defect {defect} has wrong parity for degree {profile.degree}"
        )
    g = excess // 2
    if g < 0:
        raise NegativeGenus(f"profile forces genus {g} < 0")
    return g


def partitions_of(a: int, j: int) -> list[Partition]:
    """All nonincreasing j-tuples of positive integers summing to a."""
    if j < 1 or j > a:
        return []
    out: list[Partition] = []

    def extend(prefix: list[int], remaining: int, slots: int, cap: int) -> None:
        if slots == 1:
            if remaining <= cap:
                out.append(tuple(prefix + [remaining]))
            return
        # each remaining slot needs at least 1
        for v in range(min(cap, remaining - (slots - 1)), 0, -1):
            extend(prefix + [v], remaining - v, slots - 1, v)

    extend([], a, j, a)
    return out


def all_partitions(a: int) -> list[Partition]:
    """All partitions of a (any length)."""
    return [p for j in range(1, a + 1) for p in partitions_of(a, j)]


def subsets(s: Iterable[T]) -> Iterator[tuple[T, ...]]:
    """All 2^|s| subsets of s, each exactly once, as tuples."""
    items = list(s)
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


def binomial(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise ValueError("binomial arguments must be nonnegative")
    return comb(n, k)


def format_rational(x: Fraction | int) -> str:
    """Serialize as "p/q", or "p" when the denominator is 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    """Inverse of format_rational (Fraction accepts both shapes)."""
    return Fraction(s.strip())
