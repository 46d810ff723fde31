"""Hurwitz numbers of ramified covers of the sphere, three ways.

h(g,n|A_1,...,A_m) counts degree-n covers with passport A_i over the
i-th branch point, each cover weighted by 1/|aut|.  Equivalently it is
    (1/n!) #{(s_1,...,s_m) : s_i in class C_{A_i}, s_1...s_m = id,
             <s_1,...,s_m> transitive},
which is what the two combinatorial evaluators here compute:

* ``hurwitz_bruteforce`` enumerates the factorizations directly (small n);
* ``hurwitz_class_algebra`` convolves class sums in the center of the
  symmetric-group algebra, valid whenever some passport is the full
  cycle (n) so that transitivity is automatic;
* ``hurwitz_polynomial_closed`` is the genus-0 product formula for
  profiles with a point of total ramification.

On top of these sit the one-full-cycle numbers H(g;n) (all other branch
points simple), the cross-sum expressing <tau_{3g} tau_0^2>_g through
them, and the difference table S(k1,k2) of psi-integrals over
two-pointed ramification cycles whose diagonal is fixed by H(g;K).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterator

from .partitions import (
    Partition,
    RamificationProfile,
    all_partitions,
    aut_partition,
    as_partition,
    riemann_hurwitz_genus,
)

__all__ = [
    "DegreeTooLarge",
    "NoFullCyclePassport",
    "PreconditionViolated",
    "DomainViolation",
    "HurwitzQuery",
    "hurwitz_bruteforce",
    "hurwitz_class_algebra",
    "class_sum_convolve",
    "hurwitz_polynomial_closed",
    "H_generalized",
    "H1_closed",
    "tau3g_from_hurwitz",
    "combinatorial_identity",
    "delta_psi_integral",
    "S_difference_table",
    "cycle_type",
    "conjugacy_class_size",
    "conjugacy_class_elements",
]


class DegreeTooLarge(ValueError):
    """Degree or class size beyond the configured enumeration guard."""


class NoFullCyclePassport(ValueError):
    """Class-algebra evaluation needs a passport equal to (n)."""


class PreconditionViolated(ValueError):
    """Profile outside the domain of a closed-form evaluator."""


class DomainViolation(ValueError):
    """S(k1,k2) queried outside k2 >= 1, k2 <= k1 <= k2 + g."""


@dataclass(frozen=True)
class HurwitzQuery:
    """A profile together with its (redundant) genus, checked to agree."""

    profile: RamificationProfile
    genus: int

    def __post_init__(self) -> None:
        actual = riemann_hurwitz_genus(self.profile)
        if actual != self.genus:
            raise ValueError(
                f"profile has genus {actual}, query claims {self.genus}"
            )


# ---------------------------------------------------------------------------
# permutations (tuples of images on range(n))


def compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """'p then q' as mappings: result[i] = q[p[i]]."""
    return tuple(q[pi] for pi in p)


def inverse(p: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, pi in enumerate(p):
        out[pi] = i
    return tuple(out)


def cycle_type(p: tuple[int, ...]) -> Partition:
    n = len(p)
    seen = [False] * n
    lengths = []
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


def class_representative(lam: Partition) -> tuple[int, ...]:
    """A permutation with cycle type lam, cycling consecutive blocks."""
    n = sum(lam)
    p = list(range(n))
    start = 0
    for length in lam:
        for k in range(length):
            p[start + k] = start + (k + 1) % length
        start += length
    return tuple(p)


def conjugacy_class_size(lam: Partition) -> int:
    """n!/z_lam with z_lam = prod(l^{m_l} m_l!)."""
    n = sum(lam)
    z = 1
    for length, mult in Counter(lam).items():
        z *= length**mult * factorial(mult)
    return factorial(n) // z


def conjugacy_class_elements(lam: Partition) -> Iterator[tuple[int, ...]]:
    """All permutations of S_n with cycle type lam, each exactly once.

    Cycles are anchored at the smallest unused point, which kills the
    overcount among equal cycle lengths.
    """
    n = sum(lam)

    def build(p: list[int], unused: list[int], remaining: tuple[int, ...]):
        if not unused:
            yield tuple(p)
            return
        anchor = unused[0]
        rest = unused[1:]
        for length in sorted(set(remaining)):
            idx = remaining.index(length)
            next_remaining = remaining[:idx] + remaining[idx + 1 :]
            for tail in itertools.permutations(rest, length - 1):
                cyc = (anchor,) + tail
                for k in range(length):
                    p[cyc[k]] = cyc[(k + 1) % length]
                left = [u for u in rest if u not in tail]
                yield from build(p, left, next_remaining)
        # p entries get overwritten on the next pass; no cleanup needed

    yield from build(list(range(n)), list(range(n)), tuple(lam))


def _is_transitive(perms: list[tuple[int, ...]], n: int) -> bool:
    if n == 1:
        return True
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = n
    for p in perms:
        for i, pi in enumerate(p):
            ri, rj = find(i), find(pi)
            if ri != rj:
                parent[ri] = rj
                components -= 1
    return components == 1


# ---------------------------------------------------------------------------
# the three Hurwitz evaluators


def hurwitz_bruteforce(
    profile: RamificationProfile, max_degree: int = 7
) -> Fraction:
    """Weighted factorization count by direct enumeration.

    The two largest classes are not enumerated: one factor is pinned to
    a fixed representative (conjugation symmetry), the other is the one
    permutation forced by the product-equals-identity constraint.
    """
    n = profile.degree
    if n > max_degree:
        raise DegreeTooLarge(f"degree {n} > brute-force guard {max_degree}")
    riemann_hurwitz_genus(profile)  # validity check
    passports = list(profile.passports)
    m = len(passports)

    if m == 0:
        return Fraction(int(n == 1))
    if m == 1:
        # product of one factor is the identity
        ok = passports[0] == (1,) * n and _is_transitive([], n)
        return Fraction(int(ok) * conjugacy_class_size(passports[0]), factorial(n))

    sizes = [conjugacy_class_size(p) for p in passports]
    order = sorted(range(m), key=lambda i: sizes[i])
    fixed, determined = order[-1], order[-2]
    enum_indices = [i for i in range(m) if i not in (fixed, determined)]

    rep = class_representative(passports[fixed])
    target_type = passports[determined]
    count = 0
    pools = [list(conjugacy_class_elements(passports[i])) for i in enum_indices]
    for choice in itertools.product(*pools):
        sigma = {i: s for i, s in zip(enum_indices, choice)}
        sigma[fixed] = rep
        # before * s_det * after = id forces s_det = before^-1 * after^-1
        before = tuple(range(n))
        for i in range(determined):
            before = compose(before, sigma[i])
        after = tuple(range(n))
        for i in range(determined + 1, m):
            after = compose(after, sigma[i])
        s_det = compose(inverse(before), inverse(after))
        if cycle_type(s_det) != target_type:
            continue
        if _is_transitive([*sigma.values(), s_det], n):
            count += 1
    return Fraction(count * sizes[fixed], factorial(n))


def class_sum_convolve(
    weights: dict[Partition, int],
    passport: Partition,
    n: int,
    max_class_elements: int = 10**6,
) -> dict[Partition, int]:
    """One convolution with a class sum in the center of the group algebra.

    `weights` holds a class function on S_n by its per-element values;
    the result is f'(pi) = sum_{t in C_passport} f(pi t^-1), again per
    element.  Total mass grows by exactly the class size.
    """
    size = conjugacy_class_size(passport)
    if size > max_class_elements:
        raise DegreeTooLarge(
            f"class of {passport} has {size} elements > guard {max_class_elements}"
        )
    taus_inv = [inverse(t) for t in conjugacy_class_elements(passport)]
    out = {}
    for lam in _classes_of(n):
        rep = class_representative(lam)
        out[lam] = sum(weights[cycle_type(compose(rep, tinv))] for tinv in taus_inv)
    return out


def hurwitz_class_algebra(
    profile: RamificationProfile,
    max_degree: int = 12,
    max_class_elements: int = 10**6,
) -> Fraction:
    """Factorization count via convolution in the class algebra.

    Walking the distribution of partial products over conjugacy classes:
    f_{k+1}(pi) = sum_{t in C_{k+1}} f_k(pi t^-1), stored per element on
    each class.  The full-cycle passport is never convolved; its count
    is read off at the end from the coefficient on the (n)-class, which
    also makes transitivity automatic (any group containing an n-cycle
    plus the generated factors acts transitively).
    """
    n = profile.degree
    if n > max_degree:
        raise DegreeTooLarge(f"degree {n} > class-algebra guard {max_degree}")
    riemann_hurwitz_genus(profile)
    full = (n,)
    passports = list(profile.passports)
    if full not in passports:
        raise NoFullCyclePassport(
            "class-algebra evaluation needs a passport equal to (n)"
        )
    passports.remove(full)

    # distribution of the empty product: the identity element
    weights: dict[Partition, int] = {lam: 0 for lam in _classes_of(n)}
    weights[(1,) * n] = 1
    for passport in sorted(passports, key=conjugacy_class_size):
        weights = class_sum_convolve(weights, passport, n, max_class_elements)

    count = weights[full] * conjugacy_class_size(full)
    return Fraction(count, factorial(n))


@lru_cache(maxsize=None)
def _classes_of(n: int) -> tuple[Partition, ...]:
    return tuple(all_partitions(n))


def hurwitz_polynomial_closed(profile: RamificationProfile) -> Fraction:
    """Genus-0 product formula for profiles with A_1 = (n):

        h = n^{m-3} * prod_{i>=2} (l_i - 1)! / |aut(A_i)|

    Equivalently: a fixed n-cycle factors into permutations of types
    A_2, ..., A_m in exactly n^{m-2} prod (l_i-1)!/|aut(A_i)| ways when
    the branching defect is minimal.  Requires m >= 3, genus 0, and the
    full-cycle passport listed first.
    """
    n = profile.degree
    passports = profile.passports
    m = len(passports)
    if m < 3:
        raise PreconditionViolated("product formula needs m >= 3 branch points")
    if passports[0] != (n,):
        raise PreconditionViolated("first passport must be the full cycle (n)")
    if riemann_hurwitz_genus(profile) != 0:
        raise PreconditionViolated("product formula is genus-0 only")
    value = Fraction(n ** (m - 3))
    for p in passports[1:]:
        value *= Fraction(factorial(len(p) - 1), aut_partition(p))
    return value


# ---------------------------------------------------------------------------
# one-full-cycle numbers H(g;n) and what they compute


def _simple_passport(n: int) -> Partition:
    return as_partition([2] + [1] * (n - 2))


@lru_cache(maxsize=None)
def H_generalized(g: int, n: int) -> Fraction:
    """H(g;n): full cycle over one point, 2g+n-1 simple branch points."""
    if g < 0 or n < 1:
        raise ValueError("need g >= 0 and n >= 1")
    if n == 1:
        # degree-1 covers exist only in genus 0 (the identity map)
        return Fraction(1) if g == 0 else Fraction(0)
    m = 2 * g + n
    profile = RamificationProfile(n, ((n,),) + (_simple_passport(n),) * (m - 1))
    return hurwitz_class_algebra(profile)


def H1_closed(l: int) -> Fraction:
    """Closed form H(1;l) = (l+1)! l^l (l-1) / (l! * 24)."""
    if l < 1:
        raise ValueError("need l >= 1")
    return Fraction(factorial(l + 1) * l**l * (l - 1), factorial(l) * 24)


def combinatorial_identity(g: int, k: int) -> Fraction:
    """sum_i (-1)^i C(g,i) (g+1-i)^k; vanishes for k < g, equals g! at k = g."""
    if g < 0 or k < 0:
        raise ValueError("need g, k >= 0")
    return Fraction(
        sum((-1) ** i * comb(g, i) * (g + 1 - i) ** k for i in range(g + 1))
    )


def delta_psi_integral(g: int, K: int) -> Fraction:
    """psi^{2g+K-2} integrated over the cycle of degree-K functions with a
    full pole and K simple zeros, expressed through H(g;K):

        K! H(g;K) / (K^{2g+K-2} (2g+K-1)!)

    Zero when the exponent 2g+K-2 is negative (dimension mismatch).
    """
    if g < 0 or K < 1:
        raise ValueError("need g >= 0 and K >= 1")
    e = 2 * g + K - 2
    if e < 0:
        return Fraction(0)
    return Fraction(factorial(K)) * H_generalized(g, K) / (K**e * factorial(e + 1))


def tau3g_from_hurwitz(g: int, l: int) -> Fraction:
    """<tau_{3g} tau_0^2>_g as an alternating cross-sum of H(g;K).

    For every l >= 0 the same value must come out (and equals
    1/(24^g g!)), which is the main consistency check on H.
    """
    if g < 0 or l < 0:
        raise ValueError("need g, l >= 0")
    total = Fraction(0)
    for i in range(g + 1):
        K = g + l + 1 - i
        # the exponent 2g+K-2 is -1 in the single case g=0, K=1
        term = (
            Fraction((-1) ** i * comb(g, i), factorial(g))
            * factorial(K)
            * H_generalized(g, K)
            / factorial(2 * g + K - 1)
            / Fraction(K) ** (2 * g + K - 2)
        )
        total += term
    return total


@lru_cache(maxsize=None)
def S_difference_table(g: int, k1: int, k2: int) -> Fraction:
    """S(k1,k2): psi-power integral over the cycle of degree-k1 functions
    with a full pole and simple zeros at the first k2 labeled points.

    Off the diagonal it satisfies
        S(k1,k2) = (S(k1,k2+1) - S(k1-1,k2)) / (k1 - k2),
    terminating on the diagonal S(K,K) = delta_psi_integral(g,K).
    The endpoint S(g+l+1, l+1) recovers <tau_{3g} tau_0^2>_g.
    """
    if not (k2 >= 1 and k2 <= k1 <= k2 + g):
        raise DomainViolation(f"S({k1},{k2}) outside k2 >= 1, k2 <= k1 <= k2+{g}")
    if k1 == k2:
        return delta_psi_integral(g, k1)
    return (
        S_difference_table(g, k1, k2 + 1) - S_difference_table(g, k1 - 1, k2)
    ) / (k1 - k2)
