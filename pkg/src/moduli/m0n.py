"""Tautological intersection calculus on moduli of marked rational curves.

A boundary stratum of the space of stable N-pointed genus-zero curves is
a tree of components; it is encoded here by the set of its edges, each
edge stored as the 2-partition it induces on the marked points
(canonically: the side not containing the smallest point).  Those
subsets form a laminar family, and conversely every laminar family of
subsets U with 2 <= |U| <= N-2 is a stratum.  A Stratum additionally
carries psi-exponents on flags (legs and edge ends); a TautClass is a
finite rational combination of decorated strata.

The product rules implemented on this carrier:

* psi(x) restricts to psi of x on the component carrying x, so
  multiplying by psi(x) just increments x's flag;
* multiplying by a boundary divisor D_U either refines the tree by one
  new edge realizing U (transverse case), hits an existing edge and
  contributes the excess class -psi' - psi'' at the two ends, or
  vanishes (U incompatible with the tree);
* pulling back along the map forgetting a point y sends a stratum to
  the sum over vertices of "attach y here", corrected, for every
  decorated flag, by a term that splits off a three-point component
  carrying y (the comparison psi = pi* psi + D on each factor);
* a stratum integrates to a product of multinomial coefficients
  (n_v - 3)! / prod d_f!, one per vertex, zero on any degree mismatch.

On top of this sits the recursive family of classes Psi_p(b) encoding
vanishing orders of the residue one-form of a polynomial-type cover,
and the resulting intersection formula for genus-zero Hurwitz numbers
with a point of total ramification.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Hashable, Iterable, Iterator, Mapping

from .partitions import (
    RamificationProfile,
    aut_partition,
    format_rational,
    riemann_hurwitz_genus,
    subsets,
)

__all__ = [
    "InvalidSubset",
    "PointAlreadyPresent",
    "DegreeOverflow",
    "Stratum",
    "TautClass",
    "fundamental_class",
    "psi_class",
    "boundary_class",
    "all_undecorated_strata",
    "classes_numerically_equal",
    "profile_points",
    "mul_pullback_psi",
    "psi_p_class",
    "psi_p_times",
    "intersection_integrand",
    "intersection_hurwitz",
]

Point = Hashable
Flag = tuple  # ('leg', point) or ('end', edge_subset, on_subset_side)


class InvalidSubset(ValueError):
    """Boundary divisor subset must satisfy 2 <= |U| <= N-2."""


class PointAlreadyPresent(ValueError):
    """Forgetful pullback target already carries the point."""


class DegreeOverflow(ValueError):
    """Requested decoration degree exceeds the dimension of the space."""


def _canon_side(points: frozenset, side: Iterable) -> tuple[frozenset, bool]:
    """Canonical representative of a 2-partition side; True if flipped."""
    side = frozenset(side)
    if min(points) in side:
        return frozenset(points - side), True
    return side, False


def _flag_key(flag: Flag):
    if flag[0] == "leg":
        return (0, (flag[1],), False)
    return (1, tuple(sorted(flag[1])), flag[2])


@lru_cache(maxsize=None)
def _tree(points: frozenset, edges: frozenset):
    """Vertices of the stratum with the given laminar edge family.

    Returns (vert_flags, vert_subset) where vert_flags[i] is the tuple
    of flags at vertex i and vert_subset[i] is the edge subset whose
    bracket the vertex heads (None for the root, which carries the
    basepoint).  Vertex i sits on the U-side of an edge U exactly when
    vert_subset[i] is a subset of U.
    """
    base = min(points)
    subs = sorted(edges, key=lambda u: (len(u), sorted(u)))
    for u in subs:
        if base in u or not (2 <= len(u) <= len(points) - 2):
            raise InvalidSubset(f"edge side {set(u)} is not canonical")
    for u, v in itertools.combinations(subs, 2):
        if not (u <= v or v <= u or not (u & v)):
            raise ValueError(f"edges {set(u)}, {set(v)} are not compatible")

    children: dict[frozenset | None, list[frozenset]] = {None: []}
    for u in subs:
        children[u] = []
    for u in subs:
        strict = [v for v in subs if u < v]
        parent = min(strict, key=len) if strict else None
        children[parent].append(u)

    vert_flags: list[tuple[Flag, ...]] = []
    vert_subset: list[frozenset | None] = []

    def emit(subset: frozenset | None) -> None:
        if subset is None:
            legs = points - frozenset().union(*children[None]) if children[None] else points
            own: list[Flag] = []
        else:
            legs = subset - (
                frozenset().union(*children[subset]) if children[subset] else frozenset()
            )
            own = [("end", subset, True)]
        flags = (
            [("leg", p) for p in sorted(legs)]
            + own
            + [("end", c, False) for c in sorted(children[subset], key=lambda s: sorted(s))]
        )
        if len(flags) < 3:
            raise ValueError("unstable vertex in stratum")
        vert_flags.append(tuple(flags))
        vert_subset.append(subset)
        for c in children[subset]:
            emit(c)

    emit(None)
    return tuple(vert_flags), tuple(vert_subset)


@dataclass(frozen=True)
class Stratum:
    """A boundary stratum with psi-decorations on its flags."""

    points: frozenset
    edges: frozenset
    deco: tuple  # sorted tuple of (flag, positive exponent)

    def __post_init__(self) -> None:
        vert_flags, _ = _tree(self.points, self.edges)
        known = {f for flags in vert_flags for f in flags}
        for flag, exp in self.deco:
            if flag not in known or exp < 1:
                raise ValueError(f"bad decoration {flag}^{exp}")

    @property
    def codim(self) -> int:
        return len(self.edges)

    @property
    def degree(self) -> int:
        return self.codim + sum(e for _, e in self.deco)

    def deco_map(self) -> dict[Flag, int]:
        return dict(self.deco)

    def vanishes(self) -> bool:
        """True when some vertex carries more decoration than its dimension."""
        vert_flags, _ = _tree(self.points, self.edges)
        d = self.deco_map()
        for flags in vert_flags:
            if sum(d.get(f, 0) for f in flags) > len(flags) - 3:
                return True
        return False

    def integral(self) -> Fraction:
        """Product over vertices of (n_v-3)!/prod d_f!, or 0 off-dimension."""
        vert_flags, _ = _tree(self.points, self.edges)
        d = self.deco_map()
        value = Fraction(1)
        for flags in vert_flags:
            exps = [d.get(f, 0) for f in flags]
            top = len(flags) - 3
            if sum(exps) != top:
                return Fraction(0)
            v = factorial(top)
            for e in exps:
                v //= factorial(e)
            value *= v
        return value


def _mk_deco(mapping: Mapping[Flag, int]) -> tuple:
    return tuple(
        sorted(((f, e) for f, e in mapping.items() if e), key=lambda fe: _flag_key(fe[0]))
    )


class TautClass:
    """Finite rational combination of decorated strata on one space."""

    __slots__ = ("space", "terms")

    def __init__(self, space: Iterable, terms: Mapping[Stratum, Fraction] | None = None):
        self.space = frozenset(space)
        if len(self.space) < 3:
            raise ValueError("need at least three marked points")
        self.terms: dict[Stratum, Fraction] = {}
        if terms:
            for st, c in terms.items():
                self._add(st, c)

    def _add(self, st: Stratum, coeff: Fraction) -> None:
        if not coeff or st.vanishes():
            return
        c = self.terms.get(st, Fraction(0)) + coeff
        if c:
            self.terms[st] = c
        else:
            self.terms.pop(st, None)

    # -- ring-ish structure ------------------------------------------------

    def __add__(self, other: "TautClass") -> "TautClass":
        assert self.space == other.space
        out = TautClass(self.space, self.terms)
        for st, c in other.terms.items():
            out._add(st, c)
        return out

    def __sub__(self, other: "TautClass") -> "TautClass":
        return self + other.scale(-1)

    def scale(self, k) -> "TautClass":
        k = Fraction(k)
        return TautClass(self.space, {st: c * k for st, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TautClass)
            and self.space == other.space
            and self.terms == other.terms
        )

    def is_zero(self) -> bool:
        return not self.terms

    # -- products with generators -------------------------------------------

    def mul_psi(self, x: Point) -> "TautClass":
        """Multiply by the cotangent class at the marked point x."""
        if x not in self.space:
            raise ValueError(f"unknown point {x!r}")
        out = TautClass(self.space)
        flag = ("leg", x)
        for st, c in self.terms.items():
            d = st.deco_map()
            d[flag] = d.get(flag, 0) + 1
            out._add(Stratum(st.points, st.edges, _mk_deco(d)), c)
        return out

    def mul_boundary(self, U: Iterable) -> "TautClass":
        """Multiply by the boundary divisor separating U from its complement."""
        U = frozenset(U)
        if not U <= self.space:
            raise InvalidSubset("subset not contained in the marked points")
        if not (2 <= len(U) <= len(self.space) - 2):
            raise InvalidSubset("need 2 <= |U| <= N-2")
        W, _ = _canon_side(self.space, U)
        out = TautClass(self.space)
        for st, c in self.terms.items():
            if W in st.edges:
                # self-intersection: -psi' - psi'' at the two edge ends
                for side in (True, False):
                    d = st.deco_map()
                    flag = ("end", W, side)
                    d[flag] = d.get(flag, 0) + 1
                    out._add(Stratum(st.points, st.edges, _mk_deco(d)), -c)
                continue
            if all(W <= e or e <= W or not (W & e) for e in st.edges):
                out._add(Stratum(st.points, st.edges | {W}, st.deco), c)
            # otherwise incompatible: contributes zero
        return out

    def forgetful_pullback(self, y: Point) -> "TautClass":
        """Pull back along the map that forgets the (new) point y."""
        if y in self.space:
            raise PointAlreadyPresent(f"point {y!r} already marked")
        new_points = self.space | {y}
        out = TautClass(new_points)
        for st, c in self.terms.items():
            vert_flags, vert_subset = _tree(st.points, st.edges)
            deco = st.deco_map()
            for vidx, flags in enumerate(vert_flags):
                vsub = vert_subset[vidx]

                def on_side(e: frozenset) -> bool:
                    return vsub is not None and vsub <= e

                # common to both terms: y joins this vertex's side of each edge
                rename: dict[frozenset, tuple[frozenset, bool]] = {}
                new_edges = set()
                for e in st.edges:
                    raw = e | {y} if on_side(e) else e
                    canon, flipped = _canon_side(new_points, raw)
                    rename[e] = (canon, flipped)
                    new_edges.add(canon)

                def move(d: Mapping[Flag, int]) -> dict[Flag, int]:
                    moved = {}
                    for flag, exp in d.items():
                        if flag[0] == "end":
                            canon, flipped = rename[flag[1]]
                            flag = ("end", canon, flag[2] ^ flipped)
                        moved[flag] = exp
                    return moved

                # attach y as a new leg at this vertex
                out._add(
                    Stratum(new_points, frozenset(new_edges), _mk_deco(move(deco))),
                    c,
                )

                # comparison correction, one per decorated flag at the vertex
                for f in flags:
                    dexp = deco.get(f, 0)
                    if not dexp:
                        continue
                    if f[0] == "leg":
                        beyond = frozenset([f[1]])
                    elif f[2]:
                        beyond = st.points - f[1]
                    else:
                        beyond = f[1]
                    canon, flipped = _canon_side(new_points, beyond | {y})
                    far_flag = ("end", canon, flipped)  # end at the old vertex
                    d2 = move({g: e for g, e in deco.items() if g != f})
                    if dexp > 1:
                        d2[far_flag] = d2.get(far_flag, 0) + dexp - 1
                    out._add(
                        Stratum(
                            new_points,
                            frozenset(new_edges) | {canon},
                            _mk_deco(d2),
                        ),
                        -c,
                    )
        return out

    def integrate(self) -> Fraction:
        """Degree of the zero-dimensional part (0 on dimension mismatch)."""
        return sum((c * st.integral() for st, c in self.terms.items()), Fraction(0))

    # -- serialization -------------------------------------------------------

    def to_json_obj(self) -> list[dict]:
        """Terms as parent array + leg map + decoration map + coefficient."""
        out = []
        for st in sorted(
            self.terms,
            key=lambda s: (
                s.codim,
                sorted(tuple(sorted(e)) for e in s.edges),
                s.deco and _flag_key(s.deco[0][0]),
            ),
        ):
            vert_flags, vert_subset = _tree(st.points, st.edges)
            index = {vs if vs is None else vs: i for i, vs in enumerate(vert_subset)}
            parent = []
            for vs in vert_subset:
                if vs is None:
                    parent.append(-1)
                else:
                    strict = [u for u in st.edges if vs < u]
                    parent.append(index[min(strict, key=len)] if strict else 0)
            legs = {}
            for i, flags in enumerate(vert_flags):
                for f in flags:
                    if f[0] == "leg":
                        legs[str(f[1])] = i
            deco = {}
            for flag, exp in st.deco:
                if flag[0] == "leg":
                    deco[f"leg:{flag[1]}"] = exp
                else:
                    side = "in" if flag[2] else "out"
                    deco[f"end:{sorted(flag[1])}:{side}"] = exp
            out.append(
                {
                    "parent": parent,
                    "legs": legs,
                    "deco": deco,
                    "coeff": format_rational(self.terms[st]),
                }
            )
        return out


# ---------------------------------------------------------------------------
# constructors


def fundamental_class(points: Iterable) -> TautClass:
    pts = frozenset(points)
    return TautClass(pts, {Stratum(pts, frozenset(), ()): Fraction(1)})


def psi_class(points: Iterable, x: Point) -> TautClass:
    return fundamental_class(points).mul_psi(x)


def boundary_class(points: Iterable, U: Iterable) -> TautClass:
    return fundamental_class(points).mul_boundary(U)


def all_undecorated_strata(points: Iterable, codim: int) -> Iterator[Stratum]:
    """All strata with the given number of edges (no decorations)."""
    pts = frozenset(points)
    base = min(pts)
    rest = sorted(pts - {base})
    candidates = [
        frozenset(c)
        for size in range(2, len(pts) - 1)
        for c in itertools.combinations(rest, size)
    ]

    def extend(chosen: list[frozenset], start: int) -> Iterator[Stratum]:
        if len(chosen) == codim:
            yield Stratum(pts, frozenset(chosen), ())
            return
        for i in range(start, len(candidates)):
            cand = candidates[i]
            if all(cand <= e or e <= cand or not (cand & e) for e in chosen):
                yield from extend(chosen + [cand], i + 1)

    yield from extend([], 0)


def classes_numerically_equal(a: TautClass, b: TautClass) -> bool:
    """Equality in cohomology, decided by intersection numbers.

    Two combinations of decorated strata can differ term by term yet
    represent the same class (the strata satisfy relations).  Since
    stratum classes span the cohomology of the space in every degree,
    a class vanishes iff it pairs to zero with every undecorated
    stratum of complementary dimension; that is what gets checked,
    one graded piece at a time.
    """
    if a.space != b.space:
        return False
    diff = a - b
    if diff.is_zero():
        return True
    top = len(diff.space) - 3
    by_degree: dict[int, TautClass] = {}
    for st, c in diff.terms.items():
        by_degree.setdefault(st.degree, TautClass(diff.space))._add(st, c)
    for degree, piece in by_degree.items():
        for T in all_undecorated_strata(diff.space, top - degree):
            paired = piece
            for e in T.edges:
                paired = paired.mul_boundary(e)
            if paired.integrate() != 0:
                return False
    return True


# ---------------------------------------------------------------------------
# vanishing-order classes and the Hurwitz intersection formula


def profile_points(profile: RamificationProfile) -> list[tuple[int, int]]:
    """Marked points (i, j) of the space attached to a ramification profile."""
    return [
        (i + 1, j + 1)
        for i, passport in enumerate(profile.passports)
        for j in range(len(passport))
    ]


def mul_pullback_psi(tc: TautClass, keep: Iterable, x: Point) -> TautClass:
    """Multiply by the pullback of psi(x) from the space with points `keep`.

    Composing the one-point comparisons psi = pi* psi + D through every
    forgotten point expands the pullback as
        pi* psi(x) = psi(x) - sum_{0 != V <= forgotten} D_{ {x} u V },
    which is multiplied in generator by generator.
    """
    keep = frozenset(keep)
    assert x in keep and keep <= tc.space
    out = tc.mul_psi(x)
    forgotten = sorted(tc.space - keep)
    for V in subsets(forgotten):
        if V:
            out = out - tc.mul_boundary(set(V) | {x})
    return out


def psi_p_times(
    acc: TautClass,
    profile: RamificationProfile,
    p: int,
    bvals: Mapping[tuple[int, int], int] | None = None,
    pick: Callable[[dict], tuple[int, int]] | None = None,
) -> TautClass:
    """Product of the class Psi_p(b) with an arbitrary class `acc`.

    Psi_p(0) is the fundamental class.  One recursion step lowers the
    index b at a chosen point z = x^q_k:

        Psi_p(b) = b_z pi*_{p,z} psi(z) Psi_p(b-1_z)
                   - sum_U a_U D_{U u {z}} Psi_p((b-1_z) U-collapsed)

    where U runs over nonempty subsets of the indexed points other than
    z, a_U is the total lowered index on U, and collapsing zeroes the
    indices on U while adding a_U to the one at z.  Products with psi
    and boundary generators distribute through `acc`, so the recursion
    never needs a product of two general classes.
    """
    passports = profile.passports
    if not 2 <= p <= len(passports):
        raise ValueError("p must index a passport other than the first")
    pts = profile_points(profile)
    keep = frozenset({(1, 1)} | {(p, j + 1) for j in range(len(passports[p - 1]))})
    indexed = [pt for pt in pts if pt[0] >= 2 and pt[0] != p]
    if bvals is None:
        bvals = {(i, j): passports[i - 1][j - 1] - 1 for (i, j) in indexed}
    else:
        bvals = dict(bvals)
        if set(bvals) != set(indexed):
            raise ValueError("index map must cover exactly the non-distinguished points")
    n_pts = len(pts)
    if sum(bvals.values()) > n_pts - 3:
        raise DegreeOverflow("total index exceeds the dimension of the space")
    if pick is None:
        pick = lambda b: min(z for z, v in b.items() if v)

    memo: dict[tuple, TautClass] = {}

    def run(b: dict) -> TautClass:
        key = tuple(sorted((z, v) for z, v in b.items() if v))
        if not key:
            return acc
        if key in memo:
            return memo[key]
        z = pick(b)
        lowered = dict(b)
        lowered[z] -= 1
        head = mul_pullback_psi(run(lowered), keep | {z}, z).scale(b[z])
        for U in subsets([pt for pt in indexed if pt != z]):
            if not U:
                continue
            a_U = sum(lowered[u] for u in U)
            if not a_U:
                continue
            collapsed = dict(lowered)
            for u in U:
                collapsed[u] = 0
            collapsed[z] = lowered[z] + a_U
            head = head - run(collapsed).mul_boundary(set(U) | {z}).scale(a_U)
        memo[key] = head
        return head

    return run(dict(bvals))


def psi_p_class(
    profile: RamificationProfile,
    p: int,
    bvals: Mapping[tuple[int, int], int] | None = None,
    pick: Callable[[dict], tuple[int, int]] | None = None,
) -> TautClass:
    """The class Psi_p(b) itself (product with the fundamental class)."""
    return psi_p_times(fundamental_class(profile_points(profile)), profile, p, bvals, pick)


def intersection_integrand(profile: RamificationProfile, max_points: int = 8) -> TautClass:
    """The top-degree class psi(x^1_1)^{m-3} prod_{p=2}^m Psi_p."""
    from .hurwitz import PreconditionViolated

    n = profile.degree
    passports = profile.passports
    m = len(passports)
    if m < 3:
        raise PreconditionViolated("need m >= 3 branch points")
    if passports[0] != (n,):
        raise PreconditionViolated("first passport must be the full cycle (n)")
    if riemann_hurwitz_genus(profile) != 0:
        raise PreconditionViolated("intersection formula is genus-0 only")
    pts = profile_points(profile)
    if len(pts) > max_points:
        raise DegreeOverflow(f"{len(pts)} marked points exceeds guard {max_points}")

    acc = fundamental_class(pts)
    for _ in range(m - 3):
        acc = acc.mul_psi((1, 1))
    for p in range(2, m + 1):
        acc = psi_p_times(acc, profile, p)
    return acc


def intersection_hurwitz(profile: RamificationProfile, max_points: int = 8) -> Fraction:
    """Genus-zero Hurwitz number via the intersection formula

        h = n^{m-3} / prod_{j>=2} |aut(A_j)|
            * integral of psi(x^1_1)^{m-3} prod_{p=2}^m Psi_p

    for profiles with A_1 = (n) and m >= 3 branch points.
    """
    n = profile.degree
    m = len(profile.passports)
    value = Fraction(n ** (m - 3)) * intersection_integrand(profile, max_points).integrate()
    for passport in profile.passports[1:]:
        value /= aut_partition(passport)
    return value
