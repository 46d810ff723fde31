"""Intersection numbers of r-spin structures by exact recursion.

The engine evaluates S^n_{g,m}(prod eta_{q_i,a_i}): the integral of
psi^n times the top Chern class of the dual Hodge-type bundle over the
locus of spin curves carrying a function with pole of order sum(a_i) at
the first marked point and zeros of orders a_i at the others.  Three
facts drive everything:

* a recursion in n that degenerates the underlying curve into a base
  part and a genus-0 or genus-1 cap, trading one power of psi for a sum
  over subsets of insertions, partitions of their total multiplicity,
  and spin labels at the new nodes;
* initial values: at n = 0 the integral vanishes in genus >= 2, is a
  primary correlator in genus 0, and in genus 1 is one of finitely many
  numbers Shat1(prod eta_{m_t,b_t}) attached to divisor classes on the
  moduli of pointed elliptic curves;
* the correlators <tau_{n,m} prod tau_{0,m_i}>_g are alternating sums
  of S-numbers with all multiplicities 1 plus extra eta_{0,1} factors.

The Shat1 numbers are not computed geometrically: the genus-1
topological recursion relation turns each genus-1 correlator into a
known genus-0 quantity, and evaluating the same correlator through the
S-recursion with varied multiplicities yields linear equations that an
exact elimination solves.  Everything is a Fraction; unresolved Shat1
symbols ride along in small affine forms until they are solved for.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping

from .linsolve import InconsistentSystem, solve_linear_system
from .partitions import aut_partition, format_rational, parse_rational, partitions_of

__all__ = [
    "MissingPrimaryTable",
    "UnsolvedShat1",
    "UnderdeterminedSystem",
    "InconsistentSystem",
    "AffineForm",
    "dimension_D",
    "selection_genus",
    "RSpinEngine",
    "BUILTIN_PRIMARY_TABLES",
    "primary_table_to_json_obj",
    "primary_table_from_json_obj",
    "shat1_table_to_json_obj",
    "shat1_table_from_json_obj",
]

Insertion = tuple[int, int]  # (spin label, multiplicity)
ShatKey = tuple[tuple[int, int], ...]  # sorted (label, signed multiplicity)


class MissingPrimaryTable(LookupError):
    """No genus-0 primary table available for the requested label set."""


class UnsolvedShat1(LookupError):
    """A genus-1 divisor integral was needed but is not in the table."""


class UnderdeterminedSystem(ValueError):
    """The linear system leaves some requested values free."""


#: complete genus-0 primary correlator tables; all unlisted entries vanish
BUILTIN_PRIMARY_TABLES: dict[int, dict[tuple[int, ...], Fraction]] = {
    2: {(0, 0, 0): Fraction(1)},
    3: {(0, 0, 1): Fraction(1), (1, 1, 1, 1): Fraction(1, 3)},
    4: {
        (0, 0, 2): Fraction(1),
        (0, 1, 1): Fraction(1),
        (1, 1, 2, 2): Fraction(1, 4),
        (2, 2, 2, 2, 2): Fraction(1, 8),
    },
}


def dimension_D(r: int, g: int, labels: Iterable[int]) -> Fraction:
    """Degree of the spin Chern class: (g-1)(r-2)/r + sum(labels)/r."""
    return Fraction((g - 1) * (r - 2), r) + Fraction(sum(labels), r)


def selection_genus(r: int, insertions: Iterable[tuple[int, int]]) -> int | None:
    """The unique genus at which <prod tau_{n_i,m_i}> can be nonzero.

    Solves 3g - 3 + s = sum(n_i) + D for g; returns None unless g is a
    nonnegative integer and (g, s) is stable.
    """
    ins = list(insertions)
    s = len(ins)
    total_n = sum(n for n, _ in ins)
    total_m = sum(m for _, m in ins)
    num = r * total_n + total_m - r * s + 2 * r + 2
    den = 2 * r + 2
    if num % den:
        return None
    g = num // den
    if g < 0 or 2 * g - 2 + s <= 0:
        return None
    return g


@dataclass(frozen=True)
class AffineForm:
    """const + sum(coeff * unknown) over Shat1 keys."""

    const: Fraction = Fraction(0)
    lin: tuple[tuple[ShatKey, Fraction], ...] = ()

    @staticmethod
    def constant(x) -> "AffineForm":
        return AffineForm(Fraction(x), ())

    @staticmethod
    def symbol(key: ShatKey) -> "AffineForm":
        return AffineForm(Fraction(0), ((key, Fraction(1)),))

    def lin_map(self) -> dict[ShatKey, Fraction]:
        return dict(self.lin)

    def __add__(self, other: "AffineForm") -> "AffineForm":
        lin = self.lin_map()
        for k, c in other.lin:
            v = lin.get(k, Fraction(0)) + c
            if v:
                lin[k] = v
            else:
                lin.pop(k, None)
        return AffineForm(self.const + other.const, tuple(sorted(lin.items())))

    def scale(self, c) -> "AffineForm":
        c = Fraction(c)
        if not c:
            return AffineForm()
        return AffineForm(self.const * c, tuple((k, v * c) for k, v in self.lin))

    def times(self, other: "AffineForm") -> "AffineForm":
        if not other.lin:
            return self.scale(other.const)
        if not self.lin:
            return other.scale(self.const)
        raise UnsolvedShat1(
            f"product of two unresolved forms: {self.unknowns()} x {other.unknowns()}"
        )

    def is_constant(self) -> bool:
        return not self.lin

    def unknowns(self) -> set[ShatKey]:
        return {k for k, _ in self.lin}

    def substitute(self, values: Mapping[ShatKey, Fraction]) -> "AffineForm":
        out = AffineForm.constant(self.const)
        for k, c in self.lin:
            if k in values:
                out = out + AffineForm.constant(values[k] * c)
            else:
                out = out + AffineForm.symbol(k).scale(c)
        return out


_ZERO = AffineForm()


@lru_cache(maxsize=None)
def _bounded_compositions(total: int, parts: int, lo: int, hi: int) -> tuple:
    """Ordered tuples of `parts` integers in [lo, hi] summing to `total`."""
    if parts == 0:
        return ((),) if total == 0 else ()
    if total < parts * lo or total > parts * hi:
        return ()
    out = []
    for v in range(lo, hi + 1):
        for tail in _bounded_compositions(total - v, parts - 1, lo, hi):
            out.append((v,) + tail)
    return tuple(out)


def canonical_shat1_key(pairs: Iterable[tuple[int, int]]) -> ShatKey:
    """Sorted pair tuple, normalized under global negation of multiplicities.

    Negating every multiplicity replaces the defining function by its
    reciprocal and fixes the underlying cycle, so both sign patterns
    name the same number.
    """
    a = tuple(sorted((m, b) for m, b in pairs))
    b = tuple(sorted((m, -bb) for m, bb in a))
    return min(a, b)


class RSpinEngine:
    """Evaluator for S-numbers, Shat1 values, and spin correlators at fixed r."""

    def __init__(
        self,
        r: int,
        primary_table: Mapping[tuple[int, ...], Fraction] | None = None,
        shat1_table: Mapping[ShatKey, Fraction] | None = None,
        auto_solve: bool = True,
        solver_slots: int = 3,
        solver_max_n: int = 8,
    ):
        if r < 2:
            raise ValueError("need r >= 2")
        self.r = r
        if primary_table is not None:
            self.primary_table = {tuple(sorted(k)): Fraction(v) for k, v in primary_table.items()}
            self.primary_is_complete = False
        elif r in BUILTIN_PRIMARY_TABLES:
            self.primary_table = dict(BUILTIN_PRIMARY_TABLES[r])
            self.primary_is_complete = True
        else:
            raise MissingPrimaryTable(f"no built-in primary table for r={r}")
        self.shat1_values: dict[ShatKey, Fraction] = (
            {canonical_shat1_key(k): Fraction(v) for k, v in shat1_table.items()}
            if shat1_table
            else {}
        )
        self.auto_solve = auto_solve
        self.solver_slots = solver_slots
        self.solver_max_n = solver_max_n
        self._solved_up_to = 0
        self._solving = False
        self._memo: dict[tuple, AffineForm] = {}
        self.cache_hits = 0
        self.cache_misses = 0
        self._depth = 0
        self.max_depth = 0

    # -- genus-0 primaries ---------------------------------------------------

    def primary(self, labels: Iterable[int]) -> Fraction:
        """<prod tau_{0,label}>_0 from the table.

        Built-in tables are complete (absent means zero).  For a
        user-supplied table an absent entry is zero only when the
        genus-0 selection rule fails; otherwise it is unknowable.
        """
        key = tuple(sorted(labels))
        if key in self.primary_table:
            return self.primary_table[key]
        s = len(key)
        if self.primary_is_complete:
            return Fraction(0)
        if s >= 3 and sum(key) == self.r * (s - 3) + (self.r - 2) and all(
            0 <= m <= self.r - 1 for m in key
        ):
            raise MissingPrimaryTable(f"no entry for labels {key} at r={self.r}")
        return Fraction(0)

    # -- genus-1 divisor integrals --------------------------------------------

    def shat1_form(self, pairs: Iterable[tuple[int, int]]) -> AffineForm:
        pairs = tuple(pairs)
        if sum(b for _, b in pairs) != 0:
            raise ValueError("multiplicities must sum to zero")
        k = len(pairs)
        labels = [m for m, _ in pairs]
        if any(b == 0 for _, b in pairs):
            raise ValueError("multiplicities must be nonzero")
        # vanishing: wrong dimension, decoupled label r-1, or a label-0 point
        if sum(labels) != self.r * (k - 1):
            return _ZERO
        if any(m == self.r - 1 or m == 0 for m in labels):
            return _ZERO
        key = canonical_shat1_key(pairs)
        if key in self.shat1_values:
            return AffineForm.constant(self.shat1_values[key])
        if not self._solving and self.auto_solve:
            self.solve_shat1(max(abs(b) for _, b in key))
            if key in self.shat1_values:
                return AffineForm.constant(self.shat1_values[key])
            raise UnsolvedShat1(f"value for {key} not determined")
        # stay symbolic; numeric extraction raises if it is still unknown
        return AffineForm.symbol(key)

    def shat1(self, pairs: Iterable[tuple[int, int]]) -> Fraction:
        return self._resolve(self.shat1_form(pairs))

    # -- S-numbers -------------------------------------------------------------

    def S_form(self, n: int, g: int, m: int, insertions: Iterable[Insertion]) -> AffineForm:
        """S^n_{g,m}(prod eta_{q_i,a_i}) as an affine form over Shat1 keys."""
        ins = tuple(sorted(insertions))
        if g < 0:
            return _ZERO
        if n < 0:
            raise ValueError("need n >= 0")
        s = len(ins)
        if s < 1:
            raise ValueError("need at least one insertion")
        if not all(0 <= q <= self.r - 1 and a >= 1 for q, a in ins):
            raise ValueError(f"bad insertions {ins}")
        if not 0 <= m <= self.r - 1:
            raise ValueError(f"bad pole label {m}")

        # dimension / selection pruning: the integrand degree must match the
        # cycle dimension 2g+s-2 and the Chern degree must be integral >= 0
        D = dimension_D(self.r, g, [m] + [q for q, _ in ins])
        if D.denominator != 1 or D < 0 or n + D != 2 * g + s - 2:
            return _ZERO
        if s == 1 and ins[0][1] == 1:
            # a function of degree 1 with one simple pole and one simple
            # zero exists only on the sphere, where the convention is 0 too
            return _ZERO

        key = (n, g, m, ins)
        if key in self._memo:
            self.cache_hits += 1
            return self._memo[key]
        self.cache_misses += 1
        self._depth += 1
        self.max_depth = max(self.max_depth, self._depth)
        try:
            out = self._expand(n, g, m, ins)
        finally:
            self._depth -= 1
        self._memo[key] = out
        return out

    def _expand(self, n: int, g: int, m: int, ins: tuple) -> AffineForm:
        s = len(ins)
        if n == 0:
            if g == 0:
                return AffineForm.constant(self.primary([m] + [q for q, _ in ins]))
            if g == 1:
                total = sum(a for _, a in ins)
                return self.shat1_form(((m, -total),) + ins)
            return _ZERO

        r = self.r
        total_a = sum(a for _, a in ins)
        denom = total_a * (2 * g + s - 1)
        out = _ZERO
        for I in itertools.chain.from_iterable(
            itertools.combinations(range(s), size) for size in range(1, s + 1)
        ):
            a_I = sum(ins[i][1] for i in I)
            rest = tuple(ins[i] for i in range(s) if i not in I)
            cap_labels = [ins[i][0] for i in I]
            cap_sum = sum(cap_labels)
            # a label 0 or r-1 on the genus-1 cap kills its divisor integral
            genus1_labels_ok = all(0 < q < r - 1 for q in cap_labels)
            for j in range(1, min(a_I, g + 1) + 1):
                k0 = len(I) + j
                use0 = g + 1 - j >= 0 and k0 > 2  # coefficient k0-2 vanishes at 2
                use1 = g - j >= 0 and genus1_labels_ok
                if not (use0 or use1):
                    continue
                # node labels are pinned by the cap's own selection rule
                t0 = r * (k0 - 3) + (r - 2) - cap_sum
                t1 = r * (k0 - 1) - cap_sum
                for B in partitions_of(a_I, j):
                    weight = Fraction(1, aut_partition(B))
                    for b in B:
                        weight *= b
                    if use0:
                        for w in _bounded_compositions(t0, j, 0, r - 2):
                            prim = self.primary(cap_labels + list(w))
                            if not prim:
                                continue
                            new_ins = rest + tuple(
                                (r - 2 - wt, bt) for wt, bt in zip(w, B)
                            )
                            sub = self.S_form(n - 1, g + 1 - j, m, new_ins)
                            out = out + sub.scale(
                                Fraction(k0 - 2, denom) * weight * prim
                            )
                    if use1:
                        for w in _bounded_compositions(t1, j, 1, r - 2):
                            cap = self.shat1_form(
                                tuple((ins[i][0], -ins[i][1]) for i in I)
                                + tuple(zip(w, B))
                            )
                            if cap.is_constant() and not cap.const:
                                continue
                            new_ins = rest + tuple(
                                (r - 2 - wt, bt) for wt, bt in zip(w, B)
                            )
                            sub = self.S_form(n - 1, g - j, m, new_ins)
                            out = out + sub.times(cap).scale(
                                Fraction(k0, denom) * weight
                            )
        return out

    def _resolve(self, form: AffineForm) -> Fraction:
        if not form.is_constant():
            form = form.substitute(self.shat1_values)
        if not form.is_constant() and self.auto_solve:
            self.solve_shat1(max(abs(b) for k in form.unknowns() for _, b in k))
            form = form.substitute(self.shat1_values)
        if not form.is_constant():
            raise UnsolvedShat1(f"unresolved {sorted(form.unknowns())}")
        return form.const

    def S_number(self, n: int, g: int, m: int, insertions: Iterable[Insertion]) -> Fraction:
        return self._resolve(self.S_form(n, g, m, insertions))

    # -- correlators -----------------------------------------------------------

    def correlator_form(
        self, n: int, m: int, primaries: Iterable[int], g: int
    ) -> AffineForm:
        """<tau_{n,m} prod tau_{0,m_i}>_g as an alternating sum of S-numbers:

            sum_{j=0}^{g} (-1)^j/g! C(g,j) S^{n-j}_{g,m}(prod eta_{m_i,1} eta_{0,1}^{g-j})

        Terms with n-j < 0 carry a negative psi power and drop out.
        """
        prims = list(primaries)
        if not prims:
            raise ValueError(
                "need at least one primary insertion; rewrite <tau_{n,m}>_g "
                "as <tau_{n+1,m} tau_{0,0}>_g first"
            )
        if g < 0:
            return _ZERO
        if m == self.r - 1 or any(q == self.r - 1 for q in prims):
            return _ZERO  # decoupled labels
        out = _ZERO
        base = tuple((q, 1) for q in prims)
        for j in range(g + 1):
            if n - j < 0:
                continue
            ins = base + ((0, 1),) * (g - j)
            coeff = Fraction((-1) ** j * comb(g, j), factorial(g))
            out = out + self.S_form(n - j, g, m, ins).scale(coeff)
        return out

    def correlator(self, n: int, m: int, primaries: Iterable[int], g: int) -> Fraction:
        return self._resolve(self.correlator_form(n, m, primaries, g))

    def genus1_correlator_form(
        self, n: int, m: int, insertions: Iterable[Insertion]
    ) -> AffineForm:
        """<tau_{n,m} prod tau_{0,q_i}>_1 through insertions of arbitrary
        multiplicity: S^n_{1,m}(prod eta * eta_{0,1}) - S^{n-1}_{1,m}(prod eta).
        """
        ins = tuple(sorted(insertions))
        out = self.S_form(n, 1, m, ins + ((0, 1),))
        if n >= 1:
            out = out + self.S_form(n - 1, 1, m, ins).scale(-1)
        return out

    # -- the genus-1 linear system ----------------------------------------------

    def shat1_candidates(self, max_b: int) -> list[ShatKey]:
        """All selection-valid keys with labels in [1, r-2] and |b| <= max_b."""
        out = set()
        r = self.r
        max_k = max(2, r)  # sum(labels) = r(k-1) with labels <= r-2 forces small k
        for k in range(2, max_k + 1):
            if r * (k - 1) > (r - 2) * k:
                continue
            pool = [
                (q, b)
                for q in range(1, r - 1)
                for b in range(-max_b, max_b + 1)
                if b
            ]
            for combo in itertools.combinations_with_replacement(pool, k):
                if sum(b for _, b in combo) != 0:
                    continue
                if sum(q for q, _ in combo) != r * (k - 1):
                    continue
                out.add(canonical_shat1_key(combo))
        return sorted(out)

    def trr_genus1(self, n: int, m: int, primaries: Iterable[int]) -> Fraction:
        """Genus-1 correlator via the topological recursion relation:

            <tau_{n,m} X>_1 = (1/24) sum_l <tau_{n-1,m} tau_{0,l} tau_{0,r-2-l} X>_0
        """
        if n < 1:
            raise ValueError("the relation lowers a descendant; need n >= 1")
        prims = list(primaries)
        total = Fraction(0)
        for l in range(self.r - 1):
            total += self.correlator0(n - 1, m, prims + [l, self.r - 2 - l])
        return total / 24

    def correlator0(self, n: int, m: int, primaries: Iterable[int]) -> Fraction:
        """Genus-0 correlator; never involves Shat1 values."""
        if n == 0:
            return self.primary([m] + list(primaries))
        form = self.S_form(n, 0, m, tuple((q, 1) for q in primaries))
        assert form.is_constant()
        return form.const

    def solve_shat1(self, max_b: int) -> dict[ShatKey, Fraction]:
        """Determine Shat1 values with |b| <= max_b from the genus-1
        recursion relation, by exact elimination.

        Every genus-1 one-descendant correlator has a known value (the
        recursion relation reduces it to genus 0) and, for each way of
        assigning multiplicities a_i to its primaries, an S-expression
        that is affine in the unknowns.  Redundant equations are kept
        and checked for consistency.
        """
        if self._solving:
            raise UnsolvedShat1("recursive solve; a needed key exceeds the search bound")
        if max_b <= self._solved_up_to:
            return dict(self.shat1_values)
        candidates = self.shat1_candidates(max_b)
        missing = [k for k in candidates if k not in self.shat1_values]
        if not missing:
            self._solved_up_to = max(self._solved_up_to, max_b)
            return dict(self.shat1_values)

        r = self.r
        equations: list[tuple[dict[ShatKey, Fraction], Fraction]] = []
        self._solving = True
        try:
            label_pool = range(r - 1)
            for slots in range(1, self.solver_slots + 1):
                for labels in itertools.combinations_with_replacement(label_pool, slots):
                    for m in label_pool:
                        total_m = m + sum(labels)
                        if total_m % r:
                            continue
                        n = (1 + slots) - total_m // r
                        if not 1 <= n <= self.solver_max_n:
                            continue
                        lhs = self.trr_genus1(n, m, labels)
                        for mults in itertools.product(
                            range(1, max_b + 1), repeat=slots
                        ):
                            ins = tuple(sorted(zip(labels, mults)))
                            rhs = self.genus1_correlator_form(n, m, ins)
                            equations.append(
                                (rhs.lin_map(), lhs - rhs.const)
                            )
        finally:
            self._solving = False

        solution, undetermined = solve_linear_system(equations)
        for k, v in solution.items():
            self.shat1_values.setdefault(k, v)
        still_missing = [k for k in candidates if k not in self.shat1_values]
        if still_missing:
            raise UnderdeterminedSystem(
                f"unresolved keys at r={r}, |b|<={max_b}: {still_missing}"
            )
        self._solved_up_to = max(self._solved_up_to, max_b)
        return dict(self.shat1_values)

    # -- persistence hooks -------------------------------------------------------

    def skey_string(self, n: int, g: int, m: int, insertions: Iterable[Insertion]) -> str:
        ins = ",".join(f"{q}:{a}" for q, a in sorted(insertions))
        return f"S;r={self.r};n={n};g={g};m={m};ins={ins}"

    def dump_constants(self) -> dict[str, str]:
        out = {}
        for (n, g, m, ins), form in self._memo.items():
            if form.is_constant():
                out[self.skey_string(n, g, m, ins)] = format_rational(form.const)
        return out

    def preload(self, cached: Mapping[str, str]) -> int:
        """Install cached S-number values; returns how many were accepted."""
        count = 0
        prefix = f"S;r={self.r};"
        for key, value in cached.items():
            if not key.startswith(prefix):
                continue
            fields = dict(part.split("=", 1) for part in key.split(";")[1:])
            ins = tuple(
                (int(q), int(a))
                for q, a in (tok.split(":") for tok in fields["ins"].split(",") if tok)
            )
            memo_key = (int(fields["n"]), int(fields["g"]), int(fields["m"]), ins)
            self._memo.setdefault(memo_key, AffineForm.constant(parse_rational(value)))
            count += 1
        return count


# ---------------------------------------------------------------------------
# table file formats


def primary_table_to_json_obj(r: int, table: Mapping[tuple[int, ...], Fraction]) -> dict:
    return {
        "r": r,
        "entries": [
            {"labels": list(k), "value": format_rational(v)}
            for k, v in sorted(table.items())
        ],
    }


def primary_table_from_json_obj(obj: Mapping) -> tuple[int, dict[tuple[int, ...], Fraction]]:
    table = {
        tuple(sorted(e["labels"])): parse_rational(e["value"]) for e in obj["entries"]
    }
    return int(obj["r"]), table


def shat1_table_to_json_obj(r: int, table: Mapping[ShatKey, Fraction]) -> dict:
    return {
        "r": r,
        "entries": [
            {"labels": [list(p) for p in k], "value": format_rational(v)}
            for k, v in sorted(table.items())
        ],
    }


def shat1_table_from_json_obj(obj: Mapping) -> tuple[int, dict[ShatKey, Fraction]]:
    table = {
        canonical_shat1_key(tuple(tuple(p) for p in e["labels"])): parse_rational(
            e["value"]
        )
        for e in obj["entries"]
    }
    return int(obj["r"]), table
