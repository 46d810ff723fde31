"""String-equation reduction and exact hierarchy consistency checks.

A bracket here is a multiset of insertions (n_i, m_i) standing for the
correlator <prod tau_{n_i,m_i}>_g; its genus, when not given, is the
unique solution of the dimension constraint (or the bracket is zero).
The string equation removes a tau_{0,0} insertion by lowering one
descendant index, with the exceptional three-point evaluation
<tau_{0,0} tau_{0,i} tau_{0,j}>_0 = delta_{i+j,r-2}.

For r = 3 the string solution of the Boussinesq hierarchy satisfies a
bilinear differential relation between generating-series brackets.
Differentiating it by primary times and setting t = 0 produces, for
each instance, an exact identity between finitely many correlators,
which `boussinesq_check` verifies with both sides computed by the spin
engine.  Chaining three instances with string reductions pins down
<tau_{6,1}>_3 using only genus-0 primaries, independently of the
S-number recursion; that is `derive_tau61_from_relations`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .linsolve import solve_linear_system
from .partitions import format_rational
from .rspin import (
    BUILTIN_PRIMARY_TABLES,
    RSpinEngine,
    selection_genus,
)

__all__ = [
    "Unstable",
    "NotEngineComputable",
    "Bracket",
    "string_step",
    "string_reduce",
    "bracket_value",
    "trr_genus1",
    "boussinesq_expand",
    "boussinesq_check",
    "derive_tau61_from_relations",
]

Bracket = tuple[tuple[int, int], ...]  # sorted (n_i, m_i) insertions


class Unstable(ValueError):
    """String reduction applied to a configuration it cannot reduce."""


class NotEngineComputable(ValueError):
    """Bracket outside the engine's domain (two or more descendants,
    or a positive-genus pure-primary bracket with no string handle)."""


def _canon(insertions: Iterable[tuple[int, int]]) -> Bracket:
    return tuple(sorted(insertions))


def string_step(insertions: Iterable[tuple[int, int]]) -> list[Bracket]:
    """Remove one tau_{0,0}; one reduced bracket per descendant insertion."""
    ins = list(_canon(insertions))
    if (0, 0) not in ins:
        raise Unstable("no tau_{0,0} insertion to remove")
    ins.remove((0, 0))
    out = []
    for i, (n, m) in enumerate(ins):
        if n >= 1:
            out.append(_canon(ins[:i] + [(n - 1, m)] + ins[i + 1 :]))
    return out


def bracket_value(
    engine: RSpinEngine, insertions: Iterable[tuple[int, int]], g: int | None = None
) -> Fraction:
    """Evaluate <prod tau_{n_i,m_i}>_g exactly.

    tau_{0,0} insertions are stripped by the string equation before the
    engine sees anything; what remains must have at most one descendant.
    """
    ins = _canon(insertions)
    r = engine.r
    if g is None:
        g = selection_genus(r, ins)
        if g is None:
            return Fraction(0)

    if (0, 0) in ins:
        # exceptional three-point value
        if len(ins) == 3 and all(n == 0 for n, _ in ins) and g == 0:
            if selection_genus(r, ins) != g:
                return Fraction(0)
            rest = list(ins)
            rest.remove((0, 0))
            (_, i), (_, j) = rest
            return Fraction(1) if i + j == r - 2 else Fraction(0)
        if 2 * g - 2 + (len(ins) - 1) <= 0:
            raise Unstable(f"cannot reduce {ins} at genus {g}")
        total = Fraction(0)
        for reduced in string_step(ins):
            total += bracket_value(engine, reduced, g)
        return total

    # domain screening comes before the selection shortcut, so brackets the
    # engine cannot evaluate are rejected, never silently zeroed
    descendants = [(n, m) for n, m in ins if n >= 1]
    primaries = [m for n, m in ins if n == 0]
    if len(descendants) >= 2:
        raise NotEngineComputable(f"two or more descendants in {ins}")
    if not descendants and g != 0:
        raise NotEngineComputable(
            f"pure-primary bracket {ins} at genus {g} has no string handle"
        )
    if selection_genus(r, ins) != g:
        return Fraction(0)
    if not descendants:
        return engine.primary(primaries)
    n, m = descendants[0]
    if not primaries:
        # <tau_{n,m}>_g: add a marked point through the string equation,
        # dispatching directly so the new tau_{0,0} is not stripped again
        return engine.correlator(n + 1, m, [0], g)
    return engine.correlator(n, m, primaries, g)


def string_reduce(
    engine: RSpinEngine, insertions: Iterable[tuple[int, int]], g: int | None = None
) -> Fraction:
    """Value of a bracket containing tau_{0,0} (spec'd entry point)."""
    ins = _canon(insertions)
    if (0, 0) not in ins:
        raise Unstable("string reduction needs a tau_{0,0} insertion")
    return bracket_value(engine, ins, g)


def trr_genus1(engine: RSpinEngine, n: int, m: int, primaries: Iterable[int]) -> Fraction:
    """<tau_{n,m} prod tau_{0,m_i}>_1 via the genus-1 recursion relation."""
    return engine.trr_genus1(n, m, list(primaries))


# ---------------------------------------------------------------------------
# the r = 3 hierarchy relation


@dataclass(frozen=True)
class RelationTerm:
    coeff: Fraction
    factors: tuple[tuple[Bracket, int | None], ...]  # (bracket, genus or None)


def _bouss_templates(n: int, m: int):
    """LHS and the five RHS templates of the bilinear hierarchy relation

        (3n+m+1) <<tau_{n,m} tau_{0,0}^2>> =
            <<tau_{n-1,m} tau_{0,1}>> <<tau_{0,0}^3>>
          + 2 <<tau_{n-1,m} tau_{0,0}>> <<tau_{0,1} tau_{0,0}^2>>
          + 2 <<tau_{n-1,m} tau_{0,1} tau_{0,0}>> <<tau_{0,0}^2>>
          + 2/3 <<tau_{n-1,m} tau_{0,1} tau_{0,0}^3>>
          + 3 <<tau_{n-1,m} tau_{0,0}^2>> <<tau_{0,1} tau_{0,0}>>
    """
    t = (n - 1, m)
    lhs = (Fraction(3 * n + m + 1), [[(n, m), (0, 0), (0, 0)]])
    rhs = [
        (Fraction(1), [[t, (0, 1)], [(0, 0)] * 3]),
        (Fraction(2), [[t, (0, 0)], [(0, 1), (0, 0), (0, 0)]]),
        (Fraction(2), [[t, (0, 1), (0, 0)], [(0, 0), (0, 0)]]),
        (Fraction(2, 3), [[t, (0, 1), (0, 0), (0, 0), (0, 0)]]),
        (Fraction(3), [[t, (0, 0), (0, 0)], [(0, 1), (0, 0)]]),
    ]
    return lhs, rhs


def boussinesq_expand(
    n: int, m: int, extra: Sequence[tuple[int, int]] = ()
) -> tuple[RelationTerm, list[RelationTerm]]:
    """Differentiate the relation by prod_e d/dt_e and set t = 0.

    `extra` lists the primary insertions (0, m_e) to differentiate by.
    Product terms expand by the Leibniz rule into 2^|extra| assignments.
    Every resulting bracket is tagged with its unique admissible genus,
    or None when the dimension constraint admits none (a zero factor).
    """
    if n < 1:
        raise ValueError("the relation involves tau_{n-1,m}; need n >= 1")
    for e in extra:
        if e[0] != 0:
            raise ValueError("may only differentiate by primary times")
    (lc, lfac), rhs = _bouss_templates(n, m)

    def finish(coeff, factors) -> RelationTerm:
        tagged = tuple(
            (_canon(f), selection_genus(3, _canon(f))) for f in factors
        )
        return RelationTerm(Fraction(coeff), tagged)

    lhs_term = finish(lc, [lfac[0] + list(extra)])
    out = []
    for coeff, factors in rhs:
        if len(factors) == 1:
            out.append(finish(coeff, [factors[0] + list(extra)]))
            continue
        for assign in itertools.product(range(2), repeat=len(extra)):
            f0 = list(factors[0])
            f1 = list(factors[1])
            for which, e in zip(assign, extra):
                (f0 if which == 0 else f1).append(e)
            out.append(finish(coeff, [f0, f1]))
    return lhs_term, out


def _term_value(engine: RSpinEngine, term: RelationTerm) -> Fraction:
    value = term.coeff
    for bracket, g in term.factors:
        if g is None:
            return Fraction(0)
        value *= bracket_value(engine, bracket, g)
        if not value:
            return Fraction(0)
    return value


def boussinesq_check(
    engine: RSpinEngine, n: int, m: int, extra: Sequence[tuple[int, int]] = ()
) -> dict:
    """Evaluate both sides of a relation instance; exact comparison."""
    if engine.r != 3:
        raise ValueError("the relation is specific to r = 3")
    lhs_term, rhs_terms = boussinesq_expand(n, m, extra)
    lhs = _term_value(engine, lhs_term)
    rhs = Fraction(0)
    terms_report = []
    for term in rhs_terms:
        v = _term_value(engine, term)
        rhs += v
        if any(g is not None for _, g in term.factors):
            terms_report.append(
                {
                    "coeff": format_rational(term.coeff),
                    "factors": [
                        {"bracket": list(map(list, b)), "genus": g}
                        for b, g in term.factors
                    ],
                    "value": format_rational(v),
                }
            )
    return {
        "instance": {"n": n, "m": m, "extra": [list(e) for e in extra]},
        "lhs": format_rational(lhs),
        "rhs": format_rational(rhs),
        "equal": lhs == rhs,
        "terms": terms_report,
    }


# ---------------------------------------------------------------------------
# independent derivation of <tau_{6,1}>_3


def _reduce_to_atom(bracket: Bracket, g: int) -> tuple[Bracket, int]:
    """Strip all tau_{0,0} insertions by the string equation.

    Valid only when the bracket carries at most one descendant, so each
    step produces a single term; this is all the chain below needs.
    """
    ins = list(bracket)
    while (0, 0) in ins and 2 * g - 2 + (len(ins) - 1) > 0:
        reduced = string_step(ins)
        if len(reduced) != 1:
            raise NotEngineComputable(f"ambiguous reduction of {ins}")
        ins = list(reduced[0])
    return _canon(ins), g


def derive_tau61_from_relations() -> Fraction:
    """<tau_{6,1}>_3 for r = 3 from three relation instances.

    Uses only the string equation and the genus-0 primary table: the
    instances (n, m, extra) = (8,1,()), (6,1,((0,1),)), (4,1,((0,1),(0,1)))
    yield a triangular linear system in the three unknown string-reduced
    brackets of genus 1, 2, 3, solved exactly.
    """
    primaries = BUILTIN_PRIMARY_TABLES[3]

    def atom_or_value(bracket: Bracket, g: int):
        atom, g = _reduce_to_atom(bracket, g)
        if g == 0:
            if len(atom) == 3 and all(n == 0 for n, _ in atom) and (0, 0) in atom:
                # exceptional three-point value: delta_{i+j, r-2}
                rest = list(atom)
                rest.remove((0, 0))
                (_, i), (_, j) = rest
                return Fraction(1) if i + j == 1 else Fraction(0)
            if any(n >= 1 for n, _ in atom):
                raise NotEngineComputable(f"genus-0 atom {atom} not primary")
            return primaries.get(tuple(sorted(m for _, m in atom)), Fraction(0))
        return ("atom", atom, g)

    equations = []
    for n, m, extra in ((8, 1, ()), (6, 1, ((0, 1),)), (4, 1, ((0, 1), (0, 1)))):
        lhs_term, rhs_terms = boussinesq_expand(n, m, extra)
        coeffs: dict = {}
        rhs_const = Fraction(0)

        def accumulate(term: RelationTerm, sign: int):
            nonlocal rhs_const
            scalar = term.coeff * sign
            symbol = None
            for bracket, g in term.factors:
                if g is None:
                    return
                v = atom_or_value(bracket, g)
                if isinstance(v, Fraction):
                    scalar *= v
                    if not scalar:
                        return
                elif symbol is None:
                    symbol = v[1:]
                else:
                    raise NotEngineComputable("two unknown factors in one term")
            if symbol is None:
                rhs_const -= scalar
            else:
                coeffs[symbol] = coeffs.get(symbol, Fraction(0)) + scalar

        accumulate(lhs_term, +1)
        for term in rhs_terms:
            accumulate(term, -1)
        equations.append((coeffs, rhs_const))

    solution, undetermined = solve_linear_system(equations)
    target = (((6, 1),), 3)
    if target not in solution:
        raise NotEngineComputable(f"chain left {undetermined} undetermined")
    return solution[target]
