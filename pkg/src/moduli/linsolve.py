"""Exact Gaussian elimination over the rationals for small sparse systems."""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence

__all__ = ["InconsistentSystem", "solve_linear_system"]


class InconsistentSystem(ValueError):
    """The equations admit no common solution."""


def solve_linear_system(
    equations: Sequence[tuple[Mapping[Hashable, Fraction], Fraction]],
) -> tuple[dict[Hashable, Fraction], set[Hashable]]:
    """Solve sum(coeffs[v] * v) = rhs over the rationals.

    Returns (solution, undetermined): `solution` assigns a value to every
    variable that is uniquely determined; the rest land in `undetermined`.
    Raises InconsistentSystem when elimination produces 0 = nonzero.
    """
    pivots: list[tuple[Hashable, dict, Fraction]] = []  # (pivot var, row, rhs)

    def reduce_row(row: dict, rhs: Fraction) -> tuple[dict, Fraction]:
        for pvar, prow, prhs in pivots:
            c = row.pop(pvar, None)
            if c:
                for v, pc in prow.items():
                    nv = row.get(v, Fraction(0)) - c * pc
                    if nv:
                        row[v] = nv
                    else:
                        row.pop(v, None)
                rhs -= c * prhs
        return row, rhs

    for coeffs, rhs in equations:
        row = {v: Fraction(c) for v, c in coeffs.items() if c}
        row, rhs = reduce_row(row, Fraction(rhs))
        if not row:
            if rhs:
                raise InconsistentSystem(f"0 = {rhs} after elimination")
            continue
        pvar = sorted(row)[0]
        pc = row.pop(pvar)
        row = {v: c / pc for v, c in row.items()}
        rhs = rhs / pc
        # keep earlier pivot rows reduced with respect to the new one
        for i, (v0, r0, b0) in enumerate(pivots):
            c = r0.get(pvar)
            if c:
                for v, pc2 in row.items():
                    nv = r0.get(v, Fraction(0)) - c * pc2
                    if nv:
                        r0[v] = nv
                    else:
                        r0.pop(v, None)
                r0.pop(pvar, None)
                pivots[i] = (v0, r0, b0 - c * rhs)
        pivots.append((pvar, row, rhs))

    all_vars = set()
    for coeffs, _ in equations:
        all_vars.update(v for v, c in coeffs.items() if c)
    solution: dict[Hashable, Fraction] = {}
    undetermined: set[Hashable] = set()
    pivot_vars = {p for p, _, _ in pivots}
    free = all_vars - pivot_vars
    for pvar, row, rhs in pivots:
        if any(v in free or v in undetermined for v in row):
            undetermined.add(pvar)
        else:
            # row may still reference other pivot vars only through zero
            # coefficients (popped); at this point it is fully reduced
            solution[pvar] = rhs
    undetermined |= free
    return solution, undetermined
