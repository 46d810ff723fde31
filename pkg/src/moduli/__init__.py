"""Exact enumerative geometry of curves: Hurwitz numbers, genus-zero
tautological intersections, and r-spin intersection numbers."""

__version__ = "0.1.0"

#: bumped whenever cached values become incompatible
ENGINE_VERSION = "moduli-1"

from .partitions import RamificationProfile, format_rational, parse_rational
from .hurwitz import (
    H1_closed,
    H_generalized,
    S_difference_table,
    combinatorial_identity,
    delta_psi_integral,
    hurwitz_bruteforce,
    hurwitz_class_algebra,
    hurwitz_polynomial_closed,
    tau3g_from_hurwitz,
)
from .m0n import TautClass, fundamental_class, psi_p_class, intersection_hurwitz
from .rspin import RSpinEngine, dimension_D, selection_genus
from .hierarchy import boussinesq_check, bracket_value, derive_tau61_from_relations

__all__ = [
    "ENGINE_VERSION",
    "RamificationProfile",
    "format_rational",
    "parse_rational",
    "H1_closed",
    "H_generalized",
    "S_difference_table",
    "combinatorial_identity",
    "delta_psi_integral",
    "hurwitz_bruteforce",
    "hurwitz_class_algebra",
    "hurwitz_polynomial_closed",
    "tau3g_from_hurwitz",
    "TautClass",
    "fundamental_class",
    "psi_p_class",
    "intersection_hurwitz",
    "RSpinEngine",
    "dimension_D",
    "selection_genus",
    "boussinesq_check",
    "bracket_value",
    "derive_tau61_from_relations",
]
