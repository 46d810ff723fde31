import itertools
from fractions import Fraction

import pytest

from moduli.rspin import (
    AffineForm,
    MissingPrimaryTable,
    RSpinEngine,
    UnsolvedShat1,
    canonical_shat1_key,
    dimension_D,
    primary_table_from_json_obj,
    primary_table_to_json_obj,
    selection_genus,
    shat1_table_from_json_obj,
    shat1_table_to_json_obj,
)

F = Fraction


def test_dimension_D():
    assert dimension_D(3, 3, [1, 0, 0, 0, 0]) == 1
    assert dimension_D(2, 5, [0, 0]) == 0
    assert dimension_D(4, 1, [2, 2]) == 1
    assert dimension_D(3, 0, [1]) == F(-1, 3) + F(1, 3)


def test_selection_genus():
    assert selection_genus(3, [(7, 1), (0, 0)]) == 3
    assert selection_genus(3, [(0, 0)] * 3) is None
    assert selection_genus(3, [(0, 0), (0, 0), (0, 1)]) == 0
    assert selection_genus(3, [(8, 1), (0, 0), (0, 0)]) == 3
    # genus uniqueness: the constraint is affine in g with positive slope
    for ins in ([(2, 1), (0, 0)], [(3, 0), (0, 1), (0, 1)], [(6, 1)]):
        valid = [
            g
            for g in range(9)
            if 3 * g - 3 + len(ins)
            == sum(n for n, _ in ins) + dimension_D(3, g, [m for _, m in ins])
        ]
        assert len(valid) <= 1


def test_affine_form_algebra():
    k = canonical_shat1_key([(2, 2), (2, -2)])
    x = AffineForm.symbol(k)
    f = x.scale(F(1, 3)) + AffineForm.constant(F(1, 2))
    assert not f.is_constant()
    assert f.substitute({k: F(3, 2)}).const == F(1)
    with pytest.raises(UnsolvedShat1):
        x.times(x)


def test_canonical_key_negation_symmetry():
    a = canonical_shat1_key([(2, 3), (2, -3)])
    b = canonical_shat1_key([(2, -3), (2, 3)])
    assert a == b
    c = canonical_shat1_key([(1, 2), (2, -1), (1, -1)])
    d = canonical_shat1_key([(1, -2), (2, 1), (1, 1)])
    assert c == d


def test_primary_lookup():
    e3 = RSpinEngine(3)
    assert e3.primary([0, 0, 1]) == 1
    assert e3.primary([1, 0, 0]) == 1
    assert e3.primary([0, 0, 0]) == 0  # selection fails
    assert e3.primary([1, 1, 1, 1]) == F(1, 3)
    e4 = RSpinEngine(4)
    assert e4.primary([1, 1, 2, 2]) == F(1, 4)
    assert e4.primary([2, 2, 2, 2, 2]) == F(1, 8)
    # user-supplied tables are partial: absent selection-valid entries raise
    e5 = RSpinEngine(5, primary_table={(0, 0, 3): F(1)})
    assert e5.primary([0, 0, 3]) == 1
    assert e5.primary([0, 0, 0]) == 0
    with pytest.raises(MissingPrimaryTable):
        e5.primary([1, 1, 1])  # selection-valid three-point entry, absent
    with pytest.raises(MissingPrimaryTable):
        RSpinEngine(7)


def test_S_reference_values():
    e3 = RSpinEngine(3)
    assert e3.S_number(7, 3, 1, [(0, 1)] * 4) == F(209, 2**7 * 3**4 * 5 * 7)
    assert e3.S_number(1, 1, 1, [(1, 3), (1, 1)]) == F(1, 3)
    assert e3.S_number(5, 3, 1, [(0, 1), (0, 1)]) == F(1, 2**7 * 3**3 * 5 * 7)
    assert e3.S_number(0, 0, 1, [(1, 1), (1, 1), (1, 2)]) == F(1, 3)


def test_S_selection_rules():
    e3 = RSpinEngine(3)
    # wrong psi power: n + D != 2g + s - 2
    assert e3.S_number(8, 3, 1, [(0, 1)] * 4) == 0
    assert e3.S_number(6, 3, 1, [(0, 1)] * 4) == 0
    # single simple insertion vanishes in every genus
    for g in range(3):
        assert e3.S_number(2 * g, g, 1, [(1, 1)]) == 0
    # negative genus is zero, not an error
    assert e3.S_form(0, -1, 1, [(1, 1)]).is_constant()


def test_S_input_validation():
    e3 = RSpinEngine(3)
    with pytest.raises(ValueError):
        e3.S_number(1, 0, 1, [])
    with pytest.raises(ValueError):
        e3.S_number(-1, 0, 1, [(1, 1)])
    with pytest.raises(ValueError):
        e3.S_number(1, 0, 5, [(1, 1)])
    with pytest.raises(ValueError):
        e3.S_number(1, 0, 1, [(1, 0)])


def test_correlator_reference_values():
    e3 = RSpinEngine(3)
    assert e3.correlator(7, 1, [0], 3) == F(1, 2**7 * 3**5)
    assert e3.correlator(1, 1, [1, 1, 1, 0], 0) == F(1, 3)
    e4 = RSpinEngine(4)
    assert e4.correlator(2, 0, [0], 1) == F(1, 8)


def test_r2_engine_agrees_with_hurwitz_cross_sum():
    from math import factorial

    from moduli.hurwitz import tau3g_from_hurwitz

    e2 = RSpinEngine(2)
    assert e2.correlator(2, 0, [0], 1) == tau3g_from_hurwitz(1, 0) == F(1, 24)
    assert e2.correlator(6, 0, [0, 0], 2) == tau3g_from_hurwitz(2, 0) == F(1, 1152)
    # push both routes to genus 4: 1/(24^g g!) throughout
    for g in (3, 4):
        want = F(1, 24**g * factorial(g))
        assert e2.correlator(3 * g, 0, [0, 0], g) == want
        assert tau3g_from_hurwitz(g, 0) == want


def test_correlator_decoupled_labels():
    e3 = RSpinEngine(3)
    assert e3.correlator(1, 2, [0], 1) == 0
    assert e3.correlator(1, 1, [2, 0], 0) == 0
    with pytest.raises(ValueError):
        e3.correlator(1, 1, [], 0)


def test_genus1_forms_match_worked_example():
    # the two expressions for <tau_{1,2} tau_{0,2}>_1 at r = 4
    e4 = RSpinEngine(4, auto_solve=False)
    x22 = canonical_shat1_key([(2, 2), (2, -2)])
    x23 = canonical_shat1_key([(2, 3), (2, -3)])
    f1 = e4.genus1_correlator_form(1, 2, [(2, 1)])
    assert f1.const == 0
    assert f1.lin_map()[x22] == F(1, 3)
    f2 = e4.genus1_correlator_form(1, 2, [(2, 2)])
    lin = f2.lin_map()
    assert lin[x23] == F(1, 3) and lin[x22] == F(4, 9) - 1
    # specializing all multiplicities to 1 reproduces the plain correlator
    e4b = RSpinEngine(4)
    assert e4b._resolve(e4b.genus1_correlator_form(2, 0, [(0, 1)])) == F(1, 8)


def test_shat1_solver_and_values():
    e4 = RSpinEngine(4)
    table = e4.solve_shat1(3)
    assert e4.shat1([(2, 2), (2, -2)]) == F(1, 32)
    assert e4.shat1([(2, 3), (2, -3)]) == F(1, 12)
    assert e4.shat1([(2, 1), (2, -1)]) == 0
    # sign symmetry and vanishing rules
    assert e4.shat1([(2, -2), (2, 2)]) == F(1, 32)
    assert e4.shat1([(0, 2), (2, -2)]) == 0  # label 0
    assert e4.shat1([(3, 2), (3, -2)]) == 0  # label r-1
    assert e4.shat1([(2, 2), (2, -1), (2, -1)]) == 0  # selection
    with pytest.raises(ValueError):
        e4.shat1([(2, 2), (2, -1)])  # multiplicities must sum to zero
    # degenerate hierarchies have empty tables
    assert RSpinEngine(3).solve_shat1(6) == {}
    assert RSpinEngine(2).solve_shat1(6) == {}
    assert RSpinEngine(3).shat1_candidates(6) == []


def test_genus0_multiplicity_independence():
    for r in (3, 4):
        eng = RSpinEngine(r)
        for labels in itertools.product(range(r - 1), repeat=2):
            for mults in itertools.product(range(1, 4), repeat=2):
                for n in range(3):
                    assert eng.S_number(n, 0, 1, tuple(zip(labels, mults))) == (
                        eng.S_number(n, 0, 1, tuple((q, 1) for q in labels))
                    )


def test_memoization_transparency():
    e3 = RSpinEngine(3)
    key = (7, 3, 1, ((0, 1),) * 4)
    first = e3.S_number(*key)
    assert e3.S_number(*key) == first
    # round-trip the memo through the serialization layer
    cached = e3.dump_constants()
    fresh = RSpinEngine(3)
    accepted = fresh.preload(cached)
    assert accepted == len(cached)
    assert fresh.S_number(*key) == first
    # the preloaded engine answers from cache
    assert fresh.cache_misses == 0 or fresh.cache_misses < e3.cache_misses


def test_unsolved_shat1_raises_without_auto_solve():
    e4 = RSpinEngine(4, auto_solve=False)
    with pytest.raises(UnsolvedShat1):
        e4.shat1([(2, 2), (2, -2)])


def test_solver_detects_poisoned_table():
    from moduli.linsolve import InconsistentSystem

    bad = {canonical_shat1_key([(2, 2), (2, -2)]): F(1, 7)}
    engine = RSpinEngine(4, shat1_table=bad, auto_solve=False)
    with pytest.raises(InconsistentSystem):
        engine.solve_shat1(3)


def test_concurrent_queries_on_shared_engine():
    from concurrent.futures import ThreadPoolExecutor

    engine = RSpinEngine(3)
    jobs = [
        (7, 1, (0,), 3),
        (4, 1, (0,), 2),
        (1, 1, (1, 1, 1, 0), 0),
        (2, 1, (1,), 1),
    ] * 4
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(lambda a: engine.correlator(*a), jobs))
    serial_engine = RSpinEngine(3)
    serial = [serial_engine.correlator(*a) for a in jobs]
    assert parallel == serial


def test_table_json_round_trips():
    r, table = 4, dict(RSpinEngine(4).primary_table)
    obj = primary_table_to_json_obj(r, table)
    assert primary_table_from_json_obj(obj) == (r, table)
    e4 = RSpinEngine(4)
    e4.solve_shat1(3)
    sh = e4.shat1_values
    obj = shat1_table_to_json_obj(4, sh)
    assert shat1_table_from_json_obj(obj) == (4, sh)
    # a solved table can seed another engine
    seeded = RSpinEngine(4, shat1_table=sh, auto_solve=False)
    assert seeded.shat1([(2, 3), (2, -3)]) == F(1, 12)
