import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

import pytest

from moduli.m0n import (
    DegreeOverflow,
    InvalidSubset,
    PointAlreadyPresent,
    all_undecorated_strata,
    boundary_class,
    classes_numerically_equal,
    fundamental_class,
    mul_pullback_psi,
    profile_points,
    psi_class,
    psi_p_class,
    psi_p_times,
    intersection_hurwitz,
    intersection_integrand,
)
from moduli.hurwitz import PreconditionViolated, hurwitz_polynomial_closed
from moduli.partitions import RamificationProfile

F = Fraction
RP = RamificationProfile


@lru_cache(maxsize=None)
def psi_monomial_oracle(exponents: tuple) -> Fraction:
    """<tau_{k_1} ... tau_{k_N}>_0 by the string equation alone.

    Independent of the stratum calculus: remove a zero-index insertion,
    lowering each positive index in turn, down to the three-point base.
    """
    ks = tuple(sorted(exponents))
    N = len(ks)
    if sum(ks) != N - 3:
        return F(0)
    if N == 3:
        return F(1)
    assert ks[0] == 0
    rest = ks[1:]
    total = F(0)
    for i, k in enumerate(rest):
        if k >= 1:
            total += psi_monomial_oracle(rest[:i] + (k - 1,) + rest[i + 1 :])
    return total


def psi_monomial(points, exponents):
    c = fundamental_class(points)
    for p, k in zip(points, exponents):
        for _ in range(k):
            c = c.mul_psi(p)
    return c


def test_integrate_basics():
    assert fundamental_class([1, 2, 3]).integrate() == 1
    assert psi_class(range(4), 0).integrate() == 1
    assert boundary_class(range(4), {0, 1}).integrate() == 1  # a point class
    c = fundamental_class(range(6))
    for _ in range(3):
        c = c.mul_psi(0)
    assert c.integrate() == 1
    assert psi_class(range(4), 0).mul_psi(0).integrate() == 0  # degree too high


def test_psi_monomials_match_string_oracle():
    for N in range(3, 8):
        points = tuple(range(N))
        for ks in itertools.combinations_with_replacement(range(N - 2), N):
            if sum(ks) != N - 3:
                continue
            value = psi_monomial(points, ks).integrate()
            mult = factorial(N - 3)
            for k in ks:
                mult //= factorial(k)
            assert value == mult == psi_monomial_oracle(ks)


def test_psi_on_point_stratum_vanishes():
    c = boundary_class(range(4), {0, 1}).mul_psi(0)
    assert c.integrate() == 0 and c.is_zero()  # decoration overflows the vertex


def test_boundary_products():
    pts4 = range(4)
    assert boundary_class(pts4, {0, 1}).mul_boundary({0, 2}).is_zero()
    # dimension mismatch integrates to zero on four points
    assert boundary_class(pts4, {0, 1}).mul_boundary({0, 1}).integrate() == 0
    # honest excess self-intersection on five points
    pts5 = range(5)
    assert boundary_class(pts5, {0, 1}).mul_boundary({0, 1}).integrate() == -1
    # complementary subsets name the same divisor
    assert boundary_class(pts5, {0, 1}) == boundary_class(pts5, {2, 3, 4})
    d = boundary_class(pts5, {0, 1})
    assert d.mul_boundary({0, 1}) == d.mul_boundary({2, 3, 4})
    with pytest.raises(InvalidSubset):
        boundary_class(pts4, {0})
    with pytest.raises(InvalidSubset):
        boundary_class(pts4, {0, 1, 2})


def test_forgetful_pullback_rules():
    pts4, pts5 = range(4), range(5)
    f4 = fundamental_class(pts4)
    assert f4.forgetful_pullback(4) == fundamental_class(pts5)
    # psi = pi* psi + D_{x,new}
    lhs = psi_class(pts5, 0)
    rhs = psi_class(pts4, 0).forgetful_pullback(4) + boundary_class(pts5, {0, 4})
    assert lhs == rhs
    # pi* D_U = D_U + D_{U + new}
    lhs = boundary_class(pts4, {0, 1}).forgetful_pullback(4)
    rhs = boundary_class(pts5, {0, 1}) + boundary_class(pts5, {0, 1, 4})
    assert lhs == rhs
    with pytest.raises(PointAlreadyPresent):
        f4.forgetful_pullback(2)


def test_pullback_composition_matches_closed_form():
    # pull psi(x) back from a 4-point space through two extra points
    pts4 = (0, 1, 2, 3)
    c = psi_class(pts4, 0)
    for y in (4, 5):
        c = c.forgetful_pullback(y)
    direct = mul_pullback_psi(fundamental_class(range(6)), pts4, 0)
    assert c == direct
    # psi on three points is the zero class, so its pullback is zero and
    # the divisor expansion is a relation: psi(0) = D03 + D04 + D034 on
    # five points
    zero = mul_pullback_psi(fundamental_class(range(5)), (0, 1, 2), 0)
    assert classes_numerically_equal(zero, fundamental_class(range(5)).scale(0))


def test_pullback_consistency_integral():
    # integral of pi*psi(x) . psi(x)^{N-4} = psi^{N-3} - D . psi^{N-4}
    N = 6
    pts = tuple(range(N))
    keep = (0, 1, 2)
    base = fundamental_class(pts)
    for _ in range(N - 4):
        base = base.mul_psi(0)
    lhs = mul_pullback_psi(base, keep, 0).integrate()
    rhs = base.mul_psi(0).integrate()
    for V in itertools.chain.from_iterable(
        itertools.combinations((3, 4, 5), k) for k in (1, 2, 3)
    ):
        rhs -= base.mul_boundary(set(V) | {0}).integrate()
    assert lhs == rhs


def test_psi_p_degenerate_profile():
    # one passport (a,b), the rest simple: Psi_2 is a pulled-back psi
    prof = RP(4, ((4,), (3, 1), (2, 1, 1)))
    pts = profile_points(prof)
    keep = {(1, 1), (2, 1), (2, 2), (3, 1)}
    assert psi_p_class(prof, 2) == mul_pullback_psi(fundamental_class(pts), keep, (3, 1))


def test_psi_p_two_term_closed_form():
    prof = RP(4, ((4,), (2, 2), (2, 1, 1)))
    pts = profile_points(prof)
    a1 = a2 = 2
    n = 4
    keep3 = {(1, 1), (3, 1), (3, 2), (3, 3)}
    f = fundamental_class(pts)
    t1 = f
    for _ in range(a1 - 1):
        t1 = mul_pullback_psi(t1, keep3 | {(2, 1)}, (2, 1))
    for _ in range(a2 - 1):
        t1 = mul_pullback_psi(t1, keep3 | {(2, 2)}, (2, 2))
    t1 = t1.scale(factorial(a1 - 1) * factorial(a2 - 1))
    t2 = f
    for _ in range(n - 3):
        t2 = mul_pullback_psi(t2, keep3 | {(2, 1)}, (2, 1))
    t2 = t2.mul_boundary({(2, 1), (2, 2)}).scale(
        factorial(n - 2) - factorial(a1 - 1) * factorial(a2 - 1)
    )
    assert psi_p_class(prof, 3) == t1 - t2


def test_psi_p_zero_index_is_identity():
    prof = RP(4, ((4,), (2, 2), (2, 1, 1)))
    pts = profile_points(prof)
    zero = {pt: 0 for pt in pts if pt[0] >= 2 and pt[0] != 2}
    acc = psi_class(pts, (1, 1))
    assert psi_p_times(acc, prof, 2, zero) == acc


def test_psi_p_guards():
    prof = RP(4, ((4,), (2, 2), (2, 1, 1)))
    pts = profile_points(prof)
    over = {pt: 2 for pt in pts if pt[0] >= 2 and pt[0] != 2}
    with pytest.raises(DegreeOverflow):
        psi_p_class(prof, 2, over)
    with pytest.raises(ValueError):
        psi_p_class(prof, 2, {(3, 1): 1})  # incomplete index map


def test_order_independence_small():
    prof = RP(4, ((4,), (2, 2), (2, 1, 1)))
    pts = profile_points(prof)
    indexed = [pt for pt in pts if pt[0] == 3]
    bmap = dict(zip(indexed, (1, 1, 0)))
    ref = psi_p_class(prof, 2, bmap)
    for order in itertools.permutations(indexed):
        pick = (lambda o: lambda b: next(z for z in o if b.get(z)))(order)
        assert classes_numerically_equal(ref, psi_p_class(prof, 2, bmap, pick=pick))


def test_intersection_formula_reference_values():
    assert intersection_hurwitz(RP(4, ((4,), (3, 1), (2, 1, 1)))) == 1
    assert intersection_hurwitz(RP(4, ((4,), (2, 2), (2, 1, 1)))) == F(1, 2)
    assert intersection_hurwitz(RP(3, ((3,), (2, 1), (2, 1)))) == 1


def test_intersection_formula_equals_closed_form_on_bigger_profiles():
    for prof in (
        RP(5, ((5,), (4, 1), (2, 1, 1, 1))),
        RP(5, ((5,), (3, 2), (2, 1, 1, 1))),
        RP(5, ((5,), (3, 1, 1), (2, 2, 1))),
        RP(5, ((5,), (2, 2, 1), (2, 2, 1))),
    ):
        assert intersection_hurwitz(prof) == hurwitz_polynomial_closed(prof)


def test_intersection_formula_equals_closed_form_exhaustively():
    # every admissible profile with at most seven marked points
    from moduli.acceptance import genus0_full_cycle_profiles

    checked = 0
    for n in range(3, 7):
        for prof in genus0_full_cycle_profiles(n):
            if len(prof.passports) < 3 or len(profile_points(prof)) > 7:
                continue
            assert intersection_hurwitz(prof) == hurwitz_polynomial_closed(prof), prof
            checked += 1
    assert checked == 8  # 1 + 2 + 5 profiles at degrees 3, 4, 5


def test_intersection_formula_with_four_branch_points():
    # exercises the psi(x^1_1)^{m-3} factor; ten marked points, so slow-ish
    prof = RP(4, ((4,), (2, 1, 1), (2, 1, 1), (2, 1, 1)))
    assert intersection_hurwitz(prof, max_points=10) == 4


def test_intersection_formula_guards():
    with pytest.raises(PreconditionViolated):
        intersection_hurwitz(RP(3, ((3,), (3,))))
    with pytest.raises(DegreeOverflow):
        intersection_hurwitz(
            RP(6, ((6,), (3, 2, 1), (2, 1, 1, 1, 1), (2, 1, 1, 1, 1)))
        )


def test_psi_equals_boundary_sum():
    # classically psi(x) is the sum of all divisors separating x from two
    # fixed reference points; exercises products and the numeric pairing
    for N in (5, 6):
        pts = tuple(range(N))
        total = fundamental_class(pts).scale(0)
        for k in range(2, N - 1):
            for U in itertools.combinations(pts, k):
                if 0 in U and 1 not in U and 2 not in U:
                    total = total + boundary_class(pts, U)
        assert classes_numerically_equal(psi_class(pts, 0), total)


def test_undecorated_strata_counts():
    # 4 points: three boundary points; 5 points: 10 divisors, 15 codim-2 strata
    assert len(list(all_undecorated_strata(range(4), 1))) == 3
    assert len(list(all_undecorated_strata(range(5), 1))) == 10
    assert len(list(all_undecorated_strata(range(5), 2))) == 15
    for st in all_undecorated_strata(range(5), 2):
        assert st.integral() == 1  # point classes


def test_json_dump_shape_and_determinism():
    prof = RP(4, ((4,), (3, 1), (2, 1, 1)))
    cls = intersection_integrand(prof)
    obj1 = cls.to_json_obj()
    obj2 = intersection_integrand(prof).to_json_obj()
    assert obj1 == obj2
    for term in obj1:
        assert set(term) == {"parent", "legs", "deco", "coeff"}
        assert term["parent"][0] == -1
        assert len(term["legs"]) == 6
