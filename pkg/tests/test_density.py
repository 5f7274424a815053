import math
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from avgord.arith import first_primes, nth_prime
from avgord.basepairs import base_pair, builtin_base_pairs
from avgord.certify import verify
from avgord.density import (
    BaseInsufficientError,
    BudgetError,
    RatioTermSequence,
    construct_ge1,
    construct_le1_abelian,
    construct_sub_unit_nilpotent,
    greedy_subproduct,
    kmz_bound_plan,
    kmz_plan_at,
    ratio_term,
    select_base_pair,
    seq_diagnostics,
)
from avgord.groups import Named, TRIVIAL, avg_order, cyclic, parse_group


def r(p, m=2):
    return Fraction(p ** (m + 1) - p + 1, p ** (m + 1) - p**m + p ** (m - 1))


def test_ratio_terms():
    assert ratio_term(2, 2) == (7, 6)
    assert RatioTermSequence(2).term(1) == mpq(7, 6)
    assert RatioTermSequence(2).term(2) == mpq(25, 21)
    seq = RatioTermSequence(3, excluded=[1])
    n, q = next(iter(seq))
    assert n == 2 and q == r(3, 3)


def test_greedy_trivial_and_single_term():
    assert greedy_subproduct(1, RatioTermSequence(2), mpq(1, 10)).indices == ()
    sub = greedy_subproduct(mpq(7, 6), RatioTermSequence(2), mpq(1, 10**9))
    assert sub.indices == (1,)
    assert sub.product == mpq(7, 6)


def test_greedy_target_two_frozen():
    eps = Fraction(1, 1000)
    sub = greedy_subproduct(2, RatioTermSequence(2), mpq(1, 1000))
    assert sub.indices == (1, 2, 3, 4, 5, 11)
    # re-multiply independently with Fraction and the primes from trial division
    P = math.prod(r(p) for p in (2, 3, 5, 7, 11, 31))
    assert Fraction(int(sub.product.numerator), int(sub.product.denominator)) == P
    assert 2 / (1 + eps) <= P <= 2


def test_greedy_follows_take_rule():
    # every skipped index before the last taken one would have overshot
    target = Fraction(3)
    sub = greedy_subproduct(3, RatioTermSequence(2), mpq(1, 10**4))
    P = Fraction(1)
    for n in range(1, sub.indices[-1] + 1):
        t = r(nth_prime(n))
        if n in sub.indices:
            P *= t
            assert P <= target
        else:
            assert P * t > target


def test_exclusion_respected():
    sub = greedy_subproduct(2, RatioTermSequence(2, excluded=[1, 2]), mpq(1, 1000))
    assert 1 not in sub.indices and 2 not in sub.indices
    assert 2 not in sub.primes and 3 not in sub.primes


def test_budget_error_reports_best():
    with pytest.raises(BudgetError) as err:
        greedy_subproduct(5, RatioTermSequence(2), mpq(1, 1000), max_terms=50)
    e = err.value
    assert e.scanned == 50
    assert e.achieved == math.prod(r(p) for p in first_primes(50)[:50])
    assert e.achieved < 5


def test_bad_arguments():
    with pytest.raises(ValueError):
        greedy_subproduct(mpq(1, 2), RatioTermSequence(2), mpq(1, 10))
    with pytest.raises(ValueError):
        greedy_subproduct(2, RatioTermSequence(2), 0)


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=1, max_value=6, max_denominator=1000),
       st.sampled_from([Fraction(1, 10), Fraction(1, 1000), Fraction(1, 10**6)]),
       st.integers(2, 4))
def test_greedy_bracket(target, eps, m):
    t, e = mpq(target.numerator, target.denominator), mpq(eps.numerator, eps.denominator)
    sub = greedy_subproduct(t, RatioTermSequence(m), e)
    assert sub.product <= t <= sub.product * (1 + e)
    assert list(sub.indices) == sorted(set(sub.indices))


def test_construct_ge1_examples():
    c = construct_ge1(1, mpq(1, 10))
    assert c.g == TRIVIAL and c.h == TRIVIAL and c.claimed_ratio == 1
    c = construct_ge1(mpq(7, 6), mpq(1, 10**6))
    assert c.g == parse_group("C(2)^2") and c.h == cyclic(2)
    assert avg_order(c.g) / avg_order(c.h) == mpq(7, 6)
    c = construct_ge1(10, mpq(1, 10**4))
    v = verify(c)
    assert v.ok
    assert 1 <= c.target / v.recomputed_ratio <= 1 + mpq(1, 10**4)


def test_construct_le1_examples():
    c = construct_le1_abelian(1, mpq(1, 10))
    assert c.claimed_ratio == 1
    c = construct_le1_abelian(mpq(6, 7), mpq(1, 10**6))
    assert c.g == parse_group("C(2)^2") and c.h == cyclic(2) and c.claimed_ratio == mpq(6, 7)
    c = construct_le1_abelian(mpq(37, 100), mpq(1, 1000))
    assert verify(c).ok
    assert mpq(37, 100) <= c.claimed_ratio <= mpq(37, 100) * (1 + mpq(1, 1000))
    with pytest.raises(ValueError):
        construct_le1_abelian(0, mpq(1, 10))


def test_sub_unit_examples():
    d4c4 = base_pair("D4C4")
    c = construct_sub_unit_nilpotent(mpq(19, 22), mpq(1, 1000), d4c4)
    assert c.g == Named("D4") and c.claimed_ratio == mpq(19, 22) and c.trace.indices == ()
    c = construct_sub_unit_nilpotent(mpq(9, 10), mpq(1, 1000), d4c4)
    assert 1 not in c.trace.indices
    assert mpq(9, 10) / (1 + mpq(1, 1000)) <= c.claimed_ratio <= mpq(9, 10)
    assert verify(c).ok
    with pytest.raises(BaseInsufficientError) as err:
        construct_sub_unit_nilpotent(mpq(1, 10), mpq(1, 1000), d4c4)
    assert err.value.plan is not None and err.value.plan.n == 4


def test_builtin_base_pairs():
    pairs = builtin_base_pairs()
    rhos = [bp.rho0 for bp in pairs]
    assert rhos[0] == mpq(19, 22) and rhos[1] == mpq(59, 86)
    assert rhos == sorted(rhos, reverse=True)
    for k, bp in zip(range(2, 9), pairs):
        assert bp.rho0 == mpq(1, 2) + mpq(3 * 2**k, 2 ** (2 * k + 1) + 1)
        bp.validate()
    assert select_base_pair(mpq(6, 10)).key == "DihTwo(4)"
    assert select_base_pair(mpq(99, 100)).key == "D4C4"


def test_kmz_plans():
    plan = kmz_bound_plan(mpq(1, 1000))
    assert (plan.n, plan.p, plan.bound) == (4, 7, mpq(343, 823543))
    assert plan.bound == mpq(1, 2401)
    assert kmz_bound_plan(mpq(1, 2401)).n == 4
    assert kmz_bound_plan(mpq(1, 2402)).n == 5
    # independent scan for 1e-9
    n = 4
    while Fraction(nth_prime(n) ** 3, nth_prime(n) ** nth_prime(n)) > Fraction(1, 10**9):
        n += 1
    assert kmz_bound_plan(mpq(1, 10**9)).n == n == 6
    bounds = [kmz_plan_at(k).bound for k in range(4, 16)]
    assert all(a > b for a, b in zip(bounds, bounds[1:]))
    with pytest.raises(ValueError):
        kmz_bound_plan(0)


def test_diagnostics():
    row = seq_diagnostics(2, 1)[0]
    assert row.r == mpq(7, 6)
    assert abs(row.x - 0.15415) < 1e-5
    assert abs(row.px - 0.30830) < 1e-5
    rows = seq_diagnostics(3, 200)
    assert all(x.x > 0 for x in rows)
    assert abs(rows[-1].partial - sum(math.log(r(x.p, 3)) for x in rows)) < 1e-9
