from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from avgord.arith import (
    PrimeCapError,
    PrimeStream,
    first_primes,
    format_rat,
    is_prime,
    nth_prime,
    num_digits,
    parse_rat,
    prime_factors,
    prime_index,
    prime_power,
    product,
    rat,
    to_double,
)


def naive_primes(limit):
    """Trial division, deliberately unrelated to the sieve under test."""
    out = []
    for n in range(2, limit):
        if all(n % p for p in out if p * p <= n):
            out.append(n)
    return out


def test_nth_prime_small():
    assert nth_prime(1) == 2
    assert nth_prime(4) == 7


def test_nth_prime_10000_cross_checked():
    ref = naive_primes(104730)
    assert len(ref) == 10000
    assert nth_prime(10000) == ref[-1] == 104729
    assert first_primes(10000)[:10000] == ref


def test_prime_index_inverts_nth_prime():
    for n in (1, 2, 3, 100, 5000):
        assert prime_index(nth_prime(n)) == n
    with pytest.raises(ValueError):
        prime_index(4)


def test_prime_stream_respects_cap():
    s = PrimeStream(cap=100)
    got = []
    with pytest.raises(PrimeCapError):
        for p in s:
            got.append(p)
    assert got == naive_primes(101)


def test_prime_stream_env_cap(monkeypatch):
    monkeypatch.setenv("AVGORD_PRIME_CAP", "50")
    with pytest.raises(PrimeCapError):
        list(PrimeStream())


def test_reciprocal_prime_sum_passes_two():
    # the partial sums of 1/p grow without bound; exact witness that they pass 2
    total, n = Fraction(0), 0
    for p in first_primes(100):
        total += Fraction(1, p)
        n += 1
        if total > 2:
            break
    assert total > 2
    assert n == 59


def test_is_prime_and_powers():
    assert [n for n in range(30) if is_prime(n)] == naive_primes(30)
    assert prime_power(8) == (2, 3)
    assert prime_power(9) == (3, 2)
    assert prime_power(6) is None
    assert prime_power(1) is None
    assert prime_factors(360) == {2, 3, 5}


@pytest.mark.parametrize("text,expected", [
    ("19/22", mpq(19, 22)),
    ("0.37", mpq(37, 100)),
    ("1e-4", mpq(1, 10000)),
    ("3.5", mpq(7, 2)),
    ("7", mpq(7)),
    ("-2.5E1", mpq(-25)),
    (" 4/6 ", mpq(2, 3)),
])
def test_parse_rat_exact(text, expected):
    assert parse_rat(text) == expected


@pytest.mark.parametrize("text", ["", "abc", "1/0", "1.2.3", "nan", "1/"])
def test_parse_rat_rejects(text):
    with pytest.raises(ValueError):
        parse_rat(text)


def test_format_and_double():
    assert format_rat(mpq(3)) == "3/1"
    assert format_rat(mpq(14, 12)) == "7/6"
    assert to_double(mpq(7, 6)) == 1.1666666666666667
    assert to_double(mpq(0)) == 0.0
    assert abs(to_double(mpq(343, 823543)) - 4.1649e-4) < 1e-8
    with pytest.raises(OverflowError):
        to_double(mpq(10**400, 3))


def test_product_tree_matches_fold():
    vals = list(range(1, 300))
    acc = 1
    for v in vals:
        acc *= v
    assert product(vals) == acc
    assert product([]) == 1


fractions = st.fractions(max_denominator=10**6).map(lambda f: mpq(f.numerator, f.denominator))


@given(fractions, fractions, fractions)
def test_field_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if b:
        assert (a / b) * b == a


@given(fractions)
def test_format_parse_roundtrip(q):
    assert parse_rat(format_rat(q)) == q
    assert rat(format_rat(q)) == q
    assert num_digits(q) >= 2


@given(st.integers(-10**6, 10**6), st.integers(0, 6))
def test_decimal_literal_is_exact(units, places):
    text = f"{units / 10**places:.{places}f}" if places else str(units)
    assert parse_rat(text) == Fraction(text)
