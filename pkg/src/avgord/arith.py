"""Exact rationals, product trees and an unbounded prime stream.

Every certified quantity in the package is a ``BigRat`` (a ``gmpy2.mpq``),
which is kept in lowest terms by construction.  Floats only ever appear in
diagnostics produced by :func:`to_double`.
"""
from __future__ import annotations

import bisect
import functools
import itertools
import math
import os
import re
import threading
from typing import Iterable, Iterator

import gmpy2
from gmpy2 import mpq, mpz

BigRat = type(mpq())

DEFAULT_PRIME_CAP = 10**8
PRIME_CAP_ENV = "AVGORD_PRIME_CAP"


class ResourceError(RuntimeError):
    """A configured computation cap was exceeded."""


class PrimeCapError(ResourceError):
    pass


def rat(value, den=1) -> BigRat:
    """Coerce ints, strings and rationals to a reduced ``BigRat``."""
    if isinstance(value, str):
        q = parse_rat(value)
        return q if den == 1 else q / mpq(den)
    return mpq(value, den) if den != 1 else mpq(value)


_RAT_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_DEC_RE = re.compile(r"^\s*([+-]?)(\d*)(?:\.(\d*))?(?:[eE]([+-]?\d+))?\s*$")


def parse_rat(text: str) -> BigRat:
    """Parse ``"num/den"``, an integer, or a decimal literal exactly.

    >>> parse_rat("0.37")
    mpq(37,100)
    >>> parse_rat("1e-4")
    mpq(1,10000)
    """
    m = _RAT_RE.match(text)
    if m:
        den = mpz(m.group(2))
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return mpq(mpz(m.group(1)), den)
    m = _DEC_RE.match(text)
    if not m or not (m.group(2) or m.group(3)):
        raise ValueError(f"not an exact rational or decimal literal: {text!r}")
    sign, whole, frac, exp = m.groups()
    frac = frac or ""
    digits = mpz((whole or "0") + frac)
    shift = int(exp or 0) - len(frac)
    q = mpq(digits * mpz(10) ** shift) if shift >= 0 else mpq(digits, mpz(10) ** -shift)
    return -q if sign == "-" else q


def format_rat(q: BigRat) -> str:
    """Canonical ``"num/den"`` string (integers keep the ``/1``)."""
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def to_double(q: BigRat) -> float:
    """Nearest float to ``q``.  Diagnostic only; never used to certify.

    Raises ``OverflowError`` when ``q`` is outside the float range.
    """
    try:
        x = float(mpq(q))
    except OverflowError as exc:
        raise OverflowError(f"rational with {num_digits(q)} digits does not fit a float") from exc
    if math.isinf(x):
        raise OverflowError("rational does not fit a float")
    return x


def num_digits(q: BigRat) -> int:
    q = mpq(q)
    return gmpy2.num_digits(q.numerator) + gmpy2.num_digits(q.denominator)


def product(values: Iterable) -> mpz:
    """Balanced product tree; much faster than a left fold for big results."""
    layer = [mpz(v) for v in values]
    if not layer:
        return mpz(1)
    while len(layer) > 1:
        nxt = [layer[i] * layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def rat_product(values: Iterable[BigRat]) -> BigRat:
    """Exact product of rationals with a single final reduction."""
    nums, dens = [], []
    for v in values:
        v = mpq(v)
        nums.append(v.numerator)
        dens.append(v.denominator)
    return mpq(product(nums), product(dens))


def is_prime(n: int) -> bool:
    if n < 11:
        return n in (2, 3, 5, 7)
    if not n & 1 or n % 3 == 0 or n % 5 == 0 or n % 7 == 0:
        return False
    # bases 2, 3, 5, 7 are deterministic below 3215031751; BPSW is exact below 2^64
    if n < 3215031751:
        sprp = gmpy2.is_strong_prp
        return sprp(n, 2) and sprp(n, 3) and sprp(n, 5) and sprp(n, 7)
    return bool(gmpy2.is_bpsw_prp(n)) if n < 2**64 else bool(gmpy2.is_prime(n, 50))


@functools.lru_cache(maxsize=1 << 20)
def prime_power(n: int) -> tuple[int, int] | None:
    """``(p, e)`` with ``n == p**e`` and ``e >= 1``, or ``None``."""
    if n < 2:
        return None
    if is_prime(n):
        return n, 1
    for e in range(n.bit_length(), 1, -1):
        root, exact = gmpy2.iroot(mpz(n), e)
        if exact and is_prime(int(root)):
            return int(root), e
    return None


def prime_factors(n: int) -> frozenset[int]:
    """Distinct prime divisors by trial division (small group orders only)."""
    out = set()
    d = 2
    while d * d <= n:
        while n % d == 0:
            out.add(d)
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.add(n)
    return frozenset(out)


def prime_cap() -> int:
    raw = os.environ.get(PRIME_CAP_ENV)
    return int(raw) if raw else DEFAULT_PRIME_CAP


def _simple_sieve(limit: int) -> list[int]:
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for i in range(2, math.isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return list(itertools.compress(range(limit + 1), flags))


class PrimeStream:
    """Iterator over 2, 3, 5, ... from a segmented sieve of Eratosthenes.

    Each instance owns its sieve state; a fresh instance restarts at 2.
    Asking for a prime beyond ``cap`` raises :class:`PrimeCapError`.
    """

    def __init__(self, cap: int | None = None, segment: int = 1 << 18):
        self.cap = prime_cap() if cap is None else cap
        self.segment = segment
        self._base = _simple_sieve(math.isqrt(self.cap) + 1)
        self._lo = 0
        self._buffer: Iterator[int] = iter(())

    def __iter__(self) -> PrimeStream:
        return self

    def __next__(self) -> int:
        for p in self._buffer:
            return p
        while True:
            chunk = self.next_segment()
            if chunk:
                self._buffer = iter(chunk[1:])
                return chunk[0]

    def next_segment(self) -> list[int]:
        """Sieve the next block and return its primes (possibly empty)."""
        lo = self._lo
        if lo > self.cap:
            raise PrimeCapError(f"prime sieve cap {self.cap} exceeded ({PRIME_CAP_ENV} overrides it)")
        hi = min(lo + self.segment, self.cap + 1)
        size = hi - lo
        flags = bytearray([1]) * size
        for i in range(max(0, 2 - lo)):
            flags[i] = 0
        for q in self._base:
            if q * q >= hi:
                break
            start = max(q * q, -(-lo // q) * q) - lo
            if start < size:
                flags[start::q] = bytes((size - 1 - start) // q + 1)
        self._lo = hi
        return list(itertools.compress(range(lo, hi), flags))


class _PrimeTable:
    """Shared, append-only list of the first primes (guarded by a lock)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._primes: list[int] = []
        self._stream: PrimeStream | None = None

    def ensure(self, count: int) -> list[int]:
        cap = prime_cap()
        if len(self._primes) >= count and self._stream is not None and self._stream.cap == cap:
            return self._primes
        with self._lock:
            if self._stream is None or self._stream.cap != cap:
                self._stream = PrimeStream()
                self._primes = []
            while len(self._primes) < count:
                self._primes.extend(self._stream.next_segment())
        return self._primes


_TABLE = _PrimeTable()


def first_primes(count: int) -> list[int]:
    """At least the first ``count`` primes, as a shared list (do not mutate)."""
    return _TABLE.ensure(count)


def nth_prime(n: int) -> int:
    """The ``n``-th prime, 1-indexed: ``nth_prime(1) == 2``."""
    if n < 1:
        raise ValueError("prime index must be >= 1")
    return first_primes(n)[n - 1]


def prime_index(p: int) -> int:
    """Inverse of :func:`nth_prime` for a prime ``p``."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    count = 64
    while True:
        primes = first_primes(count)
        if primes[-1] >= p:
            return bisect.bisect_left(primes, p) + 1
        count *= 2
