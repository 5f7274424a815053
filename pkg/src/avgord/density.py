"""Constructive approximation of target ratios o(G)/o(H).

The [1, oo) constructor multiplies terms

    r_n = o(C(p_n)^m) / o(C(p_n)) = (p^(m+1) - p + 1) / (p^(m+1) - p^m + p^(m-1))

chosen greedily: every r_n > 1, r_n -> 1 and the sum of log r_n diverges,
so finite subproducts come arbitrarily close to any target >= 1.  Logs
never enter the decision path; all comparisons are exact.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from gmpy2 import mpq, mpz

from .arith import BigRat, first_primes, prime_index, product, to_double
from .basepairs import BasePair, builtin_base_pairs
from .certify import CERT_VERSION, Certificate, Trace
from .groups import Abelian, GroupExpr, direct_product, primes_of

DEFAULT_M = 2
DEFAULT_MAX_TERMS = 10**6
FIXED_BITS = 256
# scan this many terms before paying for the exhaustion pre-check
_SHORTCUT_AFTER = 1 << 16


class BudgetError(RuntimeError):
    """The term budget ran out before the tolerance was met."""

    def __init__(self, target, scanned: int, num, den):
        self.target = target
        self.scanned = scanned
        self._num, self._den = num, den
        approx = int(num) / int(den)
        super().__init__(
            f"term budget of {scanned} exhausted before reaching {target}; "
            f"best subproduct is about {approx:.15g}"
        )
        self.achieved_approx = approx

    @functools.cached_property
    def achieved(self) -> BigRat:
        return mpq(self._num, self._den)


class BaseInsufficientError(ValueError):
    """The base pair's ratio already exceeds the target."""

    def __init__(self, message: str, plan: KmzPlan | None):
        super().__init__(message)
        self.plan = plan


def ratio_term(p: int, m: int) -> tuple[int, int]:
    """Unreduced ``(num, den)`` of o(C(p)^m) / o(C(p))."""
    return p ** (m + 1) - p + 1, p ** (m + 1) - p**m + p ** (m - 1)


class RatioTermSequence:
    """Terms r_n for n = 1, 2, ... skipping the prime indices in ``excluded``."""

    def __init__(self, m: int = DEFAULT_M, excluded: Iterable[int] = ()):
        if m < 2:
            raise ValueError("m must be >= 2")
        self.m = m
        self.excluded = frozenset(excluded)
        if any(n < 1 for n in self.excluded):
            raise ValueError("prime indices start at 1")

    def raw(self) -> Iterator[tuple[int, int, int, int]]:
        """Yield ``(n, p_n, num, den)`` with the unreduced closed-form fraction."""
        m, skip = self.m, self.excluded
        chunk = 4096
        n = 0
        while True:
            primes = first_primes(n + chunk)
            for p in primes[n : n + chunk]:
                n += 1
                if n not in skip:
                    yield n, p, p ** (m + 1) - p + 1, p ** (m + 1) - p**m + p ** (m - 1)
            chunk = min(chunk * 2, 1 << 18)

    def __iter__(self) -> Iterator[tuple[int, BigRat]]:
        for n, _, num, den in self.raw():
            yield n, mpq(num, den)

    def term(self, n: int) -> BigRat:
        if n in self.excluded:
            raise KeyError(f"index {n} is excluded")
        p = first_primes(n)[n - 1]
        return mpq(*ratio_term(p, self.m))


@functools.lru_cache(maxsize=8)
def _budget_product(m: int, excluded: frozenset, max_terms: int) -> tuple:
    """Exact unreduced product of the first ``max_terms`` terms."""
    nums, dens = [], []
    for _, _, num, den in RatioTermSequence(m, excluded).raw():
        nums.append(num)
        dens.append(den)
        if len(nums) == max_terms:
            break
    return product(nums), product(dens)


@functools.lru_cache(maxsize=8)
def _budget_upper_bound(m: int, excluded: frozenset, max_terms: int) -> int:
    """Integer U with U / 2^FIXED_BITS >= product of the first ``max_terms`` terms."""
    u = 1 << FIXED_BITS
    for k, (_, _, num, den) in enumerate(RatioTermSequence(m, excluded).raw(), 1):
        u = -((-u * num) // den)
        if k == max_terms:
            break
    return u


@dataclass(frozen=True)
class Subproduct:
    indices: tuple[int, ...]
    primes: tuple[int, ...]
    product: BigRat
    scanned: int


def greedy_subproduct(target, seq: RatioTermSequence, eps, max_terms: int = DEFAULT_MAX_TERMS) -> Subproduct:
    """Greedy finite subproduct P of the sequence with P <= target <= P*(1+eps).

    Indices are scanned in increasing order; n is taken iff P*r_n <= target,
    and the scan stops as soon as target <= P*(1+eps).  Decisions use
    fixed-point bounds on target/P and fall back to exact big-integer
    comparisons only when the bounds cannot decide.
    """
    target, eps = mpq(target), mpq(eps)
    if target < 1:
        raise ValueError("target must be >= 1")
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if max_terms < 0:
        raise ValueError("max_terms must be >= 0")
    slack = 1 + eps
    if target <= slack:
        return Subproduct((), (), mpq(1), 0)

    K = FIXED_BITS
    tn, td = mpz(target.numerator), mpz(target.denominator)
    sn, sd = mpz(slack.numerator), mpz(slack.denominator)
    stop_ref = sn << K
    chosen: list[tuple[int, int, int, int]] = []
    exact = [mpz(1), mpz(1), 0]

    def materialize():
        k = exact[2]
        if k < len(chosen):
            exact[0] *= product(c[2] for c in chosen[k:])
            exact[1] *= product(c[3] for c in chosen[k:])
            exact[2] = len(chosen)
        return exact[0], exact[1]

    def exact_bounds():
        pn, pd = materialize()
        a, b = (tn * pd) << K, td * pn
        return int(a // b), int(-((-a) // b))

    lo, hi = int((tn << K) // td), int(-((-(tn << K)) // td))
    scanned = 0
    done = False
    for term in seq.raw():
        if scanned == max_terms:
            break
        scanned += 1
        if scanned == _SHORTCUT_AFTER:
            bound = _budget_upper_bound(seq.m, seq.excluded, max_terms)
            if (tn << K) * sd > sn * bound * td:
                # every remaining term fits and the stop rule never fires
                raise BudgetError(target, max_terms, *_budget_product(seq.m, seq.excluded, max_terms))
        _, _, rn, rd = term
        a = rn << K
        if a <= lo * rd:
            take = True
        elif a > hi * rd:
            take = False
        else:
            pn, pd = materialize()
            take = pn * rn * td <= tn * pd * rd
            lo, hi = exact_bounds()
        if not take:
            continue
        chosen.append(term)
        lo, hi = lo * rd // rn, -((-hi * rd) // rn)
        if hi * sd <= stop_ref:
            done = True
            break
        if lo * sd > stop_ref:
            continue
        pn, pd = materialize()
        if tn * pd * sd <= sn * pn * td:
            done = True
            break
        lo, hi = exact_bounds()
    pn, pd = materialize()
    if not done:
        raise BudgetError(target, scanned, pn, pd)
    return Subproduct(
        tuple(c[0] for c in chosen),
        tuple(c[1] for c in chosen),
        mpq(pn, pd),
        scanned,
    )


# -- constructors ------------------------------------------------------------


def _tail(sub: Subproduct, m: int) -> tuple[list[GroupExpr], list[GroupExpr]]:
    g = [Abelian.prime_power_factors(p, m) for p in sub.primes]
    h = [Abelian.prime_power_factors(p, 1) for p in sub.primes]
    return g, h


def construct_ge1(a, eps, m: int = DEFAULT_M, excluded: Iterable[int] = (),
                  max_terms: int = DEFAULT_MAX_TERMS) -> Certificate:
    """Certificate for o(G)/o(H) <= a <= o(G)/o(H) * (1 + eps) with abelian G.

    G is the product of C(p_n)^m and H the product of C(p_n) over the chosen
    indices n; ``excluded`` removes prime indices from consideration.
    """
    a, eps = mpq(a), mpq(eps)
    if a < 1:
        raise ValueError("construct_ge1 needs a >= 1")
    seq = RatioTermSequence(m, excluded)
    sub = greedy_subproduct(a, seq, eps, max_terms)
    g, h = _tail(sub, m)
    return Certificate(
        mode="ge1",
        target=a,
        eps=eps,
        g=direct_product(g),
        h=direct_product(h),
        claimed_ratio=sub.product,
        trace=Trace(m=m, excluded=tuple(sorted(seq.excluded)), indices=sub.indices, base=None),
        version=CERT_VERSION,
    )


def construct_le1_abelian(a, eps, m: int = DEFAULT_M, max_terms: int = DEFAULT_MAX_TERMS) -> Certificate:
    """Inverse mode: a <= o(H)/o(G) <= a * (1 + eps) for abelian H <= G."""
    a, eps = mpq(a), mpq(eps)
    if a <= 0:
        raise ValueError("0 is a limit point, not attained; use kmz_bound_plan for approach-to-zero witnesses")
    if a > 1:
        raise ValueError("construct_le1_abelian needs 0 < a <= 1")
    seq = RatioTermSequence(m)
    sub = greedy_subproduct(1 / a, seq, eps, max_terms)
    g, h = _tail(sub, m)
    return Certificate(
        mode="le1_abelian",
        target=a,
        eps=eps,
        g=direct_product(g),
        h=direct_product(h),
        claimed_ratio=1 / sub.product,
        trace=Trace(m=m, excluded=(), indices=sub.indices, base=None),
        version=CERT_VERSION,
    )


# -- base pairs ---------------------------------------------------------------


def select_base_pair(a) -> BasePair:
    """Built-in pair with the largest ratio not exceeding ``a``."""
    a = mpq(a)
    fits = [bp for bp in builtin_base_pairs() if bp.rho0 <= a]
    if not fits:
        plan = kmz_bound_plan(a) if 0 < a < 1 else None
        raise BaseInsufficientError(
            f"no built-in base pair has ratio <= {a} (smallest is {min(b.rho0 for b in builtin_base_pairs())})",
            plan,
        )
    return max(fits, key=lambda bp: bp.rho0)


def construct_sub_unit_nilpotent(a, eps, base: BasePair | None = None, m: int = DEFAULT_M,
                                 max_terms: int = DEFAULT_MAX_TERMS) -> Certificate:
    """Compose a base pair with an abelian tail on the remaining primes.

    With rho0 = o(G0)/o(H0) <= a, the tail targets a/rho0 >= 1 while avoiding
    every prime of the base, so o is multiplicative across the two parts.
    """
    a, eps = mpq(a), mpq(eps)
    if not 0 < a < 1:
        raise ValueError("construct_sub_unit_nilpotent needs 0 < a < 1")
    if base is None:
        base = select_base_pair(a)
    if base.rho0 > a:
        raise BaseInsufficientError(
            f"base pair insufficient: {base.key} has ratio {base.rho0} > {a}", kmz_bound_plan(a)
        )
    excluded = frozenset(prime_index(p) for p in base.primes)
    seq = RatioTermSequence(m, excluded)
    sub = greedy_subproduct(a / base.rho0, seq, eps, max_terms)
    g_tail, h_tail = _tail(sub, m)
    g = direct_product([base.g0] + g_tail)
    h = direct_product([base.h0] + h_tail)
    tail_primes = set(sub.primes)
    if tail_primes & primes_of(base.g0) or tail_primes & primes_of(base.h0):
        raise AssertionError("abelian tail shares a prime with the base pair")
    return Certificate(
        mode="sub_unit_nilpotent",
        target=a,
        eps=eps,
        g=g,
        h=h,
        claimed_ratio=base.rho0 * sub.product,
        trace=Trace(m=m, excluded=tuple(sorted(excluded)), indices=sub.indices, base=base.key),
        version=CERT_VERSION,
    )


# -- approach to zero -----------------------------------------------------------


@dataclass(frozen=True)
class KmzPlan:
    n: int
    p: int
    s: int
    bound: BigRat
    narrative: str


def kmz_plan_at(n: int, a=None) -> KmzPlan:
    if n < 4:
        raise ValueError("the bound is used from n = 4 (p = 7) on")
    p = first_primes(n)[n - 1]
    bound = mpq(p**3, p**p)
    s = p + 1
    target = "a" if a is None else str(mpq(a))
    narrative = (
        f"Take p = p_{n} = {p} and s = p + 1 = {s}. Let U be the homocyclic group of exponent "
        f"{p}^{s} and G = U P its semidirect product with a secretive {p}-group P. "
        f"Then o(G) < p^3 and o(U) >= p^p, so o(G)/o(U) < p^3/p^p = {bound}. "
        f"G is not constructed here. To reach {target} >= that ratio, extend both groups by an "
        f"abelian tail over primes other than {p} with tail ratio targeting {target} * o(U)/o(G), "
        f"a value that stays symbolic because o(G) is not computed."
    )
    return KmzPlan(n, p, s, bound, narrative)


def kmz_bound_plan(a) -> KmzPlan:
    """Smallest n >= 4 with p_n^3 / p_n^(p_n) <= a."""
    a = mpq(a)
    if not 0 < a < 1:
        raise ValueError("kmz_bound_plan needs 0 < a < 1")
    n = 4
    while True:
        p = first_primes(n)[n - 1]
        if mpq(p**3, p**p) <= a:
            return kmz_plan_at(n, a)
        n += 1


# -- diagnostics ---------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticRow:
    n: int
    p: int
    r: BigRat
    x: float
    px: float
    partial: float


def seq_diagnostics(m: int, N: int) -> list[DiagnosticRow]:
    """x_n = ln r_n, p_n * x_n and partial sums of x_n for n <= N (floats, diagnostic only)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    rows = []
    total = 0.0
    for n, p, num, den in RatioTermSequence(m).raw():
        if n > N:
            break
        x = math.log1p((num - den) / den)
        total += x
        rows.append(DiagnosticRow(n, p, mpq(num, den), x, p * x, total))
    return rows


def describe(value: BigRat) -> str:
    try:
        return f"{to_double(value):.15g}"
    except OverflowError:
        return "overflow"
