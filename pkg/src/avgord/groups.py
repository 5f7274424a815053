"""Group descriptors and exact element-order statistics.

A ``GroupExpr`` is one of

* :class:`Abelian` -- elementary divisors, e.g. ``C(2)^3`` or ``C(9)``;
* :class:`Named` -- a registry key such as ``D4``, ``Q8``, ``C4``, ``DihTwo(5)``;
* :class:`Perm` -- ``perm:<path>``, a generator file evaluated by brute force;
* :class:`Product` -- a direct product of the above.

Text form: factors joined by `` x ``, ``^k`` for direct powers, and the
empty string for the trivial group.
"""
from __future__ import annotations

import functools
import math
import re
from itertools import product as cartesian
from dataclasses import dataclass, field
from typing import Callable, Union

from gmpy2 import mpq, mpz

from .arith import BigRat, prime_factors, prime_power, product
from .distribution import OrderDistribution, lcm_convolve, psi
from . import perm as _perm


class GroupSyntaxError(ValueError):
    pass


class UnknownGroupError(GroupSyntaxError):
    pass


@dataclass(frozen=True)
class Abelian:
    """Finite abelian group in elementary-divisor form.

    ``factors`` is a sorted tuple of prime powers; the empty tuple is the
    trivial group.
    """

    factors: tuple[int, ...] = ()
    _local: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    @classmethod
    def prime_power_factors(cls, p: int, k: int) -> Abelian:
        """C(p)^k for a ``p`` already known to be prime (skips validation)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "factors", (p,) * k)
        object.__setattr__(obj, "_local", {p: [1] * k} if k else {})
        return obj

    def __post_init__(self):
        factors = tuple(sorted(self.factors))
        local: dict[int, list[int]] = {}
        last = None
        for q in factors:
            if q != last:
                pe = prime_power(q)
                if pe is None:
                    raise GroupSyntaxError(f"C({q}): cyclic factors must be prime powers >= 2")
                last = q
            local.setdefault(pe[0], []).append(pe[1])
        object.__setattr__(self, "factors", factors)
        # prime -> exponents in decreasing order
        object.__setattr__(self, "_local", {p: sorted(es, reverse=True) for p, es in sorted(local.items())})

    @property
    def order(self) -> int:
        return math.prod(self.factors)

    @property
    def primes(self) -> frozenset[int]:
        return frozenset(self._local)

    def local_exponents(self) -> dict[int, list[int]]:
        """``{p: [e1, e2, ...]}`` with exponents in decreasing order."""
        return {p: list(es) for p, es in self._local.items()}

    def __str__(self):
        parts = []
        i = 0
        while i < len(self.factors):
            j = i
            while j < len(self.factors) and self.factors[j] == self.factors[i]:
                j += 1
            k = j - i
            parts.append(f"C({self.factors[i]})" + (f"^{k}" if k > 1 else ""))
            i = j
        return " x ".join(parts)


@dataclass(frozen=True)
class Named:
    key: str

    def __str__(self):
        return self.key


@dataclass(frozen=True)
class Perm:
    path: str

    def __str__(self):
        return f"perm:{self.path}"


@dataclass(frozen=True)
class Product:
    factors: tuple

    def __str__(self):
        return " x ".join(str(f) for f in self.factors)

    @functools.cached_property
    def coprime(self) -> bool:
        """Whether the factor orders are pairwise coprime."""
        seen: set[int] = set()
        for f in self.factors:
            ps = primes_of(f)
            if seen & ps:
                return False
            seen |= ps
        return True


GroupExpr = Union[Abelian, Named, Perm, Product]

TRIVIAL = Abelian(())


def cyclic(n: int, power: int = 1) -> Abelian:
    return Abelian((n,) * power)


def direct_product(factors) -> GroupExpr:
    """Product node, flattening nested products; one factor is returned as is."""
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Product) else [f])
    if not flat:
        return TRIVIAL
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def factors_of(expr: GroupExpr) -> tuple:
    """Top-level direct factors (the trivial group has none)."""
    if isinstance(expr, Product):
        return expr.factors
    if expr == TRIVIAL:
        return ()
    return (expr,)


# -- registry ----------------------------------------------------------------


@dataclass(frozen=True)
class NamedGroup:
    key: str
    distribution: OrderDistribution
    realize: Callable[[], _perm.PermGroup] = field(compare=False)
    abelian: bool = False
    nilpotent: bool = True


def _cyclic_dist(p: int, k: int) -> dict[int, int]:
    counts = {1: 1}
    for j in range(1, k + 1):
        counts[p**j] = p**j - p ** (j - 1)
    return counts


def dihedral_two_distribution(k: int) -> OrderDistribution:
    """Dihedral group of order 2^(k+1): rotations form C(2^k), the other 2^k
    elements are reflections of order 2."""
    counts = _cyclic_dist(2, k)
    counts[2] = counts.get(2, 0) + 2**k
    return OrderDistribution.from_counts(counts)


_STATIC = {
    "D4": NamedGroup("D4", OrderDistribution.from_counts({1: 1, 2: 5, 4: 2}), lambda: _perm.dihedral(4)),
    "Q8": NamedGroup("Q8", OrderDistribution.from_counts({1: 1, 2: 1, 4: 6}), _perm.quaternion),
    "C4": NamedGroup("C4", OrderDistribution.from_counts({1: 1, 2: 1, 4: 2}), lambda: _perm.cyclic_product([4]), abelian=True),
}

_DIH_RE = re.compile(r"^DihTwo\((\d+)\)$")
MAX_DIHTWO = 20


@functools.lru_cache(maxsize=None)
def registry_entry(key: str) -> NamedGroup:
    if key in _STATIC:
        return _STATIC[key]
    m = _DIH_RE.match(key)
    if m:
        k = int(m.group(1))
        if not 2 <= k <= MAX_DIHTWO:
            raise UnknownGroupError(f"DihTwo(k) needs 2 <= k <= {MAX_DIHTWO}, got {k}")
        return NamedGroup(key, dihedral_two_distribution(k), lambda: _perm.dihedral(2**k))
    raise UnknownGroupError(f"unknown named group {key!r}")


def registry_keys() -> list[str]:
    return sorted(_STATIC) + [f"DihTwo({k})" for k in range(2, 7)]


@functools.lru_cache(maxsize=None)
def realization(expr: GroupExpr) -> _perm.PermGroup:
    """A permutation group isomorphic to ``expr`` (for oracle checks)."""
    if isinstance(expr, Abelian):
        return _perm.cyclic_product(expr.factors)
    if isinstance(expr, Named):
        return registry_entry(expr.key).realize()
    if isinstance(expr, Perm):
        return _perm.load_generators(expr.path)
    gens, offset = [], 0
    for f in expr.factors:
        g = realization(f)
        for s in g.generators:
            images = tuple(range(offset)) + tuple(offset + i for i in s.images)
            gens.append(_perm.Permutation(images))
        offset += g.degree
    return _perm.PermGroup(gens, offset)


# -- parsing -----------------------------------------------------------------

_TERM_RE = re.compile(r"^(C\((\d+)\)|DihTwo\(\d+\)|[A-Za-z][A-Za-z0-9_]*|perm:.+?)(?:\^(\d+))?$")


def parse_group(text: str) -> GroupExpr:
    """Parse the descriptor grammar, e.g. ``"C(2)^3 x C(9) x D4"``."""
    text = text.strip()
    if not text:
        return TRIVIAL
    out = []
    for raw in re.split(r"\s+x\s+", text):
        term = raw.strip()
        m = _TERM_RE.match(term)
        if not m:
            raise GroupSyntaxError(f"cannot parse group term {term!r}")
        atom, n, power = m.group(1), m.group(2), m.group(3)
        k = int(power) if power else 1
        if k < 1:
            raise GroupSyntaxError(f"power must be >= 1 in {term!r}")
        if n is not None:
            out.append(Abelian((int(n),) * k))
            continue
        if atom.startswith("perm:"):
            node = Perm(atom[5:])
        else:
            registry_entry(atom)
            node = Named(atom)
        out.extend([node] * k)
    return direct_product(out)


# -- statistics --------------------------------------------------------------


def _local_counts(p: int, exps: list[int]) -> dict[int, int]:
    # exactly p^(sum min(e_i, j)) elements have order dividing p^j
    counts = {1: 1}
    prev = 1
    for j in range(1, exps[0] + 1):
        upto = p ** sum(min(e, j) for e in exps)
        counts[p**j] = upto - prev
        prev = upto
    return counts


def abelian_order_distribution(desc: Abelian) -> OrderDistribution:
    """Counting rule per prime, then coprime products across primes."""
    dist = None
    for p, exps in desc._local.items():
        local = OrderDistribution.from_counts(_local_counts(p, exps))
        dist = local if dist is None else lcm_convolve(dist, local)
    return dist or OrderDistribution.trivial()


def cyclic_psi_closed(p: int, k: int) -> int:
    """psi(C(p^k)) = (p^(2k+1) + 1) / (p + 1)."""
    return (p ** (2 * k + 1) + 1) // (p + 1)


def order_distribution(expr: GroupExpr, cap: int = _perm.DEFAULT_ENUM_CAP) -> OrderDistribution:
    """Full distribution; products are always lcm-convolved."""
    if isinstance(expr, Abelian):
        return abelian_order_distribution(expr)
    if isinstance(expr, Named):
        return registry_entry(expr.key).distribution
    if isinstance(expr, Perm):
        return _perm.order_distribution_bruteforce(realization(expr), cap)
    dist = OrderDistribution.trivial()
    for f in expr.factors:
        dist = lcm_convolve(dist, order_distribution(f, cap))
    return dist


def group_order(expr: GroupExpr, cap: int = _perm.DEFAULT_ENUM_CAP) -> int:
    if isinstance(expr, Abelian):
        return expr.order
    if isinstance(expr, Named):
        return registry_entry(expr.key).distribution.total
    if isinstance(expr, Perm):
        return realization(expr).order(cap)
    return math.prod(group_order(f, cap) for f in expr.factors)


def primes_of(expr: GroupExpr) -> frozenset[int]:
    if isinstance(expr, Abelian):
        return expr.primes
    if isinstance(expr, Product):
        return frozenset().union(*(primes_of(f) for f in expr.factors))
    return prime_factors(group_order(expr))


def is_abelian(expr: GroupExpr) -> bool:
    if isinstance(expr, Abelian):
        return True
    if isinstance(expr, Named):
        return registry_entry(expr.key).abelian
    if isinstance(expr, Perm):
        g = realization(expr)
        return all(a * b == b * a for a in g.generators for b in g.generators)
    return all(is_abelian(f) for f in expr.factors)


def avg_order_parts(expr: GroupExpr, cap: int = _perm.DEFAULT_ENUM_CAP) -> tuple:
    """``(num, den)`` of o(G), not necessarily in lowest terms.

    Products of pairwise coprime factors multiply the factor values without
    reducing, which keeps huge products cheap to compare by cross
    multiplication.
    """
    if isinstance(expr, Product) and expr.coprime:
        nums, dens = [], []
        for f in expr.factors:
            n, d = avg_order_parts(f, cap)
            nums.append(n)
            dens.append(d)
        return product(nums), product(dens)
    if isinstance(expr, Abelian):
        local = expr._local
        if len(local) == 1:
            ((p, exps),) = local.items()
            if exps[0] == 1:
                # elementary abelian C(p)^r: every non-identity element has order p
                size = p ** len(exps)
                return mpz(1 + p * (size - 1)), mpz(size)
        nums, dens = [], []
        for p, exps in local.items():
            nums.append(sum(d * c for d, c in _local_counts(p, exps).items()))
            dens.append(p ** sum(exps))
        return product(nums), product(dens)
    dist = order_distribution(expr, cap)
    return mpz(psi(dist)), mpz(dist.total)


def avg_order(expr: GroupExpr, cap: int = _perm.DEFAULT_ENUM_CAP) -> BigRat:
    """o(G) = psi(G) / |G| as an exact rational.

    Products of pairwise coprime factors are evaluated as the product of the
    factor values; anything else goes through the full distribution.
    """
    return mpq(*avg_order_parts(expr, cap))


def o_ratio(g: GroupExpr, h: GroupExpr) -> BigRat:
    return avg_order(g) / avg_order(h)


def psi_of(expr: GroupExpr) -> int:
    """psi(G) = o(G) * |G|, using the multiplicative path where it applies."""
    q = avg_order(expr) * group_order(expr)
    assert q.denominator == 1
    return int(q.numerator)




def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def abelian_groups_of_order(n: int) -> list[Abelian]:
    """Every abelian group of order ``n``, one per isomorphism class."""
    local = []
    for p in sorted(prime_factors(n)):
        e = 0
        while n % p ** (e + 1) == 0:
            e += 1
        local.append([tuple(p**k for k in part) for part in _partitions(e)])
    return [Abelian(tuple(q for part in combo for q in part)) for combo in cartesian(*local)]
