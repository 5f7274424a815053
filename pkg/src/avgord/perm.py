"""Brute-force permutation groups: the ground truth for every closed form.

Groups are enumerated completely by breadth-first closure, so everything
here is limited to desk-scale orders and fails loudly beyond its cap.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .arith import ResourceError, prime_factors
from .distribution import OrderDistribution

DEFAULT_ENUM_CAP = 10**6
DEFAULT_LATTICE_CAP = 64

_CYCLE_RE = re.compile(r"\(([^()]*)\)")


class EnumerationCapError(ResourceError):
    def __init__(self, cap: int, partial: int):
        super().__init__(f"group enumeration exceeded cap {cap} (at least {partial} elements found)")
        self.cap = cap
        self.partial = partial


@dataclass(frozen=True, order=True)
class Permutation:
    """A bijection of ``{1..n}`` stored as a 0-based image tuple.

    ``a * b`` applies ``a`` first, then ``b``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, degree: int) -> Permutation:
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, text: str, degree: int | None = None) -> Permutation:
        """Parse disjoint-cycle notation such as ``"(1 2 3)(4 5)"``."""
        cycles = parse_cycles(text)
        top = max((x for c in cycles for x in c), default=0)
        degree = top if degree is None else degree
        if top > degree:
            raise ValueError(f"point {top} exceeds degree {degree}")
        images = list(range(degree))
        seen: set[int] = set()
        for cycle in cycles:
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                if a in seen:
                    raise ValueError(f"cycles in {text!r} are not disjoint")
                seen.add(a)
                images[a - 1] = b - 1
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __mul__(self, other: Permutation) -> Permutation:
        o = other.images
        return Permutation(tuple(o[i] for i in self.images))

    def inverse(self) -> Permutation:
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles, 1-based, each starting at its smallest point."""
        seen = [False] * len(self.images)
        out = []
        for start in range(len(self.images)):
            if seen[start]:
                continue
            cycle = []
            i = start
            while not seen[i]:
                seen[i] = True
                cycle.append(i + 1)
                i = self.images[i]
            if len(cycle) > 1:
                out.append(tuple(cycle))
        return out

    def __str__(self):
        cs = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cs) if cs else "()"


def parse_cycles(text: str) -> list[tuple[int, ...]]:
    text = text.strip()
    if _CYCLE_RE.sub("", text).strip():
        raise ValueError(f"malformed cycle notation: {text!r}")
    out = []
    for body in _CYCLE_RE.findall(text):
        pts = tuple(int(t) for t in body.replace(",", " ").split())
        if any(x < 1 for x in pts) or len(set(pts)) != len(pts):
            raise ValueError(f"malformed cycle ({body})")
        if len(pts) > 1:
            out.append(pts)
    return out


def element_order(p: Permutation) -> int:
    """Order of ``p``: the lcm of its cycle lengths."""
    return _raw_order(p.images)


def _raw_order(images: tuple[int, ...]) -> int:
    seen = bytearray(len(images))
    result = 1
    for start in range(len(images)):
        if seen[start]:
            continue
        n = 0
        i = start
        while not seen[i]:
            seen[i] = 1
            i = images[i]
            n += 1
        result = result * n // math.gcd(result, n)
    return result


class PermGroup:
    """A permutation group given by generators, with a cached element list."""

    def __init__(self, generators: Sequence[Permutation], degree: int | None = None, name: str | None = None):
        gens = list(generators)
        if degree is None:
            degree = max((g.degree for g in gens), default=1)
        degree = max(degree, 1)
        self.degree = degree
        self.generators = tuple(_pad(g, degree) for g in gens)
        self.name = name
        self._elements: list[Permutation] | None = None
        self._members: set[tuple[int, ...]] | None = None

    def __repr__(self):
        gens = ", ".join(map(str, self.generators))
        return f"PermGroup({self.name or gens})"

    def elements(self, cap: int = DEFAULT_ENUM_CAP) -> list[Permutation]:
        if self._elements is None:
            self._elements = enumerate_elements(self, cap)
        elif len(self._elements) > cap:
            raise EnumerationCapError(cap, len(self._elements))
        return self._elements

    def order(self, cap: int = DEFAULT_ENUM_CAP) -> int:
        return len(self.elements(cap))

    def contains(self, p: Permutation, cap: int = DEFAULT_ENUM_CAP) -> bool:
        imgs = p.images
        if len(imgs) > self.degree:
            if any(imgs[i] != i for i in range(self.degree, len(imgs))):
                return False
            imgs = imgs[: self.degree]
        imgs = imgs + tuple(range(len(imgs), self.degree))
        if self._members is None:
            self._members = {x.images for x in self.elements(cap)}
        return imgs in self._members


def _pad(p: Permutation, degree: int) -> Permutation:
    if p.degree == degree:
        return p
    if p.degree > degree:
        raise ValueError("generator degree exceeds group degree")
    return Permutation(p.images + tuple(range(p.degree, degree)))


def enumerate_elements(g: PermGroup, cap: int = DEFAULT_ENUM_CAP) -> list[Permutation]:
    """All elements of ``g``, sorted by image array.

    Breadth-first closure of the identity under right multiplication by the
    generators.  Raises :class:`EnumerationCapError` past ``cap`` elements.
    """
    ident = tuple(range(g.degree))
    gens = [x.images for x in g.generators]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = tuple(s[i] for i in x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise EnumerationCapError(cap, len(seen))
        frontier = nxt
    return [Permutation(t) for t in sorted(seen)]


def order_distribution_bruteforce(g: PermGroup, cap: int = DEFAULT_ENUM_CAP) -> OrderDistribution:
    counts = Counter(_raw_order(x.images) for x in g.elements(cap))
    return OrderDistribution.from_counts(counts)


def center(g: PermGroup, cap: int = DEFAULT_ENUM_CAP) -> list[Permutation]:
    """Elements commuting with every generator."""
    gens = g.generators
    return [x for x in g.elements(cap) if all(x * s == s * x for s in gens)]


def nilpotency_check(g: PermGroup, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """True iff ``g`` is the direct product of its Sylow subgroups.

    For each prime p, the p-elements form a subgroup exactly when there are
    |G|_p of them (that set then is the unique Sylow p-subgroup), so a single
    pass counting p-elements decides closure.
    """
    orders = [_raw_order(x.images) for x in g.elements(cap)]
    n = len(orders)
    for p in prime_factors(n):
        part = 1
        while n % (part * p) == 0:
            part *= p
        p_elements = sum(1 for o in orders if part % o == 0)
        if p_elements != part:
            return False
    return True


def p_elements_closed(g: PermGroup, p: int, cap: int = DEFAULT_ENUM_CAP) -> bool:
    """Literal closure test of the p-power-order elements (quadratic)."""
    elems = [x for x in g.elements(cap) if _is_power_of(_raw_order(x.images), p)]
    pool = set(elems)
    return all(a * b in pool for a in elems for b in elems)


def _is_power_of(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


class _Table:
    """Indexed multiplication table for lattice work on small groups."""

    def __init__(self, elements: list[Permutation]):
        self.elements = elements
        index = {x.images: i for i, x in enumerate(elements)}
        self.mul = [[index[tuple(b.images[i] for i in a.images)] for b in elements] for a in elements]
        self.identity = index[tuple(range(elements[0].degree))]

    def closure(self, gens: Iterable[int]) -> int:
        gens = list(gens)
        mask = 1 << self.identity
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                row = self.mul[x]
                for s in gens:
                    y = row[s]
                    if not mask >> y & 1:
                        mask |= 1 << y
                        nxt.append(y)
            frontier = nxt
        return mask


def _members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def subgroup_lattice(g: PermGroup, order_cap: int = DEFAULT_LATTICE_CAP) -> list[frozenset[Permutation]]:
    """Every subgroup of ``g`` as an element set.

    Starts from the cyclic subgroups and joins until nothing new appears.
    Every subgroup is a join of cyclic ones, so joining each subgroup found
    with each cyclic subgroup reaches the same fixpoint as all pairwise
    joins.  Output is sorted by order, then by member indices.
    """
    elems = g.elements()
    if len(elems) > order_cap:
        raise EnumerationCapError(order_cap, len(elems))
    table = _Table(elems)
    cyclic: dict[int, int] = {}
    for i in range(len(elems)):
        cyclic.setdefault(table.closure([i]), i)
    gens_of = {mask: [i] for mask, i in cyclic.items()}
    found = set(gens_of)
    queue = list(gens_of)
    while queue:
        s = queue.pop()
        for c_mask, c_gen in cyclic.items():
            if c_mask & ~s == 0:
                continue
            joined = table.closure(gens_of[s] + [c_gen])
            if joined not in found:
                found.add(joined)
                gens_of[joined] = gens_of[s] + [c_gen]
                queue.append(joined)
    ordered = sorted(found, key=lambda m: (bin(m).count("1"), _members(m)))
    return [frozenset(elems[i] for i in _members(m)) for m in ordered]


def generated_subgroup(g: PermGroup, gens: Sequence[Permutation], cap: int = DEFAULT_ENUM_CAP) -> PermGroup:
    """Subgroup of ``g`` generated by ``gens``; each must lie in ``g``."""
    for s in gens:
        if not g.contains(s, cap):
            raise ValueError(f"{s} is not an element of {g!r}")
    return PermGroup(gens, g.degree)


# -- generator files ---------------------------------------------------------


def parse_generators(text: str, name: str | None = None) -> PermGroup:
    """One permutation per line in cycle notation; ``#`` starts a comment line.

    The degree is the largest point that appears.
    """
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append(parse_cycles(line))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    degree = max((x for cs in rows for c in cs for x in c), default=1)
    gens = [Permutation.from_cycles("".join("(" + " ".join(map(str, c)) + ")" for c in cs), degree) for cs in rows]
    return PermGroup(gens, degree, name=name)


def load_generators(path: str | Path) -> PermGroup:
    path = Path(path)
    return parse_generators(path.read_text(encoding="utf-8"), name=str(path))


def format_generators(g: PermGroup) -> str:
    return "".join(f"{s}\n" for s in g.generators)


# -- standard realizations ----------------------------------------------------


def cyclic_product(orders: Sequence[int]) -> PermGroup:
    """C(n1) x C(n2) x ... as disjoint cycles on consecutive points."""
    gens = []
    start = 1
    for n in orders:
        if n > 1:
            gens.append("(" + " ".join(str(start + i) for i in range(n)) + ")")
        start += n
    degree = max(start - 1, 1)
    return PermGroup([Permutation.from_cycles(c, degree) for c in gens], degree)


def dihedral(n: int) -> PermGroup:
    """Symmetries of a regular n-gon (order 2n) on points 1..n."""
    rot = "(" + " ".join(str(i) for i in range(1, n + 1)) + ")"
    refl = "".join(f"({i} {n + 2 - i})" for i in range(2, n + 1) if i < n + 2 - i)
    return PermGroup([Permutation.from_cycles(rot, n), Permutation.from_cycles(refl, n)], n, name=f"D_{2 * n}")


def symmetric(n: int) -> PermGroup:
    gens = [Permutation.from_cycles("(" + " ".join(map(str, range(1, n + 1))) + ")", n)]
    if n > 2:
        gens.append(Permutation.from_cycles("(1 2)", n))
    return PermGroup(gens, n, name=f"S{n}")


_QUAT = {  # unit quaternions as (sign, axis), axis in '1ijk'
    ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
    ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
    ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
    ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
}


def quaternion() -> PermGroup:
    """Q8 in its regular representation on 8 points."""
    elems = [(s, a) for a in "1ijk" for s in (1, -1)]
    index = {e: i for i, e in enumerate(elems)}

    def left(g):
        out = []
        for s, a in elems:
            t, b = _QUAT[(g[1], a)]
            out.append(index[(g[0] * s * t, b)])
        return Permutation(tuple(out))

    return PermGroup([left((1, "i")), left((1, "j"))], 8, name="Q8")


def abelian_tuple_distribution(orders: Sequence[int]) -> OrderDistribution:
    """Order histogram of Z/n1 x Z/n2 x ... by walking every tuple.

    The order of (x1, x2, ...) is the lcm of n_i / gcd(x_i, n_i).
    """
    per_factor = [[n // math.gcd(x, n) for x in range(n)] for n in orders]
    counts: Counter = Counter()
    for combo in itertools.product(*per_factor):
        counts[math.lcm(*combo) if combo else 1] += 1
    return OrderDistribution.from_counts(counts)
