"""Concrete nilpotent pairs (G0, H0 <= G0) with o(G0)/o(H0) < 1."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .arith import BigRat
from .groups import Abelian, GroupExpr, Named, Perm, avg_order, order_distribution, primes_of, realization
from .perm import generated_subgroup, load_generators, nilpotency_check, order_distribution_bruteforce


@dataclass(frozen=True)
class BasePair:
    """A nilpotent G0 with a subgroup H0 and o(G0)/o(H0) < 1.

    ``witness`` holds generators of a copy of H0 inside the permutation
    realization of G0.
    """

    key: str
    g0: GroupExpr
    h0: GroupExpr
    witness: tuple = field(compare=False, default=())

    @functools.cached_property
    def rho0(self) -> BigRat:
        return avg_order(self.g0) / avg_order(self.h0)

    @property
    def primes(self) -> frozenset[int]:
        return primes_of(self.g0) | primes_of(self.h0)

    def validate(self) -> None:
        """Oracle checks: G0 nilpotent, the witness generates a copy of H0, 0 < rho0 < 1."""
        g = realization(self.g0)
        if not nilpotency_check(g):
            raise ValueError(f"base pair {self.key}: G0 is not nilpotent")
        sub = generated_subgroup(g, self.witness)
        if order_distribution_bruteforce(sub) != order_distribution(self.h0):
            raise ValueError(f"base pair {self.key}: witness does not generate a copy of H0")
        if not 0 < self.rho0 < 1:
            raise ValueError(f"base pair {self.key}: ratio {self.rho0} is not in (0, 1)")


def _dihedral_pair(k: int) -> BasePair:
    g0 = Named("D4") if k == 2 else Named(f"DihTwo({k})")
    rot = realization(g0).generators[0]
    return BasePair("D4C4" if k == 2 else f"DihTwo({k})", g0, Abelian((2**k,)), (rot,))


BUILTIN_DIHEDRAL_RANGE = range(2, 9)


@functools.lru_cache(maxsize=None)
def builtin_base_pairs() -> tuple[BasePair, ...]:
    """(D4, C(4)) and (DihTwo(k), C(2^k)) for k = 3..8.

    Their ratios 1/2 + 3*2^k / (2^(2k+1) + 1) decrease towards 1/2, so they
    only cover targets above 1/2.
    """
    return tuple(_dihedral_pair(k) for k in BUILTIN_DIHEDRAL_RANGE)


def base_pair(key: str) -> BasePair:
    for bp in builtin_base_pairs():
        if bp.key == key:
            return bp
    if key.startswith("perm:") and "|perm:" in key:
        g_path, h_path = key[5:].split("|perm:", 1)
        return base_pair_from_files(g_path, h_path)
    known = ", ".join(b.key for b in builtin_base_pairs())
    raise KeyError(f"unknown base pair {key!r}; built-ins: {known}")


def base_pair_from_files(g_path: str, h_path: str) -> BasePair:
    """User-supplied pair from two generator files; H0's generators must lie in G0."""
    h_group = load_generators(h_path)
    bp = BasePair(f"perm:{g_path}|perm:{h_path}", Perm(g_path), Perm(h_path), h_group.generators)
    bp.validate()
    return bp


def subgroup_witness(h: GroupExpr, g: GroupExpr) -> tuple | None:
    """Generators of a copy of ``h`` inside ``realization(g)``, when one is registered."""
    for bp in builtin_base_pairs():
        if bp.g0 == g and bp.h0 == h:
            return bp.witness
    if isinstance(g, Named) and g.key == "D4" and h == Named("C4"):
        return builtin_base_pairs()[0].witness
    if isinstance(g, Named) and g.key == "Q8" and h in (Abelian((4,)), Named("C4")):
        return realization(g).generators[:1]
    if isinstance(g, Perm) and isinstance(h, Perm):
        return load_generators(h.path).generators
    return None
