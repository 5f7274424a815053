"""Closed forms checked against exhaustive enumeration."""
from __future__ import annotations

from dataclasses import dataclass, field

from .arith import ResourceError, prime_power
from .groups import (
    abelian_groups_of_order,
    abelian_order_distribution,
    cyclic_psi_closed,
    registry_entry,
    registry_keys,
)
from .distribution import psi
from .perm import abelian_tuple_distribution, cyclic_product, order_distribution_bruteforce

ORACLE_MAX_ORDER_LIMIT = 4096


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    mismatches: list[str] = field(default_factory=list)


@dataclass
class OracleReport:
    max_order: int
    suites: list[SuiteResult]

    @property
    def ok(self) -> bool:
        return all(not s.mismatches for s in self.suites)


def _abelian_suites(max_order: int) -> tuple[SuiteResult, SuiteResult]:
    tuples = SuiteResult("abelian vs tuple walk")
    perms = SuiteResult("abelian vs permutations")
    for n in range(1, max_order + 1):
        for g in abelian_groups_of_order(n):
            closed = abelian_order_distribution(g)
            tuples.checked += 1
            if abelian_tuple_distribution(g.factors) != closed:
                tuples.mismatches.append(str(g))
            perms.checked += 1
            if order_distribution_bruteforce(cyclic_product(g.factors)) != closed:
                perms.mismatches.append(str(g))
    return tuples, perms


def _cyclic_suite(max_order: int) -> SuiteResult:
    out = SuiteResult("cyclic psi closed form")
    for q in range(2, max_order + 1):
        pk = prime_power(q)
        if pk is None:
            continue
        p, k = pk
        out.checked += 1
        brute = psi(order_distribution_bruteforce(cyclic_product([q])))
        if cyclic_psi_closed(p, k) != brute:
            out.mismatches.append(f"C({q}): closed {cyclic_psi_closed(p, k)} vs {brute}")
    return out


def _registry_suite(max_order: int) -> SuiteResult:
    out = SuiteResult("registry vs realizations")
    for key in registry_keys():
        entry = registry_entry(key)
        if entry.distribution.total > max_order:
            continue
        out.checked += 1
        if order_distribution_bruteforce(entry.realize()) != entry.distribution:
            out.mismatches.append(key)
    return out


def run_oracle_check(max_order: int) -> OracleReport:
    if max_order > ORACLE_MAX_ORDER_LIMIT:
        raise ResourceError(f"--max-order {max_order} exceeds the brute-force limit {ORACLE_MAX_ORDER_LIMIT}")
    if max_order < 1:
        raise ValueError("--max-order must be >= 1")
    suites = list(_abelian_suites(max_order))
    suites += [_cyclic_suite(max_order), _registry_suite(max_order)]
    return OracleReport(max_order, suites)
