"""Certificates: data model, canonical JSON, and an independent verifier.

The verifier recomputes o(G) and o(H) from the group descriptors alone; the
trace is only cross-checked for consistency, never used to get the ratio.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from gmpy2 import mpq

from .arith import BigRat, ResourceError, format_rat, nth_prime, parse_rat, prime_index
from .basepairs import base_pair, subgroup_witness
from .groups import (
    Abelian,
    GroupExpr,
    GroupSyntaxError,
    Named,
    Product,
    avg_order_parts,
    factors_of,
    is_abelian,
    order_distribution,
    parse_group,
    realization,
    registry_entry,
)
from .perm import DEFAULT_ENUM_CAP, generated_subgroup, nilpotency_check, order_distribution_bruteforce

CERT_VERSION = "avgord-cert/1"
CERT_SUFFIX = ".ogcert.json"
MODES = ("ge1", "le1_abelian", "sub_unit_nilpotent")


class CertificateParseError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class Trace:
    m: int
    excluded: tuple[int, ...]
    indices: tuple[int, ...]
    base: str | None = None


@dataclass(frozen=True)
class Certificate:
    """A witness that o(G)/o(H) (or its inverse in ``le1_abelian`` mode)
    approximates ``target``.

    Tolerance: ``ge1`` and ``sub_unit_nilpotent`` promise
    ``claimed <= target <= claimed * (1 + eps)``; ``le1_abelian`` promises
    ``target <= claimed <= target * (1 + eps)`` for claimed = o(H)/o(G).
    The i-th direct factor of ``h`` is a subgroup of the i-th factor of ``g``.
    """

    mode: str
    target: BigRat
    eps: BigRat
    g: GroupExpr
    h: GroupExpr
    claimed_ratio: BigRat
    trace: Trace
    version: str = CERT_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "mode": self.mode,
            "target": format_rat(self.target),
            "eps": format_rat(self.eps),
            "g": str(self.g),
            "h": str(self.h),
            "claimed_ratio": format_rat(self.claimed_ratio),
            "trace": {
                "m": self.trace.m,
                "excluded_indices": list(self.trace.excluded),
                "prime_indices": list(self.trace.indices),
                "base": self.trace.base,
            },
        }


def serialize(cert: Certificate) -> bytes:
    """Canonical UTF-8 JSON: sorted keys, fixed indentation, trailing newline."""
    text = json.dumps(cert.to_dict(), sort_keys=True, indent=1, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _field(doc: dict, name: str, kind):
    if name not in doc:
        raise CertificateParseError(name, "missing")
    value = doc[name]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise CertificateParseError(name, f"expected {getattr(kind, '__name__', kind)}")
    return value


def _rat_field(doc: dict, name: str) -> BigRat:
    try:
        return parse_rat(_field(doc, name, str))
    except ValueError as exc:
        if isinstance(exc, CertificateParseError):
            raise
        raise CertificateParseError(name, str(exc)) from None


def _group_field(doc: dict, name: str) -> GroupExpr:
    try:
        return parse_group(_field(doc, name, str))
    except GroupSyntaxError as exc:
        raise CertificateParseError(name, str(exc)) from None


def _int_list(doc: dict, name: str) -> tuple[int, ...]:
    values = _field(doc, name, list)
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in values):
        raise CertificateParseError(f"trace.{name}", "expected a list of integers")
    return tuple(values)


def parse(data: bytes | str) -> Certificate:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CertificateParseError("document", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise CertificateParseError("document", "expected a JSON object")
    trace = _field(doc, "trace", dict)
    m = _field(trace, "m", int)
    base = trace.get("base")
    if base is not None and not isinstance(base, str):
        raise CertificateParseError("trace.base", "expected a string or null")
    return Certificate(
        mode=_field(doc, "mode", str),
        target=_rat_field(doc, "target"),
        eps=_rat_field(doc, "eps"),
        g=_group_field(doc, "g"),
        h=_group_field(doc, "h"),
        claimed_ratio=_rat_field(doc, "claimed_ratio"),
        trace=Trace(m, _int_list(trace, "excluded_indices"), _int_list(trace, "prime_indices"), base),
        version=_field(doc, "version", str),
    )


# -- verification -------------------------------------------------------------

PASS, FAIL, UNVERIFIABLE = "pass", "fail", "unverifiable"


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS


@dataclass(frozen=True)
class Verdict:
    ok: bool
    status: str
    recomputed_ratio: BigRat | None
    checks: tuple[Check, ...] = field(default=())

    def failed(self) -> list[Check]:
        return [c for c in self.checks if c.status != PASS]


def _abelian_le(h: Abelian, g: Abelian) -> bool:
    """H embeds in G iff, prime by prime, H's sorted exponents are dominated by G's."""
    gl = g._local
    for p, hes in h._local.items():
        ges = gl.get(p, [])
        if len(hes) > len(ges) or any(a > b for a, b in zip(hes, ges)):
            return False
    return True


_NAMED_ABELIAN = {"C4": Abelian((4,))}


def _as_abelian(expr: GroupExpr) -> Abelian | None:
    if isinstance(expr, Abelian):
        return expr
    if isinstance(expr, Named):
        return _NAMED_ABELIAN.get(expr.key)
    return None


def _same(a: GroupExpr, b: GroupExpr) -> bool:
    return a == b or _as_abelian(a) is not None and _as_abelian(a) == _as_abelian(b)


def _factor_inclusion(h: GroupExpr, g: GroupExpr, cap: int) -> tuple[str, str]:
    if h == g:
        return PASS, ""
    ha, ga = _as_abelian(h), _as_abelian(g)
    if ha is not None and ga is not None:
        return (PASS, "") if _abelian_le(ha, ga) else (FAIL, f"{h} does not embed in {g}")
    witness = subgroup_witness(h, g)
    if witness is None:
        return FAIL, f"no subgroup witness for {h} in {g}"
    try:
        big = realization(g)
        sub = generated_subgroup(big, witness, cap)
        if order_distribution_bruteforce(sub, cap) != order_distribution(h, cap):
            return FAIL, f"witness for {h} in {g} generates a different group"
    except ResourceError as exc:
        return UNVERIFIABLE, str(exc)
    except ValueError as exc:
        return FAIL, str(exc)
    return PASS, ""


def _check_subgroup(cert: Certificate, cap: int) -> Check:
    hf, gf = factors_of(cert.h), factors_of(cert.g)
    if len(hf) != len(gf):
        return Check("subgroup_witness", FAIL, f"h has {len(hf)} factors, g has {len(gf)}")
    worst = PASS
    message = ""
    for i, (h, g) in enumerate(zip(hf, gf)):
        status, msg = _factor_inclusion(h, g, cap)
        if status == FAIL:
            return Check("subgroup_witness", FAIL, f"factor {i}: {msg}")
        if status == UNVERIFIABLE:
            worst, message = UNVERIFIABLE, f"factor {i}: {msg}"
    return Check("subgroup_witness", worst, message)


def _check_nilpotent(g: GroupExpr, cap: int) -> Check:
    worst, message = PASS, ""
    for f in factors_of(g):
        if isinstance(f, Abelian):
            continue
        if isinstance(f, Named) and not registry_entry(f.key).nilpotent:
            return Check("nilpotent", FAIL, f"{f} is not registered as nilpotent")
        try:
            if not nilpotency_check(realization(f), cap):
                return Check("nilpotent", FAIL, f"{f} is not nilpotent")
        except ResourceError as exc:
            worst, message = UNVERIFIABLE, f"{f}: {exc}"
    return Check("nilpotent", worst, message)


def _check_coprime(cert: Certificate) -> Check:
    for name, expr in (("g", cert.g), ("h", cert.h)):
        if isinstance(expr, Product) and not expr.coprime:
            return Check("coprime_parts", FAIL, f"factors of {name} are not pairwise coprime")
    return Check("coprime_parts", PASS)


def _check_trace(cert: Certificate) -> Check:
    t = cert.trace
    if t.m < 2:
        return Check("trace", FAIL, "m must be >= 2")
    if any(b <= a for a, b in zip(t.indices, t.indices[1:])) or any(n < 1 for n in t.indices):
        return Check("trace", FAIL, "prime indices must be positive and strictly increasing")
    if set(t.indices) & set(t.excluded):
        return Check("trace", FAIL, "an excluded index was used")
    gf, hf = factors_of(cert.g), factors_of(cert.h)
    head = 0
    if cert.mode == "sub_unit_nilpotent":
        if t.base is None:
            return Check("trace", FAIL, "sub-unit certificate without a base pair")
        try:
            bp = base_pair(t.base)
        except (KeyError, ValueError, OSError) as exc:
            return Check("trace", FAIL, f"base pair: {exc}")
        if not gf or not hf or not _same(gf[0], bp.g0) or not _same(hf[0], bp.h0):
            return Check("trace", FAIL, f"leading factors do not match base pair {t.base}")
        needed = {prime_index(p) for p in bp.primes}
        if not needed <= set(t.excluded):
            return Check("trace", FAIL, "base primes are not excluded from the tail")
        head = 1
    elif t.base is not None:
        return Check("trace", FAIL, f"mode {cert.mode} takes no base pair")
    if len(gf) - head != len(t.indices) or len(hf) - head != len(t.indices):
        return Check("trace", FAIL, "number of tail factors does not match the prime indices")
    for n, gg, hh in zip(t.indices, gf[head:], hf[head:]):
        p = nth_prime(n)
        if gg != Abelian.prime_power_factors(p, t.m) or hh != Abelian.prime_power_factors(p, 1):
            return Check("trace", FAIL, f"index {n}: expected C({p})^{t.m} over C({p})")
    return Check("trace", PASS)


def verify(cert: Certificate, cap: int = DEFAULT_ENUM_CAP) -> Verdict:
    """Recompute every claim in ``cert`` from first principles."""
    checks: list[Check] = []
    checks.append(Check("version", PASS if cert.version == CERT_VERSION else FAIL,
                        "" if cert.version == CERT_VERSION else f"unsupported version {cert.version!r}"))
    if cert.mode not in MODES:
        checks.append(Check("mode", FAIL, f"unknown mode {cert.mode!r}"))
        return _verdict(checks, None)
    checks.append(Check("mode", PASS))

    recomputed = None
    try:
        gn, gd = avg_order_parts(cert.g, cap)
        hn, hd = avg_order_parts(cert.h, cap)
    except ResourceError as exc:
        checks.append(Check("recompute", UNVERIFIABLE, str(exc)))
    except (GroupSyntaxError, OSError, ValueError) as exc:
        checks.append(Check("recompute", FAIL, str(exc)))
    else:
        checks.append(Check("recompute", PASS))
        # ratio = rn / rd, unreduced
        if cert.mode == "le1_abelian":
            rn, rd = hn * gd, hd * gn
        else:
            rn, rd = gn * hd, gd * hn
        claimed = mpq(cert.claimed_ratio)
        if rn * claimed.denominator == rd * claimed.numerator:
            recomputed = claimed
            checks.append(Check("exact_ratio", PASS))
        else:
            recomputed = mpq(rn, rd)
            checks.append(Check("exact_ratio", FAIL, f"recomputed ratio differs from claimed {format_rat(claimed)}"))
        checks.append(_check_tolerance(cert, recomputed))

    checks.append(_check_subgroup(cert, cap))
    if cert.mode == "sub_unit_nilpotent":
        checks.append(_check_nilpotent(cert.g, cap))
        checks.append(_check_coprime(cert))
    else:
        checks.append(Check("abelian", PASS if is_abelian(cert.g) else FAIL,
                            "" if is_abelian(cert.g) else "mode requires abelian G"))
    checks.append(_check_trace(cert))
    return _verdict(checks, recomputed)


def _check_tolerance(cert: Certificate, ratio: BigRat) -> Check:
    t, eps = mpq(cert.target), mpq(cert.eps)
    if eps <= 0:
        return Check("tolerance", FAIL, "eps must be > 0")
    if cert.mode == "le1_abelian":
        ok = t <= ratio <= t * (1 + eps)
        rule = "target <= ratio <= target*(1+eps)"
    else:
        ok = ratio <= t <= ratio * (1 + eps)
        rule = "ratio <= target <= ratio*(1+eps)"
    return Check("tolerance", PASS if ok else FAIL, "" if ok else f"violates {rule}")


def _verdict(checks: list[Check], recomputed) -> Verdict:
    statuses = {c.status for c in checks}
    status = FAIL if FAIL in statuses else UNVERIFIABLE if UNVERIFIABLE in statuses else PASS
    return Verdict(status == PASS, {PASS: "ok"}.get(status, status), recomputed, tuple(checks))
