"""Command-line interface: ``avgord {o,approx,verify,oracle-check,seq}``.

Exit codes: 0 success, 2 parse/usage, 3 budget exhausted, 4 base pair
insufficient, 5 resource cap, 6 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gmpy2 import mpq

from . import __version__
from .arith import ResourceError, format_rat, is_prime, num_digits, parse_rat, prime_index, to_double
from .basepairs import base_pair, base_pair_from_files
from .certify import CertificateParseError, parse, serialize, verify
from .density import (
    DEFAULT_M,
    DEFAULT_MAX_TERMS,
    BaseInsufficientError,
    BudgetError,
    construct_ge1,
    construct_le1_abelian,
    construct_sub_unit_nilpotent,
    kmz_bound_plan,
    kmz_plan_at,
    seq_diagnostics,
)
from .groups import GroupSyntaxError, avg_order_parts, group_order, parse_group
from .oracle_check import ORACLE_MAX_ORDER_LIMIT, run_oracle_check

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_BASE, EXIT_RESOURCE, EXIT_VERIFY = 0, 2, 3, 4, 5, 6
DEFAULT_EPS = "1e-6"
DEFAULT_OUT = "approx.ogcert.json"
# exact values longer than this are abbreviated on screen
SHOW_DIGITS = 120


class UsageError(Exception):
    pass


def decimal(q) -> str:
    try:
        return f"{to_double(q):.15g}"
    except OverflowError:
        return "overflow"


def show_rat(q) -> str:
    q = mpq(q)
    if num_digits(q) <= SHOW_DIGITS:
        return format_rat(q)
    return f"<exact value with {num_digits(q)} digits; see certificate>"


def show_expr(expr, limit: int = 200) -> str:
    text = str(expr) or "1 (trivial)"
    if len(text) <= limit:
        return text
    return f"{text[:limit]} ... ({text.count(' x ') + 1} factors)"


def rat_arg(text: str, name: str):
    try:
        return parse_rat(text)
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


# -- subcommands ----------------------------------------------------------------


def cmd_o(args) -> int:
    try:
        expr = parse_group(args.expr)
    except GroupSyntaxError as exc:
        raise UsageError(str(exc)) from None
    num, den = avg_order_parts(expr, args.cap)
    o = mpq(num, den)
    order = group_order(expr, args.cap)
    psi_value = o * order
    payload = {
        "group": str(expr),
        "psi": str(psi_value.numerator),
        "order": str(order),
        "o": format_rat(o),
        "o_decimal": decimal(o),
    }
    emit(args, payload, [
        f"G   = {show_expr(expr)}",
        f"psi = {psi_value.numerator}",
        f"|G| = {order}",
        f"o   = {format_rat(o)} ({decimal(o)})",
    ])
    return EXIT_OK


def _excluded_indices(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    out = []
    for tok in text.replace(",", " ").split():
        p = int(tok)
        if not is_prime(p):
            raise UsageError(f"--exclude: {p} is not prime")
        out.append(prime_index(p))
    return tuple(sorted(set(out)))


def _plan_payload(plan) -> dict:
    return {"n": plan.n, "p": plan.p, "s": plan.s, "bound": format_rat(plan.bound),
            "bound_decimal": decimal(plan.bound), "narrative": plan.narrative}


def _plan_lines(plan) -> list[str]:
    return [
        f"plan: n = {plan.n}, p = {plan.p}, s = {plan.s}",
        f"bound = {format_rat(plan.bound)} ({decimal(plan.bound)})",
        plan.narrative,
    ]


def cmd_approx(args) -> int:
    target = rat_arg(args.target, "target")
    eps = rat_arg(args.eps, "eps")
    if target < 0:
        raise UsageError("--target must be >= 0")
    if args.plan:
        if target == 0:
            plan = kmz_plan_at(4)
        elif target < 1:
            plan = kmz_bound_plan(target)
        else:
            raise UsageError("--plan applies to targets in [0, 1)")
        emit(args, {"plan": _plan_payload(plan), "target": format_rat(target)}, _plan_lines(plan))
        return EXIT_OK
    if target == 0:
        raise UsageError("target 0 is a limit point, not attained; use --plan")
    if eps <= 0:
        raise UsageError("--eps must be > 0")

    try:
        if target >= 1:
            cert = construct_ge1(target, eps, args.m, _excluded_indices(args.exclude), args.max_terms)
        elif args.nilpotent or args.base or args.base_g:
            if target == 1:
                raise UsageError("--nilpotent needs a target below 1")
            if args.base_g or args.base_h:
                if not (args.base_g and args.base_h):
                    raise UsageError("--base-g and --base-h go together")
                base = base_pair_from_files(args.base_g, args.base_h)
            elif args.base:
                try:
                    base = base_pair(args.base)
                except KeyError as exc:
                    raise UsageError(exc.args[0]) from None
            else:
                base = None
            cert = construct_sub_unit_nilpotent(target, eps, base, args.m, args.max_terms)
        else:
            cert = construct_le1_abelian(target, eps, args.m, args.max_terms)
    except BudgetError as exc:
        emit(args, {"error": "budget", "message": str(exc), "scanned": exc.scanned,
                    "achieved_decimal": f"{exc.achieved_approx:.15g}"}, [f"error: {exc}"])
        return EXIT_BUDGET
    except BaseInsufficientError as exc:
        payload = {"error": "base-insufficient", "message": str(exc)}
        lines = [f"error: {exc}"]
        if exc.plan is not None:
            payload["plan"] = _plan_payload(exc.plan)
            lines += _plan_lines(exc.plan)
        emit(args, payload, lines)
        return EXIT_BASE

    out = Path(args.out)
    out.write_bytes(serialize(cert))
    ratio_name = "o(H)/o(G)" if cert.mode == "le1_abelian" else "o(G)/o(H)"
    payload = {
        "mode": cert.mode,
        "target": format_rat(cert.target),
        "eps": format_rat(cert.eps),
        "terms": len(cert.trace.indices),
        "base": cert.trace.base,
        "claimed_ratio_decimal": decimal(cert.claimed_ratio),
        "certificate": str(out),
    }
    if num_digits(cert.claimed_ratio) <= SHOW_DIGITS:
        payload["claimed_ratio"] = format_rat(cert.claimed_ratio)
    emit(args, payload, [
        f"mode    = {cert.mode}",
        f"target  = {format_rat(cert.target)} ({decimal(cert.target)})",
        f"eps     = {format_rat(cert.eps)}",
        f"G       = {show_expr(cert.g)}",
        f"H       = {show_expr(cert.h)}",
        f"terms   = {len(cert.trace.indices)}",
        f"{ratio_name} = {show_rat(cert.claimed_ratio)} ({decimal(cert.claimed_ratio)})",
        f"written {out}",
    ])
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        data = Path(args.path).read_bytes()
    except OSError as exc:
        print(f"error: cannot read {args.path}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cert = parse(data)
    except CertificateParseError as exc:
        print(f"error: malformed certificate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    verdict = verify(cert, args.cap)
    ratio = verdict.recomputed_ratio
    payload = {
        "ok": verdict.ok,
        "status": verdict.status,
        "recomputed_ratio_decimal": decimal(ratio) if ratio is not None else None,
        "checks": [{"name": c.name, "status": c.status, "message": c.message} for c in verdict.checks],
    }
    lines = [f"{c.status:<12} {c.name}" + (f": {c.message}" if c.message else "") for c in verdict.checks]
    if ratio is not None:
        lines.append(f"recomputed ratio = {show_rat(ratio)} ({decimal(ratio)})")
    lines.append(f"verdict: {verdict.status}")
    emit(args, payload, lines)
    if verdict.ok:
        return EXIT_OK
    return EXIT_RESOURCE if verdict.status == "unverifiable" else EXIT_VERIFY


def cmd_oracle_check(args) -> int:
    report = run_oracle_check(args.max_order)
    payload = {"max_order": args.max_order, "ok": report.ok,
               "suites": [{"name": s.name, "checked": s.checked, "mismatches": s.mismatches} for s in report.suites]}
    lines = [f"{s.name:<28} checked {s.checked:>6}  mismatches {len(s.mismatches)}" for s in report.suites]
    for s in report.suites:
        lines += [f"  mismatch: {m}" for m in s.mismatches]
    lines.append("all suites agree" if report.ok else "MISMATCHES FOUND")
    emit(args, payload, lines)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_seq(args) -> int:
    rows = seq_diagnostics(args.m, args.n)
    payload = {"m": args.m, "rows": [
        {"n": r.n, "p": r.p, "r": format_rat(r.r), "x": r.x, "px": r.px, "partial_sum": r.partial} for r in rows
    ]}
    lines = [f"{'n':>7} {'p':>9} {'r_n':>24} {'x_n = ln r_n':>14} {'p_n x_n':>10} {'sum x':>10}"]
    lines += [f"{r.n:>7} {r.p:>9} {format_rat(r.r):>24} {r.x:>14.6e} {r.px:>10.6f} {r.partial:>10.6f}" for r in rows]
    emit(args, payload, lines)
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="avgord", description="Exact average element orders and certified ratio constructions.")
    ap.add_argument("--version", action="version", version=f"avgord {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = common(sub.add_parser("o", help="psi, |G| and o(G) of a group descriptor"))
    p.add_argument("expr", help='e.g. "C(2)^3 x C(9) x D4"; "" is the trivial group')
    p.add_argument("--cap", type=int, default=10**6, help="enumeration cap for perm: groups")
    p.set_defaults(func=cmd_o)

    p = common(sub.add_parser("approx", help="construct and write a certificate for a target ratio"))
    p.add_argument("--target", required=True, help="exact rational or decimal literal, e.g. 3.5 or 19/22")
    p.add_argument("--eps", default=DEFAULT_EPS, help=f"relative tolerance (default {DEFAULT_EPS})")
    p.add_argument("--m", type=int, default=DEFAULT_M, help="power m in C(p)^m (default 2)")
    p.add_argument("--exclude", help="primes to keep out of the abelian tail, e.g. 2,3")
    p.add_argument("--nilpotent", action="store_true", help="for targets below 1, compose with a nonabelian base pair")
    p.add_argument("--base", help="built-in base pair key (D4C4, DihTwo(3) ... DihTwo(8))")
    p.add_argument("--base-g", help="generator file of a user base group G0")
    p.add_argument("--base-h", help="generator file of its subgroup H0")
    p.add_argument("--plan", action="store_true", help="print the approach-to-zero plan instead")
    p.add_argument("--max-terms", type=int, default=DEFAULT_MAX_TERMS)
    p.add_argument("--out", "-o", default=DEFAULT_OUT, help=f"certificate path (default {DEFAULT_OUT})")
    p.set_defaults(func=cmd_approx)

    p = common(sub.add_parser("verify", help="re-check a certificate from first principles"))
    p.add_argument("path")
    p.add_argument("--cap", type=int, default=10**6, help="enumeration cap for oracle checks")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("oracle-check", help="closed forms against brute force"))
    p.add_argument("--max-order", type=int, default=512, help=f"largest group order (at most {ORACLE_MAX_ORDER_LIMIT})")
    p.set_defaults(func=cmd_oracle_check)

    p = common(sub.add_parser("seq", help="diagnostic table of the ratio terms r_n"))
    p.add_argument("--m", type=int, default=DEFAULT_M)
    p.add_argument("--n", type=int, default=20, help="number of rows")
    p.set_defaults(func=cmd_seq)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
