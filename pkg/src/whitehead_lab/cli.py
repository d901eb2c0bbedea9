"""Command-line interface: ``whitehead-lab <family> <command> [options]``.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input or config,
3 precision exhausted.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import additive as add
from . import jsonio
from . import multiplicative as mul
from .errors import InputError, NotAUnit, PrecisionExhausted, WhiteheadLabError
from .groups import DEFAULT_SUITE, FiniteGroup, named_group
from .grouprings import conj_basis, group_basis
from .harness import SuiteConfig, run_suite
from .padic import PrecisionContext

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECISION = 0, 1, 2, 3


def _common(parser: argparse.ArgumentParser, group_required: bool = True) -> None:
    parser.add_argument("--group", required=group_required, help="catalog:NAME[:k=v,...] or a JSON spec file")
    parser.add_argument("--p", type=int, default=None, help="prime (inferred from the group when possible)")
    parser.add_argument("--precision", type=int, default=None, help="working precision N_work")
    parser.add_argument("--check-precision", type=int, default=16, help="comparison precision N_check")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--samples", type=int, default=None)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--out", default=None, help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="whitehead-lab", description=__doc__.splitlines()[0])
    fam = ap.add_subparsers(dest="family", required=True)

    g = fam.add_parser("group", help="inspect groups").add_subparsers(dest="command", required=True)
    _common(g.add_parser("info", help="classes, subgroups and invariants"))
    _common(g.add_parser("list", help="catalogue families and short names"), group_required=False)

    a = fam.add_parser("additive", help="class vectors and tuples").add_subparsers(dest="command", required=True)
    for name, hlp in (
        ("beta", "tuple of a class vector"),
        ("tau", "round trip through the left inverse"),
        ("check", "A1-A3 on a tuple"),
        ("basis", "Howell basis of the tuple module"),
    ):
        sp = a.add_parser(name, help=hlp)
        _common(sp)
        sp.add_argument("--shape", choices=add.SHAPES, default="cyclic")
        sp.add_argument("--vector", default=None, help="comma-separated class-vector coefficients")
        sp.add_argument("--tuple", default=None, help="tuple JSON file (tau, check)")

    k = fam.add_parser("k1", help="units and their norms").add_subparsers(dest="command", required=True)
    for name, hlp in (
        ("theta", "norm tuple of a unit"),
        ("L", "integral logarithm of a unit"),
        ("check", "M1-M4 on a unit tuple"),
        ("identity", "key identity and norm/log compatibility per subgroup"),
    ):
        sp = k.add_parser(name, help=hlp)
        _common(sp)
        sp.add_argument("--unit", default=None, help="comma-separated group-ring coefficients (default: seeded random)")
        sp.add_argument("--tuple", default=None, help="unit-tuple JSON file (check)")

    v = fam.add_parser("verify", help="full verification suite").add_subparsers(dest="command", required=True)
    sp = v.add_parser("all", help="run every check (default catalogue when --group is omitted)")
    _common(sp, group_required=False)
    return ap


# -- helpers ------------------------------------------------------------------------------


def _context(args, G: FiniteGroup) -> PrecisionContext:
    return PrecisionContext.for_order(G.p, G.order, n_check=args.check_precision, n_work=args.precision, seed=args.seed)


def _group(args) -> FiniteGroup:
    return jsonio.resolve_group(args.group, args.p)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _vector(args, G: FiniteGroup, ctx: PrecisionContext):
    if args.vector:
        return jsonio.parse_vector(args.vector, conj_basis(G), G.p, ctx.n_work)
    rng = random.Random(f"{ctx.seed}:vector")
    coeffs = tuple(rng.randint(-(G.p**3), G.p**3) for _ in range(len(G.classes)))
    return add.GroupRingElt(conj_basis(G), coeffs, G.p, ctx.n_work)


def _unit(args, G: FiniteGroup, ctx: PrecisionContext):
    if args.unit:
        x = jsonio.parse_vector(args.unit, group_basis(G), G.p, ctx.n_work)
        try:
            return mul.require_unit(x)
        except NotAUnit as exc:
            raise InputError(f"--unit: {exc}") from exc
    return mul.random_unit(G, ctx)


def _cap(r: int, n: int) -> int:
    return min(r, n)


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (dict, list)) and val:
                lines.append(f"{pad}{key}:")
                lines.append(_text(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {val}")
    elif isinstance(obj, list):
        for val in obj:
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_text(val, indent + 1))
            else:
                lines.append(f"{pad}- {val}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def _emit(args, payload: dict) -> None:
    out = jsonio.dumps(payload) if args.format == "json" else _text(payload) + "\n"
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


# -- commands --------------------------------------------------------------------------


def cmd_group(args) -> int:
    if args.command == "list":
        _emit(args, jsonio.catalog_listing())
        return EXIT_OK
    _emit(args, {"group": jsonio.group_info(_group(args))})
    return EXIT_OK


def cmd_additive(args) -> int:
    G = _group(args)
    ctx = _context(args, G)
    n = ctx.n_check
    if args.command == "basis":
        B = add.phi_module_basis(G, args.shape, n)
        _emit(args, {"shape": args.shape, "basis": jsonio.howell_to_json(B)})
        return EXIT_OK
    if args.tuple:
        t = jsonio.phi_tuple_from_json(G, _load_json(args.tuple))
        a = None
    else:
        a = _vector(args, G, ctx)
        t = add.beta_shape(G, args.shape, a)
    if args.command == "beta":
        _emit(args, {"vector": jsonio.element_to_json(a) if a is not None else None, "tuple": jsonio.phi_tuple_to_json(t)})
        return EXIT_OK
    if args.command == "tau":
        if t.shape != "cyclic":
            t = add.proj(t)
        back = add.tau(G, t)
        payload = {"tau": jsonio.element_to_json(back)}
        ok = True
        if a is not None:
            r = _cap(back.residual_checked(a, n), n)
            ok = r >= n
            payload.update({"vector": jsonio.element_to_json(a), "residual": r, "passed": ok})
        _emit(args, payload)
        return EXIT_OK if ok else EXIT_FAIL
    rep = add.check_phi_conditions(G, t, n)
    _emit(args, {"shape": t.shape, "report": rep.to_dict()})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_k1(args) -> int:
    G = _group(args)
    ctx = _context(args, G)
    n = ctx.n_check
    if args.command == "check" and args.tuple:
        t = jsonio.psi_tuple_from_json(G, _load_json(args.tuple))
        rep = mul.check_psi_conditions(G, t, n)
        _emit(args, {"report": rep.to_dict()})
        return EXIT_OK if rep.passed else EXIT_FAIL
    u = _unit(args, G, ctx)
    if args.command == "theta":
        _emit(args, {"unit": jsonio.element_to_json(u), "tuple": jsonio.psi_tuple_to_json(mul.theta_all(G, u))})
        return EXIT_OK
    if args.command == "L":
        L = mul.integral_log_L(G, u).truncate(n)
        _emit(args, {"unit": jsonio.element_to_json(u), "L": jsonio.element_to_json(L), "omega": list(mul.omega_of(G, L))})
        return EXIT_OK
    if args.command == "check":
        rep = mul.check_psi_conditions(G, mul.theta_all(G, u), n)
        _emit(args, {"unit": jsonio.element_to_json(u), "report": rep.to_dict()})
        return EXIT_OK if rep.passed else EXIT_FAIL
    th = mul.theta_all(G, u)
    rows = []
    ok = True
    for H in G.subgroups:
        ki = _cap(mul.key_identity_check(G, H, u, th, n), n)
        ot = _cap(mul.oliver_taylor_check(G, H, u, n), n)
        ok = ok and ki >= n and ot >= n
        rows.append({"subgroup": G.subgroup_index[H], "order": H.order, "key_identity": ki, "oliver_taylor": ot})
    _emit(args, {"unit": jsonio.element_to_json(u), "n_check": n, "passed": ok, "subgroups": rows})
    return EXIT_OK if ok else EXIT_FAIL


def _suite_config(args, G: FiniteGroup) -> SuiteConfig:
    kw = {}
    if args.samples is not None:
        kw["unit_samples"] = args.samples
        kw["heavy_samples"] = min(args.samples, 20)
        kw["tuple_samples"] = min(args.samples, 20)
    return SuiteConfig(G, _context(args, G), **kw)


def cmd_verify(args) -> int:
    groups = [_group(args)] if args.group else [named_group(s) for s in DEFAULT_SUITE]
    reports = [run_suite(_suite_config(args, G)) for G in groups]
    passed = all(r.passed for r in reports)
    if args.format == "text":
        lines = []
        for r in reports:
            lines.append(f"{r.group} (p={r.p}, |G|={r.order}): {'PASS' if r.passed else 'FAIL'}")
            for c in r.checks:
                extra = "" if c.residual is None else f" residual={c.residual}"
                lines.append(f"  {'ok  ' if c.passed else 'FAIL'} {c.name}{extra} ({c.seconds:.2f}s)")
        out = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(out)
        else:
            sys.stdout.write(out)
    else:
        _emit(args, {"passed": passed, "reports": [r.to_dict() for r in reports]})
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {"group": cmd_group, "additive": cmd_additive, "k1": cmd_k1, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        if args.samples is not None and args.samples < 1:
            raise InputError("--samples must be at least 1")
        return COMMANDS[args.family](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PrecisionExhausted as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except WhiteheadLabError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
