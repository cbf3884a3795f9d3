"""Command-line entry point.

Exit codes: 0 when every asserted identity holds, 1 when a violation was
found (the witness is in the report), 2 for usage, parse or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from ..contexts import NEG_INF, ContextError, check_projector_axioms, order_bruteforce, principal_symbol
from ..derived import (DerivedEngine, GeneratorError, check_order_corollary, generator_square,
                       inner_derivation, jacobiator, parameter_derivation, verify_theorem1,
                       verify_theorem2)
from ..fiber import FiberEngine, FiberError, verify_fiber_linfty
from ..kernel import SignatureError, graded_sort
from ..linfty import (LInftyStructure, StructureError, brackets_from_q, check_jacobi_structure,
                      q_from_brackets)
from ..reports import Report
from .ctxdoc import ContextDocError, load
from .expr import ParseError, parse_expr

INPUT_ERRORS = (ParseError, ContextDocError, ContextError, GeneratorError, FiberError,
                StructureError, SignatureError, ZeroDivisionError)


class UsageError(ValueError):
    pass


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # shared by the top parser (real defaults) and every subparser
    # (suppressed defaults) so the flags work on either side of the command
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--ctx", default=d("demo-ops"),
                   help="context file, or demo-ops|demo-vect|demo-ham|demo-multivec")
    p.add_argument("--format", choices=["json", "text"], default=d("json"))
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--no-timing", action="store_true", default=d(False),
                   help="omit elapsed_ms so reports are byte-identical across runs")
    return p


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="higherbrackets", parents=[_global_flags(True)],
                                  description="Higher derived brackets: compute and verify.")
    g = _global_flags(False)
    sub = top.add_subparsers(dest="cmd", required=True)

    ctx = sub.add_parser("ctx", parents=[g], help="context operations")
    ctx_sub = ctx.add_subparsers(dest="ctx_cmd", required=True)
    chk = ctx_sub.add_parser("check", parents=[g], help="check the projector axioms")
    chk.add_argument("--trials", type=int, default=100)

    br = sub.add_parser("bracket", parents=[g], help="derived bracket of a generator")
    br.add_argument("--delta", required=True)
    br.add_argument("--args", nargs="*", default=[])

    jac = sub.add_parser("jacobi", parents=[g], help="Jacobiator, compared with the bracket of the square")
    jac.add_argument("--delta", required=True)
    jac.add_argument("--n", type=int)
    jac.add_argument("--args", nargs="*", default=[])

    od = sub.add_parser("order", parents=[g], help="order of an element")
    od.add_argument("--elem", required=True)
    od.add_argument("--probe-degree", type=int, default=2)

    ver = sub.add_parser("verify", parents=[g], help="randomized exact verification")
    ver.add_argument("what", choices=["theorem1", "theorem2", "order-corollary", "fiber"])
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--nmax", type=int, default=4)
    ver.add_argument("--delta", help="fixed generator (random generators otherwise)")
    ver.add_argument("--param", help="odd parameter whose derivative is added to ad(delta)")
    ver.add_argument("--r", type=int, help="order bound for order-corollary (default: ord of the square)")

    lin = sub.add_parser("linfty", parents=[g], help="L-infinity structures and generating fields")
    lin.add_argument("action", choices=["from-q", "to-q", "check"])
    lin.add_argument("--q", help="vector field (vect context)")
    lin.add_argument("--structure", help="structure-constant JSON file")
    lin.add_argument("--arity-cap", type=int)
    lin.add_argument("--nmax", type=int, default=4)

    sym = sub.add_parser("symbol", parents=[g], help="principal symbol of an operator")
    sym.add_argument("--delta", required=True)
    return top


# -- structure documents -------------------------------------------------------

def structure_to_doc(s: LInftyStructure) -> dict:
    entries = []
    for n in sorted(s.tables):
        for idx in sorted(s.tables[n]):
            vec = s.tables[n][idx]
            entries.append({"args": [s.names[i] for i in idx],
                            "value": {s.names[k]: str(vec[k]) for k in sorted(vec)}})
    return {"basis": [{"name": n, "parity": "odd" if p else "even"} for n, p in zip(s.names, s.parities)],
            "brackets": entries}


def structure_from_doc(doc: dict) -> LInftyStructure:
    try:
        names = [b["name"] for b in doc["basis"]]
        par = [{"even": 0, "odd": 1}[b["parity"]] for b in doc["basis"]]
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed basis: {exc}") from None
    pos = {n: i for i, n in enumerate(names)}
    tables: dict = {}
    for e in doc.get("brackets", []):
        try:
            idx = [pos[a] for a in e["args"]]
            vec = {pos[k]: Fraction(v) for k, v in e["value"].items()}
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise StructureError(f"malformed bracket entry {e!r}: {exc}") from None
        order, sign = graded_sort(idx, [par[i] for i in idx])
        key = tuple(idx[i] for i in order)
        table = tables.setdefault(len(idx), {})
        acc = table.setdefault(key, {})
        for k, v in vec.items():
            acc[k] = acc.get(k, 0) + sign * v
    return LInftyStructure(names, par, tables)


# -- commands ------------------------------------------------------------------

def _report(command, seed, verdict="pass", cases=(), **extra) -> dict:
    out = {"command": command, "seed": seed, "verdict": verdict, "cases": list(cases)}
    out.update(extra)
    return out


def _from_report(r: Report, **extra) -> dict:
    d = r.to_dict()
    out = _report(d["command"], d["seed"], d["verdict"], d["cases"], trials=d["trials"],
                  verdicts=d["verdicts"], witnesses=d["witnesses"], notes=d["notes"])
    out.update(extra)
    return out


def _elems(ctx, sources):
    return [parse_expr(s, ctx) for s in sources]


def cmd_ctx(args, doc, ctx):
    r = check_projector_axioms(ctx, trials=args.trials, seed=args.seed)
    return _from_report(r, context=doc)


def cmd_bracket(args, doc, ctx):
    delta = parse_expr(args.delta, ctx)
    elems = _elems(ctx, args.args)
    value = DerivedEngine.of(ctx, delta).bracket(elems)
    return _report("bracket", args.seed, inputs=[ctx.format(delta)] + [ctx.format(a) for a in elems],
                   arity=len(elems), result=ctx.format(value))


def cmd_jacobi(args, doc, ctx):
    delta = parse_expr(args.delta, ctx)
    elems = _elems(ctx, args.args)
    if args.n is not None and args.n != len(elems):
        raise UsageError(f"--n {args.n} but {len(elems)} arguments given")
    engine = DerivedEngine.of(ctx, delta)
    j = jacobiator(engine, elems)
    inputs = [ctx.format(delta)] + [ctx.format(a) for a in elems]
    extra = {"inputs": inputs, "arity": len(elems), "result": ctx.format(j)}
    if engine.parity != 1:
        return _report("jacobi", args.seed, notes=["even generator: no comparison with a square"], **extra)
    sq = generator_square(engine).bracket(elems)
    residual = j - sq
    cases = []
    if residual:
        cases.append({"check": "jacobiator = bracket of square", "inputs": inputs,
                      "residual": ctx.format(residual), "arity": len(elems)})
    return _report("jacobi", args.seed, "fail" if cases else "pass", cases,
                   square_bracket=ctx.format(sq), **extra)


def cmd_order(args, doc, ctx):
    a = parse_expr(args.elem, ctx)
    o = ctx.order(a)
    extra = {"inputs": [ctx.format(a)], "order": None if o is NEG_INF else o}
    if o is NEG_INF:
        return _report("order", args.seed, notes=["zero element: order is -infinity"], **extra)
    cases = []
    agree = order_bruteforce(ctx, a, o, args.probe_degree)
    lower = o == 0 or not order_bruteforce(ctx, a, o - 1, args.probe_degree)
    if not agree:
        cases.append({"check": "bruteforce", "inputs": [ctx.format(a)],
                      "residual": f"a nonzero {o + 1}-fold bracket with probes"})
    notes = [f"probe degree {args.probe_degree}: bounded check"]
    if not lower:
        notes.append(f"no nonzero {o}-fold bracket found with these probes")
    return _report("order", args.seed, "fail" if cases else "pass", cases, notes=notes, **extra)


def cmd_verify(args, doc, ctx):
    delta = parse_expr(args.delta, ctx) if args.delta else None
    if args.what == "theorem1":
        target = DerivedEngine.of(ctx, delta) if delta is not None else ctx
        r = verify_theorem1(target, n_max=args.nmax, trials=args.trials, seed=args.seed)
    elif args.what == "theorem2":
        target = ctx
        if delta is not None:
            d = inner_derivation(ctx, delta)
            if args.param:
                d = d + parameter_derivation(ctx, args.param)
            target = DerivedEngine.of_derivation(ctx, d)
        r = verify_theorem2(target, n_max=args.nmax, trials=args.trials, seed=args.seed)
    elif args.what == "order-corollary":
        if delta is None:
            raise UsageError("verify order-corollary needs --delta")
        engine = DerivedEngine.of(ctx, delta)
        rr = args.r
        if rr is None:
            o = ctx.order(generator_square(engine).delta)
            rr = -1 if o is NEG_INF else o
        r = check_order_corollary(engine, rr, n_max=args.nmax, trials=args.trials, seed=args.seed)
    else:
        target = ctx
        if delta is not None:
            d = inner_derivation(ctx, delta)
            if args.param:
                d = d + parameter_derivation(ctx, args.param)
            target = FiberEngine(ctx, d, seed=args.seed)
        r = verify_fiber_linfty(target, n_max=args.nmax, trials=args.trials, seed=args.seed)
    return _from_report(r, nmax=args.nmax)


def cmd_linfty(args, doc, ctx):
    if args.action == "from-q":
        if ctx.kind != "vect":
            raise UsageError("linfty from-q needs a vect context")
        if not args.q:
            raise UsageError("linfty from-q needs --q")
        q = parse_expr(args.q, ctx)
        cap = args.arity_cap if args.arity_cap is not None else ctx.caps.arity_cap
        s = brackets_from_q(ctx, q, cap)
        return _report("linfty from-q", args.seed, inputs=[ctx.format(q)], result=structure_to_doc(s))
    if args.structure:
        try:
            with open(args.structure, encoding="utf-8") as fh:
                s = structure_from_doc(json.load(fh))
        except OSError as exc:
            raise UsageError(f"cannot read {args.structure!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise StructureError(f"invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    elif args.q and args.action == "check":
        if ctx.kind != "vect":
            raise UsageError("--q needs a vect context")
        cap = max(args.nmax + 1, 1)
        s = brackets_from_q(ctx, parse_expr(args.q, ctx), cap)
    else:
        raise UsageError(f"linfty {args.action} needs --structure" + (" or --q" if args.action == "check" else ""))
    if args.action == "to-q":
        qctx, q = q_from_brackets(s)
        return _report("linfty to-q", args.seed, result=qctx.format(q),
                       context={"kind": "vect", "variables": [
                           {"name": n, "parity": "odd" if p else "even", "role": "base"}
                           for n, p in zip(s.names, s.parities)]})
    return _from_report(check_jacobi_structure(s, args.nmax))


def cmd_symbol(args, doc, ctx):
    delta = parse_expr(args.delta, ctx)
    hctx, sym = principal_symbol(ctx, delta)
    return _report("symbol", args.seed, inputs=[ctx.format(delta)], order=ctx.order(delta),
                   result=hctx.format(sym))


COMMANDS = {"ctx": cmd_ctx, "bracket": cmd_bracket, "jacobi": cmd_jacobi, "order": cmd_order,
            "verify": cmd_verify, "linfty": cmd_linfty, "symbol": cmd_symbol}


# -- rendering -----------------------------------------------------------------

def render_text(report: dict) -> str:
    lines = [f"{report['command']}: {report['verdict'].upper()}"]
    for key in ("seed", "trials", "arity", "order", "elapsed_ms"):
        if report.get(key) is not None:
            lines.append(f"  {key}: {report[key]}")
    if "inputs" in report:
        lines.append("  inputs: " + "; ".join(report["inputs"]))
    if "result" in report:
        res = report["result"]
        if isinstance(res, dict):
            res = json.dumps(res, sort_keys=True)
        lines.append(f"  result: {res}")
    if "square_bracket" in report:
        lines.append(f"  bracket of square: {report['square_bracket']}")
    for k, v in report.get("verdicts", {}).items():
        lines.append(f"  [{v}] {k}")
    for c in report["cases"]:
        lines.append(f"  violation {c.get('check', '')}: inputs {c['inputs']} residual {c['residual']}")
    for c in report.get("witnesses", []):
        lines.append(f"  witness {c['check']}: inputs {c['inputs']} value {c['residual']}")
    for n in report.get("notes", []):
        lines.append(f"  note: {n}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        doc, ctx = load(args.ctx)
        report = COMMANDS[args.cmd](args, doc, ctx)
    except (UsageError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.no_timing:
        report["elapsed_ms"] = round((time.perf_counter() - start) * 1000)
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        text = render_text(report)
    sys.stdout.write(text)
    sys.stdout.flush()
    return 0 if report["verdict"] == "pass" else 1


if __name__ == "__main__":
    sys.exit(main())
