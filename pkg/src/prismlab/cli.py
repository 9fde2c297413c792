"""Command line: verify suites, solve key equations, evaluate element pipelines.

Exit codes: 0 everything passed, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import ast
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .galois import GroupElement, act, iplus_reduce
from .maxring import MaxRing, MaxRingElement, reduce_mod_E, st_embed
from .series import Eisenstein
from .suites import SCHEMA_VERSION, SUITES, SuiteConfig, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def _dump(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _threads() -> int:
    raw = os.environ.get("PRISMLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"PRISMLAB_THREADS must be an integer, got {raw!r}")


# ---------------------------------------------------------------------------
# verify


def _table(reports: list[dict]) -> str:
    lines = []
    for r in reports:
        lines.append(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['suite']}: {r['topic']}")
        for c in r["checks"]:
            lines.append(f"    {c['status']:5s} {c['name']}")
    return "\n".join(lines)


def cmd_verify(args) -> int:
    names = sorted(SUITES) if args.all else [args.suite]
    if not args.all and not args.suite:
        raise InputError("give --suite NAME or --all")
    cfgs = []
    for name in names:
        cfg = SuiteConfig(name, args.p, args.E, args.M, args.N, args.L, args.I, args.D, args.seed, args.nmax)
        try:
            cfg.validate()
        except ValueError as exc:
            raise InputError(str(exc))
        cfgs.append(cfg)
    threads = min(_threads(), len(cfgs))
    if threads > 1:
        with ProcessPoolExecutor(threads) as pool:
            reports = list(pool.map(run_suite, cfgs))
    else:
        reports = [run_suite(c) for c in cfgs]
    docs = [r.to_json(timings=not args.no_timings) for r in reports]
    payload = docs[0] if len(docs) == 1 else {"schema": SCHEMA_VERSION, "reports": docs,
                                              "passed": all(d["passed"] for d in docs)}
    if args.table:
        print(_table(docs))
        if args.output:
            _dump(payload, args.output)
    else:
        _dump(payload, args.output)
    return EXIT_OK if all(d["passed"] for d in docs) else EXIT_FAIL


# ---------------------------------------------------------------------------
# elements


def _ring_from(data: dict) -> MaxRing:
    try:
        p = int(data["p"])
        E = Eisenstein.parse(p, data["E"])
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"element file needs a valid p and Eisenstein E: {exc}")
    flavor = data.get("flavor", "z")
    return MaxRing(E, flavor, int(data.get("M", 10)), int(data.get("I", 8)), data.get("L"))


_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b}


def eval_expression(text: str, ring: MaxRing) -> MaxRingElement:
    """Evaluate an expression in u, T (= E/p), E, y and g<i> (gamma_i of the generator)."""
    names = {"u": ring.u(), "T": ring.T(), "E": ring.E_elem(), "y": ring.y, "p": ring.scalar(ring.p)}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return ring.scalar(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                return names[node.id]
            if node.id in ("z", "w"):
                return ring.gen()
            if node.id.startswith("g") and node.id[1:].isdigit():
                return ring.gamma(int(node.id[1:]))
            raise InputError(f"unknown name {node.id!r} at column {node.col_offset}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                raise InputError(f"exponent must be an integer literal at column {node.col_offset}")
            return ev(node.left) ** node.right.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise InputError(f"unsupported syntax at column {getattr(node, 'col_offset', 0)}")

    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse expression at column {exc.offset}: {exc.msg}")
    return ev(tree)


def load_element(data: dict) -> MaxRingElement:
    ring = _ring_from(data)
    if "expr" in data:
        return eval_expression(str(data["expr"]), ring)
    if "element" in data:
        return MaxRingElement.from_json(ring, data["element"])
    raise InputError("element file needs an 'expr' or an 'element' field")


def element_doc(x: MaxRingElement) -> dict:
    ring = x.ring
    return {"p": ring.p, "E": [str(c) for c in ring.E.coeffs], "flavor": ring.flavor, "M": ring.M,
            "I": ring.I, "element": x.to_json()}


def apply_op(x, op: str):
    """One pipeline stage; returns an element or a terminal JSON result."""
    name, _, arg = op.partition(":")
    if name == "identity":
        return x
    if name == "phi":
        return x.frobenius()
    if name == "delta":
        return x.delta()
    if name == "exact-div-p":
        return x.div_p(int(arg or 1))
    if name == "div-E":
        return x.div_E(int(arg or 1))
    if name == "mul-E":
        return x.mul_E(int(arg or 1))
    if name == "inverse":
        return x.inverse()
    if name == "st-embed":
        return st_embed(x)
    if name == "act":
        if x.ring.flavor != "w":
            x = st_embed(x)
        return act(GroupElement.parse(arg or "tau"), x)
    if name == "reduce-mod-E":
        return {"reduction_mod_E": {str(i): [str(c) for c in cs] for i, cs in reduce_mod_E(x).items()}}
    if name == "iplus":
        return {"iplus": iplus_reduce(x).to_json()}
    if name == "fil":
        h = int(arg or 1)
        ok, idx = x.in_fil(h)
        return {"fil": h, "member": ok, "first_bad_gamma": idx}
    raise InputError(f"unknown op {op!r}")


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def cmd_calc(args) -> int:
    if args.elem is not None:
        data = _read_json(args.elem)
    elif args.expr is not None:
        data = {"p": args.p, "E": args.E, "flavor": args.flavor, "M": args.M, "I": args.I, "expr": args.expr}
    else:
        raise InputError("give --elem FILE or --expr TEXT")
    x = load_element(data)
    for i, op in enumerate(args.op or []):
        if not isinstance(x, MaxRingElement):
            raise InputError(f"op {i} ({op}) follows a terminal op")
        try:
            x = apply_op(x, op)
        except ArithmeticError as exc:
            raise InputError(f"op {i} ({op}): {exc}")
    _dump(element_doc(x) if isinstance(x, MaxRingElement) else x, args.output)
    return EXIT_OK


def cmd_act(args) -> int:
    args.op = [f"act:{args.g}"] + (args.op or [])
    return cmd_calc(args)


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    from .descent import (KisinModuleData, SolverError, crystalline_test, extension_matrix, extension_module,
                          iplus_identity, solve_key_equation, tau_power_convergence)

    data = _read_json(args.problem)
    try:
        p = int(data["p"])
        E = Eisenstein.parse(p, data["E"])
        g = GroupElement.parse(data.get("g", "tau"))
        g.check(p)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"problem needs p, an Eisenstein E and a valid g: {exc}")
    M, I = int(data.get("M", 10)), int(data.get("I", 8))
    kind = data.get("kind", "key-equation")
    ring = MaxRing(E, "w", M, I, data.get("L"))
    if kind == "extension":
        km = extension_module(E, M)
        gm = extension_matrix(km, g, int(data.get("kappa", 1)), ring=ring)
    elif kind == "key-equation":
        try:
            km = KisinModuleData.from_json(data, E)
            km.check()
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad module data: {exc}")
        try:
            gm = solve_key_equation(km, g, ring=ring, max_iter=int(data.get("max_iter", 80)))
        except SolverError as exc:
            _dump({"status": "no-solution", "error": str(exc), "trace": exc.trace}, args.output)
            return EXIT_FAIL
    else:
        raise InputError(f"unknown problem kind {kind!r}")
    verdict = crystalline_test(gm)
    out = {
        "kind": kind,
        "module": km.to_json(),
        "g": g.to_json(),
        "residual_zero": gm.residual_zero,
        "iplus_identity": iplus_identity(gm),
        "verdict": verdict["verdict"],
        "X": [[x.to_json() for x in row] for row in gm.X],
    }
    if "entry" in verdict:
        out["witness"] = {"entry": list(verdict["entry"]), "gamma_index": verdict["index"]}
        if verdict.get("coefficient") is not None:
            c = verdict["coefficient"]
            out["witness"]["coefficient"] = c.to_json()
            out["witness"]["coefficient_valuation"] = c.valuation()
    if g == GroupElement.tau():
        out["tau_powers"] = tau_power_convergence(gm, int(data.get("nmax", 2)))
    _dump(out, args.output)
    return EXIT_OK if gm.residual_zero else EXIT_FAIL


# ---------------------------------------------------------------------------
# schema


SCHEMAS = {
    "report": {
        "type": "object",
        "required": ["schema", "suite", "topic", "config", "checks", "passed"],
        "properties": {
            "schema": {"const": SCHEMA_VERSION},
            "suite": {"enum": sorted(SUITES)},
            "topic": {"type": "string"},
            "config": {"type": "object"},
            "checks": {"type": "array", "items": {
                "type": "object", "required": ["name", "status", "detail"],
                "properties": {"name": {"type": "string"}, "status": {"enum": ["pass", "fail", "error"]},
                               "detail": {"type": "object"}, "seconds": {"type": "number"}}}},
            "passed": {"type": "boolean"},
        },
    },
    "element": {
        "type": "object",
        "required": ["p", "E"],
        "properties": {
            "p": {"type": "integer"}, "E": {"type": ["string", "array"]},
            "flavor": {"enum": ["z", "w"]}, "M": {"type": "integer"}, "I": {"type": "integer"},
            "expr": {"type": "string"},
            "element": {"type": "object", "properties": {
                "flavor": {"enum": ["z", "w"]}, "prec": {"type": "integer"},
                "terms": {"type": "array", "items": {"type": "object", "required": ["gamma", "coeff"], "properties": {
                    "gamma": {"type": "integer"},
                    "coeff": {"type": "object", "properties": {
                        "l0": {"type": "array", "items": {"type": "string"}},
                        "tail": {"type": "array", "items": {"type": "object", "properties": {
                            "l": {"type": "integer"}, "poly": {"type": "array", "items": {"type": "string"}}}}}}}}}}}},
        },
    },
    "problem": {
        "type": "object",
        "required": ["p", "E"],
        "properties": {
            "kind": {"enum": ["key-equation", "extension"]},
            "p": {"type": "integer"}, "E": {"type": ["string", "array"]},
            "h": {"type": "integer"}, "A_mat": {"type": "array"}, "B_mat": {"type": "array"},
            "g": {"type": ["string", "object"]}, "kappa": {"type": "integer"},
            "M": {"type": "integer"}, "I": {"type": "integer"}, "nmax": {"type": "integer"},
        },
    },
}


def cmd_schema(args) -> int:
    if args.name:
        if args.name not in SCHEMAS:
            raise InputError(f"unknown schema {args.name!r}; choose from {sorted(SCHEMAS)}")
        _dump(SCHEMAS[args.name])
    else:
        _dump(SCHEMAS)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prismlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=sorted(SUITES))
    v.add_argument("--all", action="store_true")
    v.add_argument("--p", type=int)
    v.add_argument("--E")
    v.add_argument("--M", type=int, default=12)
    v.add_argument("--N", type=int, default=12)
    v.add_argument("--L", type=int)
    v.add_argument("--I", type=int, default=8)
    v.add_argument("--D", type=int, default=6)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--nmax", type=int, default=4)
    v.add_argument("--output")
    v.add_argument("--table", action="store_true", help="print a human-readable summary")
    v.add_argument("--no-timings", action="store_true", help="omit timings for byte-stable output")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="solve a key equation from a problem file")
    s.add_argument("--problem", required=True)
    s.add_argument("--output")
    s.set_defaults(func=cmd_solve)

    for name, fn in (("calc", cmd_calc), ("act", cmd_act)):
        c = sub.add_parser(name, help="apply an op pipeline to an element" if name == "calc" else "apply a group element")
        c.add_argument("--elem")
        c.add_argument("--expr")
        c.add_argument("--p", type=int)
        c.add_argument("--E")
        c.add_argument("--flavor", default="z", choices=["z", "w"])
        c.add_argument("--M", type=int, default=10)
        c.add_argument("--I", type=int, default=8)
        c.add_argument("--op", action="append")
        c.add_argument("--output")
        if name == "act":
            c.add_argument("--g", default="tau")
        c.set_defaults(func=fn)

    sc = sub.add_parser("schema", help="print JSON schemas")
    sc.add_argument("name", nargs="?")
    sc.set_defaults(func=cmd_schema)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"prismlab: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError, TypeError) as exc:
        print(f"prismlab: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
