"""Command line front door.

Every command reads JSON, writes canonical JSON (sorted keys, rationals as
strings) or a short text report, and maps failures onto exit statuses:
0 success, 2 bad input, 3 locality violation, 4 insufficient working order.
"""

import argparse
import contextlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import cones as cones_mod
from . import forests as forests_mod
from . import locality
from .errors import InputError, InsufficientOrderError, MeroconeError
from .germs import IDENTITY, InnerProduct
from .textio import SCHEMA, germ_to_json, render_germ


def _load_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _check_schema(obj):
    if isinstance(obj, dict) and obj.get("schema", SCHEMA) != SCHEMA:
        raise InputError(f"unsupported schema {obj.get('schema')!r}; expected {SCHEMA!r}")


def load_gram(source):
    if source in (None, "identity"):
        return IDENTITY
    obj = _load_json(source)
    _check_schema(obj)
    gram = obj.get("gram") if isinstance(obj, dict) else obj
    if not isinstance(gram, list):
        raise InputError("Gram file must hold a matrix or {\"gram\": matrix}")
    return InnerProduct(gram)


def _coefficient_report(value):
    return {"exact": str(value), "json": value.to_json(), "float": float(value)}


def _germ_report(g):
    return {"text": render_germ(g), "json": germ_to_json(g)}


# ---------------------------------------------------------------------------
# commands

def cmd_locality(args):
    if args.builtin:
        kind, _, arg = args.builtin.partition(":")
        S = locality.builtin_structure(kind, arg)
    elif args.input:
        obj = _load_json(args.input)
        _check_schema(obj)
        S = locality.FiniteLocalityStructure.from_json(obj)
    else:
        raise InputError("give a structure file or --builtin")
    rep = locality.check_axiom(S, args.axiom)
    body = rep.to_json()
    text = f"{rep.axiom.value}: {'holds' if rep.holds else 'fails'}"
    if not rep.holds:
        text += f" (witness {tuple(rep.witness)!r}: {rep.reason})"
    return body, text


def _read_cones(path, triangulated):
    obj = _load_json(path)
    _check_schema(obj)
    if isinstance(obj, dict) and "cones" in obj:
        items = obj["cones"]
        triangulated = triangulated or bool(obj.get("triangulated"))
    elif isinstance(obj, list):
        items = obj
    else:
        items = [obj]
    cs = [cones_mod.LatticeCone.from_json(o) for o in items]
    if len(cs) > 1 and not triangulated:
        raise InputError("several cones given; pass --triangulated to assert they triangulate one cone")
    return cs


def cmd_cones_zeta(args):
    q = load_gram(args.gram)
    cs = _read_cones(args.input, args.triangulated)
    closure = "Open" if args.kind == "open" else "Closed"
    if len(cs) == 1:
        fn = cones_mod.zeta_open if closure == "Open" else cones_mod.zeta_closed
        value = fn(cs[0], q, args.order)
    else:
        value = cones_mod.zeta_union(cs, closure, q, args.order)
    body = {"kind": args.kind, "zeta": str(value), "zeta_json": value.to_json(), "float": float(value)}
    return body, f"zeta_{args.kind} = {value}  (~{float(value):.12g})"


def cmd_cones_laplace(args):
    cs = _read_cones(args.input, args.triangulated)
    if args.map == "I":
        if len(cs) != 1:
            raise InputError("the integral map takes a single cone")
        g = cones_mod.I_cone(cs[0])
    else:
        closure = "Open" if args.map == "S_open" else "Closed"
        if len(cs) == 1:
            fn = cones_mod.S_open if closure == "Open" else cones_mod.S_closed
            g = fn(cs[0], args.order, jobs=args.jobs)
        else:
            g = cones_mod.S_union(cs, closure, args.order, jobs=args.jobs)
    body = {"map": args.map, "germ": render_germ(g), "germ_json": germ_to_json(g)}
    return body, f"{args.map} = {render_germ(g)}"


def cmd_forests_kreimer(args):
    q = load_gram(args.gram)
    obj = _load_json(args.input)
    _check_schema(obj)
    F = forests_mod.DecoratedForest.from_json(obj, q)
    order = args.order if args.order is not None else _default_forest_order(F)
    r1 = forests_mod.kreimer_R1(F, order)
    value = forests_mod.kreimer_renormalised(F, q, order)
    body = {
        "R1": render_germ(r1),
        "R1_json": germ_to_json(r1),
        "renormalised": str(value),
        "renormalised_json": value.to_json(),
        "float": float(value),
    }
    return body, f"R1 = {render_germ(r1)}\nrenormalised = {value}  (~{float(value):.12g})"


def _default_forest_order(F):
    env = os.environ.get("MEROCONE_DEFAULT_ORDER")
    return int(env) if env else len(F) + 4


def cmd_batch(args):
    """Run a JSON list of argv vectors; reports come back in input order."""
    jobs = _load_json(args.input)
    if not isinstance(jobs, list) or not all(isinstance(j, list) for j in jobs):
        raise InputError("batch file must be a list of argument lists")

    def one(argv):
        code, out = execute(list(map(str, argv)) + ["--format", "json"])
        return {"argv": argv, "exit": code, "report": json.loads(out)}

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as ex:
        results = list(ex.map(one, jobs))
    return {"jobs": results}, "\n".join(f"{' '.join(map(str, r['argv']))}: exit {r['exit']}" for r in results)


# ---------------------------------------------------------------------------
# parser

def _common(p, order=True):
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--jobs", type=int, default=1)
    if order:
        p.add_argument("--order", type=_positive, default=None)
        p.add_argument("--auto-order", action="store_true",
                       help="retry once at doubled order after an insufficient-order failure")


def _positive(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("order must be >= 1")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="merocone", description="Locality renormalisation engine")
    sub = ap.add_subparsers(dest="group", required=True)

    loc = sub.add_parser("locality").add_subparsers(dest="action", required=True)
    p = loc.add_parser("check", help="check one axiom on a finite structure")
    p.add_argument("--axiom", required=True)
    p.add_argument("--builtin", help="CoprimeNaturals:N or DisjointPowerset:abc")
    p.add_argument("input", nargs="?")
    _common(p, order=False)
    p.set_defaults(func=cmd_locality)

    cn = sub.add_parser("cones").add_subparsers(dest="action", required=True)
    p = cn.add_parser("zeta", help="renormalised conical zeta value")
    p.add_argument("--kind", choices=("open", "closed"), required=True)
    p.add_argument("--gram", default="identity")
    p.add_argument("--triangulated", action="store_true")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_cones_zeta)

    p = cn.add_parser("laplace", help="germ of S_open, S_closed or I")
    p.add_argument("--map", choices=("S_open", "S_closed", "I"), required=True)
    p.add_argument("--triangulated", action="store_true")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_cones_laplace)

    fo = sub.add_parser("forests").add_subparsers(dest="action", required=True)
    p = fo.add_parser("kreimer", help="Kreimer toy model on a decorated forest")
    p.add_argument("--gram", default="identity")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_forests_kreimer)

    p = sub.add_parser("batch", help="run a list of commands")
    p.add_argument("input")
    _common(p, order=False)
    p.set_defaults(func=cmd_batch)
    return ap


def _dump(body):
    return json.dumps({"schema": SCHEMA, **body}, sort_keys=True, indent=2)


def execute(argv):
    """Run one command; returns ``(exit status, output text)`` without printing."""
    ap = build_parser()
    err = io.StringIO()
    try:
        with contextlib.redirect_stderr(err):
            args = ap.parse_args(argv)
    except SystemExit as exc:
        if not exc.code:
            return 0, ""
        return 2, _dump({"error": "UsageError", "message": err.getvalue().strip()})
    try:
        try:
            body, text = args.func(args)
        except InsufficientOrderError:
            if not getattr(args, "auto_order", False):
                raise
            base = args.order or _fallback_order(args)
            args.order = 2 * base
            body, text = args.func(args)
            body["order_used"] = args.order
    except MeroconeError as exc:
        return exc.exit_code, _dump(exc.to_json())
    return 0, text if args.format == "text" else _dump(body)


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    if any(a in ("-h", "--help") for a in argv):
        build_parser().parse_args(argv)
    code, out = execute(argv)
    if out:
        print(out)
    return code


def _fallback_order(args):
    env = os.environ.get("MEROCONE_DEFAULT_ORDER")
    return int(env) if env else 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
