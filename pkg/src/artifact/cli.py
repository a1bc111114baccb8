"""Command-line front end.

Exit codes: 0 pass, 1 check failure, 2 input error, 3 obstruction.
Reports are JSON on stdout (or ``--output``); promotions write the promoted
structure to ``--output`` and the report to stdout.
"""
from __future__ import annotations

import argparse
import json
import sys
from math import comb

from . import ainf, corners, floer, trees
from .errors import PreconditionFailed, PromotionObstructed, SchemaError, Unsupported
from .novikov import BETA0, DiscreteSubmonoid
from .serialize import (_rat, dumps, emit_ainf, emit_isotopy, emit_ksystem, emit_map, jsonable, load_json,
                        parse_ainf, parse_beta_flag, parse_isotopy, parse_ksystem, parse_map,
                        parse_monoid, parse_morse, parse_tower)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_OBSTRUCTED = 0, 1, 2, 3

COMMANDS = ("check-ksystem", "check-ainf", "check-isotopy", "promote-floer", "promote-ainf", "limit",
            "trees", "corners-verify", "corners-smooth", "admissible-check")

# two-word spellings accepted on the command line
_ALIASES = {("check", "ksystem"): "check-ksystem", ("check", "ainf"): "check-ainf",
            ("check", "isotopy"): "check-isotopy", ("promote", "floer"): "promote-floer",
            ("promote", "ainf"): "promote-ainf", ("trees", "enumerate"): "trees",
            ("corners", "verify"): "corners-verify", ("corners", "smooth"): "corners-smooth",
            ("admissible", "check"): "admissible-check"}


class _Result:
    def __init__(self, code, report, structure=None):
        self.code, self.report, self.structure = code, report, structure


def _report(command, rep, **extra):
    body = {"command": command, "ok": rep.ok, "anchor": rep.anchor,
            "failures": [{"anchor": rep.anchor, "residual": jsonable(f)} for f in rep.failures]}
    if rep.info:
        body["info"] = jsonable(rep.info)
    body.update({k: jsonable(v) for k, v in extra.items()})
    return body


def _final_cut(args):
    return _rat(args.final_cut, "--final-cut")


def _code(ok):
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- commands

def cmd_check_ksystem(args):
    obj = load_json(args.input)
    if isinstance(obj, dict) and "counts" in obj:
        rep = floer.morse_check(parse_morse(obj))
        return _Result(_code(rep.ok), _report("check-ksystem", rep, kind="morse"))
    X = parse_ksystem(obj)
    rep = floer.check_partial_complex(X)
    return _Result(_code(rep.ok), _report("check-ksystem", rep, kind="partial-complex", cut=X.cut))


def cmd_check_ainf(args):
    A = parse_ainf(load_json(args.input))
    rep = ainf.check_partial_ainf(A)
    return _Result(_code(rep.ok), _report("check-ainf", rep, cut=A.E0))


def cmd_check_isotopy(args):
    I = parse_isotopy(load_json(args.input))
    rep = ainf.check_pseudoisotopy(I)
    return _Result(_code(rep.ok), _report("check-isotopy", rep, cut=I.E0))


def cmd_promote_floer(args):
    X1 = parse_ksystem(load_json(args.input))
    X2 = parse_ksystem(load_json(args.target))
    psi = parse_map(load_json(args.map), X1, X2)
    if args.final_cut is not None:
        X2 = floer.energy_cut(X2, _final_cut(args))
        psi = parse_map(load_json(args.map), X1, X2)
    X1p, psip = floer.promote_complex_with_map(X1, X2, psi)
    rep = floer.check_partial_complex(X1p).merge(floer.check_cochain_map(psip))
    out = {"complex": emit_ksystem(X1p), "map": emit_map(psip)}
    cert = floer.energy_cut(X1p, X1.cut) == X1
    return _Result(_code(rep.ok and cert), _report("promote-floer", rep, cut=X1p.cut, round_trip=cert), out)


def cmd_promote_ainf(args):
    m0 = parse_ainf(load_json(args.input))
    m1 = parse_ainf(load_json(args.to))
    I = parse_isotopy(load_json(args.iso))
    if args.final_cut is not None:
        m1 = ainf.energy_cut_ainf(m1, _final_cut(args))
    m0p, Ip = ainf.promote_via_isotopy(m0, m1, I)
    rep = ainf.check_partial_ainf(m0p).merge(ainf.check_pseudoisotopy(Ip))
    cert = ainf.energy_cut_ainf(m0p, m0.E0) == m0
    if args.iso_output:
        with open(args.iso_output, "w") as fh:
            fh.write(dumps(emit_isotopy(Ip)))
    return _Result(_code(rep.ok and cert), _report("promote-ainf", rep, cut=m0p.E0, round_trip=cert),
                   emit_ainf(m0p))


def cmd_limit(args):
    stages, maps = parse_tower(load_json(args.input))
    N = len(stages)
    if args.final_cut is not None:
        fc = _final_cut(args)
        N = sum(1 for X in stages if X.cut <= fc)
        if N == 0 or stages[N - 1].cut != fc:
            raise SchemaError("--final-cut", f"{args.final_cut} is not a stage cut level")
    res = floer.homotopy_limit(stages, maps, N)
    rep = floer.check_partial_complex(res.complex)
    certs = [{"round": r, "stage": k, "cut": c, "agrees": ok} for r, k, c, ok in res.certificates]
    ok = rep.ok and all(c["agrees"] for c in certs)
    return _Result(_code(ok), _report("limit", rep, cut=res.complex.cut, certificates=certs),
                   emit_ksystem(res.complex))


def cmd_trees(args):
    G = parse_monoid(load_json(args.monoid), "") if args.monoid else DiscreteSubmonoid(())
    beta = parse_beta_flag(args.beta) if args.beta else BETA0
    if args.k is None:
        raise SchemaError("--k", "required")
    ts = trees.enumerate_trees(G, args.k, beta)
    lines = "".join(json.dumps({"code": t.code, "codim": trees.corner_codim(t)}, sort_keys=True) + "\n"
                    for t in ts)
    return _Result(EXIT_OK, None, lines)


def cmd_corners_verify(args):
    n, k, l = args.n, args.k or 0, args.l or 0
    if n is None or n < 0 or k < 0 or l < 0:
        raise SchemaError("--n", "need n >= 0 and non-negative k, l")
    if k + l > n:
        raise SchemaError("--l", "k + l must not exceed n")
    comps = corners.normalized_corner(n, k)
    _, info = corners.covering_map(n, l, k)
    squares = {str(k3): corners.covering_square_check(n, k, l, k3) for k3 in range(n - k - l + 1)}
    ok = (len(comps) == comb(n, k) * 2 ** k and info["surjective"]
          and list(info["histogram"]) == [comb(k + l, l)] and all(squares.values()))
    body = {"command": "corners-verify", "ok": ok, "n": n, "k": k, "l": l, "components": len(comps),
            "sources": info["sources"], "targets": info["targets"], "surjective": info["surjective"],
            "fiber_histogram": {str(a): b for a, b in info["histogram"].items()},
            "expected_fiber": comb(k + l, l), "square_commutes": squares}
    return _Result(_code(ok), body)


def cmd_corners_smooth(args):
    if args.k is None:
        raise SchemaError("--k", "required")
    tol = args.tol if args.tol is not None else (1e-12 if args.k <= 2 else 1e-9)
    if tol <= 0:
        raise SchemaError("--tol", "tolerance must be positive")
    rep = corners.smoothing_property_check(args.k, args.samples or 10_000, tol)
    return _Result(_code(rep.ok), _report("corners-smooth", rep))


def cmd_admissible(args):
    rep = corners.admissible_coord_check(args.change)
    return _Result(_code(rep.ok), _report("admissible-check", rep))


HANDLERS = {"check-ksystem": cmd_check_ksystem, "check-ainf": cmd_check_ainf,
            "check-isotopy": cmd_check_isotopy, "promote-floer": cmd_promote_floer,
            "promote-ainf": cmd_promote_ainf, "limit": cmd_limit, "trees": cmd_trees,
            "corners-verify": cmd_corners_verify, "corners-smooth": cmd_corners_smooth,
            "admissible-check": cmd_admissible}


# ---------------------------------------------------------------- parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description="Energy-filtered Floer and A-infinity checks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("input_pos", nargs="?", metavar="INPUT")
        s.add_argument("--input")
        s.add_argument("--output")
        s.add_argument("--final-cut", dest="final_cut")
        s.add_argument("--tol", type=float)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--samples", type=int)
        s.add_argument("--monoid")
        s.add_argument("--k", type=int)
        s.add_argument("--l", type=int)
        s.add_argument("--n", type=int)
        s.add_argument("--beta")
        if name == "promote-floer":
            s.add_argument("--target", required=True, help="K-system at the higher cut")
            s.add_argument("--map", required=True, help="cochain map from INPUT to TARGET")
        if name == "promote-ainf":
            s.add_argument("--from", dest="from_")
            s.add_argument("--to", required=True)
            s.add_argument("--iso", required=True)
            s.add_argument("--iso-output")
        if name == "admissible-check":
            s.add_argument("--change", default="0", help="f in T' = T + f(T), e.g. 'exp(-T)'")
    return p


def _normalize_argv(argv):
    if len(argv) >= 2 and (argv[0], argv[1]) in _ALIASES:
        return [_ALIASES[(argv[0], argv[1])]] + list(argv[2:])
    return list(argv)


def main(argv=None) -> int:
    argv = _normalize_argv(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.input = args.input or args.input_pos or getattr(args, "from_", None)
    needs_input = {"check-ksystem", "check-ainf", "check-isotopy", "promote-floer", "promote-ainf", "limit"}
    try:
        if args.command in needs_input and not args.input:
            raise SchemaError("--input", "an input file is required")
        res = HANDLERS[args.command](args)
    except SchemaError as exc:
        _emit({"command": args.command, "ok": False, "error": "input", "pointer": exc.pointer,
               "message": str(exc)}, None)
        return EXIT_INPUT
    except Unsupported as exc:
        _emit({"command": args.command, "ok": False, "error": "input", "pointer": "", "message": str(exc)}, None)
        return EXIT_INPUT
    except PreconditionFailed as exc:
        _emit({"command": args.command, "ok": False, "error": "precondition", "message": str(exc),
               "failures": jsonable(getattr(exc, "failures", []))}, None)
        return EXIT_FAIL
    except PromotionObstructed as exc:
        _emit({"command": args.command, "ok": False, "error": "obstructed", "message": str(exc),
               "stage": exc.stage, "certificate": jsonable(exc.certificate)}, None)
        return EXIT_OBSTRUCTED
    if args.command == "trees":
        _write(res.structure, args.output)
        return res.code
    if res.structure is not None:
        if args.output:
            _write(dumps(res.structure), args.output)
        else:
            res.report["structure"] = res.structure
        _write(dumps(res.report), None)
    else:
        _write(dumps(res.report), args.output)
    return res.code


def _emit(body, path):
    _write(dumps(body), path)


def _write(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
