"""JSON text formats with exact "p/q" rationals.

Parsers raise SchemaError carrying a JSON pointer to the offending field.
Matrices are sparse triplets ``[row, col, "p/q"]`` with rows indexing the
target basis.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .ainf import DGA, PW, AinfOperations, PseudoIsotopy
from .errors import SchemaError
from .floer import CriticalData, Label, MorseKSystem, PartialComplex, PartialMap
from .gradecx import CochainComplex, GradedMap, GradedSpace
from .novikov import BETA0, DiscreteSubmonoid, rat, rat_str


# ---------------------------------------------------------------- primitives

def _get(obj, key, ptr, default=...):
    if not isinstance(obj, dict):
        raise SchemaError(ptr, "expected an object")
    if key not in obj:
        if default is not ...:
            return default
        raise SchemaError(f"{ptr}/{key}", "missing field")
    return obj[key]


def _list(obj, ptr):
    if not isinstance(obj, list):
        raise SchemaError(ptr, "expected an array")
    return obj


def _rat(v, ptr) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise SchemaError(ptr, f"expected a rational string, got {v!r}")
    try:
        return rat(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(ptr, f"malformed rational {v!r}: {exc}") from None


def _int(v, ptr) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(ptr, f"expected an integer, got {v!r}")
    return v


def _str(v, ptr) -> str:
    if not isinstance(v, str):
        raise SchemaError(ptr, f"expected a string, got {v!r}")
    return v


def _wrap(ptr, fn, *args):
    """Run a constructor, turning its validation errors into schema errors."""
    try:
        return fn(*args)
    except SchemaError:
        raise
    except (ValueError, IndexError, KeyError, TypeError) as exc:
        raise SchemaError(ptr, str(exc)) from None


def load_json(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError("", f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def jsonable(x):
    """Plain JSON view of report payloads (Fractions as strings, keys stringified)."""
    if isinstance(x, Fraction):
        return rat_str(x)
    if isinstance(x, float) and x == float("inf"):
        return "inf"
    if isinstance(x, dict):
        return {_key(k): jsonable(v) for k, v in sorted(x.items(), key=lambda kv: _key(kv[0]))}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in x]
        return sorted(items, key=str) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, PW):
        return {"breaks": [rat_str(b) for b in x.breaks], "pieces": [[rat_str(c) for c in p] for p in x.pieces]}
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def _key(k) -> str:
    if isinstance(k, str):
        return k
    return json.dumps(jsonable(k))


# ---------------------------------------------------------------- spaces

def parse_space(obj, ptr) -> GradedSpace:
    basis = []
    for n, b in enumerate(_list(_get(obj, "basis", ptr), f"{ptr}/basis")):
        p = f"{ptr}/basis/{n}"
        basis.append((_str(_get(b, "name", p), f"{p}/name"), _int(_get(b, "deg", p), f"{p}/deg")))
    return _wrap(f"{ptr}/basis", GradedSpace, tuple(basis))


def parse_triplets(obj, ptr, rows, cols) -> dict:
    entries = {}
    for n, t in enumerate(_list(obj, ptr)):
        p = f"{ptr}/{n}"
        if not isinstance(t, list) or len(t) != 3:
            raise SchemaError(p, "expected [row, col, value]")
        r, c = _int(t[0], f"{p}/0"), _int(t[1], f"{p}/1")
        if not (0 <= r < rows and 0 <= c < cols):
            raise SchemaError(p, f"index ({r}, {c}) outside {rows}x{cols}")
        entries[(r, c)] = entries.get((r, c), Fraction(0)) + _rat(t[2], f"{p}/2")
    return entries


def emit_triplets(f: GradedMap) -> list:
    return [[j, i, rat_str(v)] for (j, i), v in sorted(f.entries.items())]


def parse_complex(obj, ptr) -> CochainComplex:
    V = parse_space(obj, ptr)
    ent = parse_triplets(_get(obj, "d0", ptr, []), f"{ptr}/d0", V.dim, V.dim)
    d0 = _wrap(f"{ptr}/d0", GradedMap, V, V, 1, ent)
    return _wrap(f"{ptr}/d0", CochainComplex, V, d0)


def emit_space(V: GradedSpace) -> list:
    return [{"name": n, "deg": d} for n, d in V.basis]


def emit_complex(C: CochainComplex) -> dict:
    return {"basis": emit_space(C.space), "d0": emit_triplets(C.d0)}


# ---------------------------------------------------------------- Floer files

def parse_critical(obj, ptr) -> CriticalData:
    labels = []
    for n, l in enumerate(_list(obj, ptr)):
        p = f"{ptr}/{n}"
        cx = parse_complex(_get(l, "complex", p), f"{p}/complex")
        labels.append(_wrap(p, Label, _str(_get(l, "id", p), f"{p}/id"), _rat(_get(l, "E", p), f"{p}/E"),
                            _int(_get(l, "mu", p), f"{p}/mu"), _int(_get(l, "dimR", p), f"{p}/dimR"), cx))
    return _wrap(ptr, CriticalData, labels)


def emit_critical(C: CriticalData) -> list:
    return [{"id": l.id, "E": rat_str(l.E), "mu": l.mu, "dimR": l.dimR, "complex": emit_complex(l.complex)}
            for l in C]


def _parse_blocks(obj, ptr, src: CriticalData, tgt: CriticalData, fdeg) -> dict:
    blocks = {}
    for n, e in enumerate(_list(obj, ptr)):
        p = f"{ptr}/{n}"
        a, b = _str(_get(e, "from", p), f"{p}/from"), _str(_get(e, "to", p), f"{p}/to")
        if a not in src.ids:
            raise SchemaError(f"{p}/from", f"unknown label {a!r}")
        if b not in tgt.ids:
            raise SchemaError(f"{p}/to", f"unknown label {b!r}")
        la, lb = src[a], tgt[b]
        ent = parse_triplets(_get(e, "matrix", p), f"{p}/matrix", lb.space.dim, la.space.dim)
        blocks[(a, b)] = _wrap(p, GradedMap, la.space, lb.space, fdeg + la.mu - lb.mu, ent)
    return blocks


def _emit_blocks(blocks: dict) -> list:
    return [{"from": a, "to": b, "matrix": emit_triplets(f)} for (a, b), f in sorted(blocks.items())]


def parse_ksystem(obj, ptr="") -> PartialComplex:
    C = parse_critical(_get(obj, "critical", ptr), f"{ptr}/critical")
    cut = _rat(_get(obj, "cut", ptr), f"{ptr}/cut")
    maps = _parse_blocks(_get(obj, "maps", ptr, []), f"{ptr}/maps", C, C, 1)
    return _wrap(f"{ptr}/maps", PartialComplex, C, cut, maps)


def emit_ksystem(X: PartialComplex) -> dict:
    return {"critical": emit_critical(X.critical), "cut": rat_str(X.cut), "maps": _emit_blocks(X.maps)}


def parse_morse(obj, ptr="") -> MorseKSystem:
    C = parse_critical(_get(obj, "critical", ptr), f"{ptr}/critical")
    counts = {}
    for n, e in enumerate(_list(_get(obj, "counts", ptr), f"{ptr}/counts")):
        p = f"{ptr}/counts/{n}"
        a, b = _str(_get(e, "from", p), f"{p}/from"), _str(_get(e, "to", p), f"{p}/to")
        if a not in C.ids or b not in C.ids:
            raise SchemaError(p, f"unknown label in ({a}, {b})")
        ent = parse_triplets(_get(e, "matrix", p), f"{p}/matrix", C[b].space.dim, C[a].space.dim)
        m = [[ent.get((r, c), Fraction(0)) for c in range(C[a].space.dim)] for r in range(C[b].space.dim)]
        counts[(a, b)] = m
    dims = None
    if "dims" in obj:
        dims = {}
        for n, e in enumerate(_list(obj["dims"], f"{ptr}/dims")):
            p = f"{ptr}/dims/{n}"
            dims[(_str(_get(e, "from", p), f"{p}/from"), _str(_get(e, "to", p), f"{p}/to"))] = \
                _int(_get(e, "dim", p), f"{p}/dim")
    return _wrap(ptr, MorseKSystem, C, counts, dims)


def emit_morse(K: MorseKSystem) -> dict:
    counts = []
    for (a, b), m in sorted(K.counts.items()):
        trip = [[r, c, rat_str(v)] for r, row in enumerate(m) for c, v in enumerate(row) if v]
        counts.append({"from": a, "to": b, "matrix": trip})
    dims = [{"from": a, "to": b, "dim": d} for (a, b), d in sorted(K.dims.items())]
    return {"critical": emit_critical(K.critical), "counts": counts, "dims": dims}


def parse_map(obj, source: PartialComplex, target: PartialComplex, ptr="") -> PartialMap:
    cut = _rat(_get(obj, "cut", ptr), f"{ptr}/cut")
    loss = _rat(_get(obj, "loss", ptr, "0"), f"{ptr}/loss")
    blocks = _parse_blocks(_get(obj, "entries", ptr, []), f"{ptr}/entries", source.critical, target.critical, 0)
    return _wrap(ptr, PartialMap, source, target, cut, loss, blocks)


def emit_map(psi: PartialMap) -> dict:
    return {"cut": rat_str(psi.cut), "loss": rat_str(psi.loss), "entries": _emit_blocks(psi.entries)}


def parse_tower(obj, ptr=""):
    stages = [parse_ksystem(s, f"{ptr}/stages/{n}")
              for n, s in enumerate(_list(_get(obj, "stages", ptr), f"{ptr}/stages"))]
    maps_raw = _list(_get(obj, "maps", ptr), f"{ptr}/maps")
    if len(maps_raw) != max(len(stages) - 1, 0):
        raise SchemaError(f"{ptr}/maps", "need exactly one map per consecutive pair of stages")
    maps = [parse_map(m, stages[n], stages[n + 1], f"{ptr}/maps/{n}") for n, m in enumerate(maps_raw)]
    return stages, maps


def emit_tower(stages, maps) -> dict:
    return {"stages": [emit_ksystem(X) for X in stages], "maps": [emit_map(m) for m in maps]}


# ---------------------------------------------------------------- monoids and betas

def parse_monoid(obj, ptr) -> DiscreteSubmonoid:
    gens = _list(_get(obj, "generators", ptr) if isinstance(obj, dict) else obj, f"{ptr}/generators")
    out = []
    for n, g in enumerate(gens):
        p = f"{ptr}/generators/{n}"
        if not isinstance(g, list) or len(g) != 2:
            raise SchemaError(p, "expected [energy, mu]")
        out.append((_rat(g[0], f"{p}/0"), _int(g[1], f"{p}/1")))
    return _wrap(ptr, DiscreteSubmonoid, tuple(out))


def parse_beta(obj, ptr):
    if isinstance(obj, str):
        return parse_beta_flag(obj, ptr)
    if not isinstance(obj, list) or len(obj) != 2:
        raise SchemaError(ptr, "expected [energy, mu]")
    return (_rat(obj[0], f"{ptr}/0"), _int(obj[1], f"{ptr}/1"))


def parse_beta_flag(text: str, ptr="--beta"):
    """``"E:p/q,mu:n"``."""
    fields = {}
    for part in text.split(","):
        if ":" not in part:
            raise SchemaError(ptr, f"expected E:p/q,mu:n, got {text!r}")
        k, v = part.split(":", 1)
        fields[k.strip()] = v.strip()
    if set(fields) != {"E", "mu"}:
        raise SchemaError(ptr, f"expected E:p/q,mu:n, got {text!r}")
    try:
        mu = int(fields["mu"])
    except ValueError:
        raise SchemaError(ptr, f"mu must be an integer, got {fields['mu']!r}") from None
    return (_rat(fields["E"], ptr), mu)


def emit_beta(b) -> list:
    return [rat_str(b[0]), b[1]]


# ---------------------------------------------------------------- A-infinity files

def parse_dga(obj, ptr) -> DGA:
    cx = parse_complex(obj, ptr)
    V = cx.space
    prod = {}
    for n, t in enumerate(_list(_get(obj, "product", ptr, []), f"{ptr}/product")):
        p = f"{ptr}/product/{n}"
        if not isinstance(t, list) or len(t) != 4:
            raise SchemaError(p, "expected [i, j, k, value] for e_i e_j = value e_k")
        i, j, k = (_int(t[m], f"{p}/{m}") for m in range(3))
        if not all(0 <= x < V.dim for x in (i, j, k)):
            raise SchemaError(p, "basis index out of range")
        if V.degree(k) != V.degree(i) + V.degree(j):
            raise SchemaError(p, "product must have degree 0")
        row = prod.setdefault((i, j), {})
        row[k] = row.get(k, Fraction(0)) + _rat(t[3], f"{p}/3")
    return DGA(cx, prod)


def emit_dga(dga: DGA) -> dict:
    out = emit_complex(dga.complex)
    out["product"] = [[i, j, k, rat_str(rat(c))] for (i, j), row in sorted(dga.product.items())
                      for k, c in sorted(row.items()) if c]
    return out


def _parse_ops(obj, ptr, V: GradedSpace, coeff):
    names = {n: i for i, (n, _) in enumerate(V.basis)}
    ops = {}
    for n, o in enumerate(_list(obj, ptr)):
        p = f"{ptr}/{n}"
        k = _int(_get(o, "k", p), f"{p}/k")
        beta = parse_beta(_get(o, "beta", p), f"{p}/beta")
        table = ops.setdefault((k, beta), {})
        for m, e in enumerate(_list(_get(o, "entries", p), f"{p}/entries")):
            q = f"{p}/entries/{m}"
            ins = _list(_get(e, "inputs", q), f"{q}/inputs")
            if len(ins) != k:
                raise SchemaError(f"{q}/inputs", f"expected {k} inputs")
            try:
                key = tuple(names[_str(x, f"{q}/inputs")] for x in ins)
                out = names[_str(_get(e, "output", q), f"{q}/output")]
            except KeyError as exc:
                raise SchemaError(q, f"unknown basis element {exc}") from None
            table.setdefault(key, {})[out] = coeff(_get(e, "coeff", q), f"{q}/coeff")
    return ops


def _emit_ops(ops: dict, V: GradedSpace, coeff) -> list:
    out = []
    for (k, b), table in sorted(ops.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if b == BETA0:
            continue
        entries = [{"inputs": [V.basis[i][0] for i in inp], "output": V.basis[o][0], "coeff": coeff(c)}
                   for inp, row in sorted(table.items()) for o, c in sorted(row.items())]
        out.append({"k": k, "beta": emit_beta(b), "entries": entries})
    return out


def _header(obj, ptr):
    dga = parse_dga(_get(obj, "space", ptr), f"{ptr}/space")
    n = _int(_get(obj, "dimL", ptr), f"{ptr}/dimL")
    G = parse_monoid(_get(obj, "monoid", ptr), f"{ptr}/monoid")
    E0 = _rat(_get(obj, "E0", ptr), f"{ptr}/E0")
    e0 = _rat(_get(obj, "e0", ptr), f"{ptr}/e0")
    return dga, n, G, E0, e0


def parse_ainf(obj, ptr="") -> AinfOperations:
    dga, n, G, E0, e0 = _header(obj, ptr)
    ops = _parse_ops(_get(obj, "ops", ptr, []), f"{ptr}/ops", dga.space, _rat)
    return _wrap(f"{ptr}/ops", AinfOperations, dga, n, G, E0, e0, ops)


def _emit_header(x) -> dict:
    return {"space": emit_dga(x.dga), "dimL": x.n, "monoid": x.monoid.to_json(),
            "E0": rat_str(x.E0), "e0": rat_str(x.e0)}


def emit_ainf(A: AinfOperations) -> dict:
    out = _emit_header(A)
    out["ops"] = _emit_ops(A.table, A.space, rat_str)
    return out


def parse_isotopy(obj, ptr="") -> PseudoIsotopy:
    dga, n, G, E0, e0 = _header(obj, ptr)
    breaks = [_rat(b, f"{ptr}/breaks/{m}") for m, b in enumerate(_list(_get(obj, "breaks", ptr), f"{ptr}/breaks"))]

    def coeff(v, p):
        if isinstance(v, (str, int)):
            return _wrap(p, PW.const, breaks, _rat(v, p))
        br = _get(v, "breaks", p, None)
        if br is not None and [_rat(b, f"{p}/breaks") for b in _list(br, f"{p}/breaks")] != breaks:
            raise SchemaError(f"{p}/breaks", "entry breakpoints differ from the family breakpoints")
        pieces = [[_rat(c, f"{p}/pieces/{a}/{b}") for b, c in enumerate(_list(pc, f"{p}/pieces/{a}"))]
                  for a, pc in enumerate(_list(_get(v, "pieces", p), f"{p}/pieces"))]
        return _wrap(p, PW, breaks, pieces)

    _wrap(f"{ptr}/breaks", PW.const, breaks, 0)
    m = _parse_ops(_get(obj, "m", ptr, []), f"{ptr}/m", dga.space, coeff)
    c = _parse_ops(_get(obj, "c", ptr, []), f"{ptr}/c", dga.space, coeff)
    return _wrap(ptr, PseudoIsotopy, dga, n, G, E0, e0, breaks, m, c)


def _emit_pw(v: PW) -> dict:
    return {"pieces": [[rat_str(c) for c in p] for p in v.pieces]}


def emit_isotopy(I: PseudoIsotopy) -> dict:
    out = _emit_header(I)
    out["breaks"] = [rat_str(b) for b in I.breaks]
    out["m"] = _emit_ops(I.m, I.space, _emit_pw)
    out["c"] = _emit_ops(I.c, I.space, _emit_pw)
    return out
