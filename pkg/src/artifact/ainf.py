"""Filtered A-infinity operations on a finite graded-commutative DGA.

Operations are sparse tables ``inputs -> {output: coeff}`` over basis
indices.  Coefficients are either Fractions or piecewise polynomials in t
(``PW``), so the same code evaluates the A-infinity defect of a single
structure and of a whole t-family at once.

Shifted degree is ``deg' = deg - 1``.  An operation of shifted degree s
with k inputs sends degrees (d_1..d_k) to ``sum d_i - k + s + 1``; the
m-operations have s = 1 - mu(beta) and the c-operations s = -mu(beta).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Mapping

from .errors import OutOfDomain, PreconditionFailed
from .gradecx import CochainComplex, GradedMap, GradedSpace
from .novikov import BETA0, DiscreteSubmonoid, beta_sub, gk_set, monoid_below, rat
from .report import Report

ZERO = Fraction(0)


# ---------------------------------------------------------------- piecewise polynomials

def _padd(p, q):
    n = max(len(p), len(q))
    out = [(p[i] if i < len(p) else ZERO) + (q[i] if i < len(q) else ZERO) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _peval(p, t):
    acc = ZERO
    for c in reversed(p):
        acc = acc * t + c
    return acc


def _pderiv(p):
    out = tuple(i * c for i, c in enumerate(p))[1:]
    return _padd(out, ())


def _pinteg(p):
    """Antiderivative vanishing at t = 0."""
    return _padd((ZERO,) + tuple(c / (i + 1) for i, c in enumerate(p)), ())


class PW:
    """Piecewise polynomial in absolute t; ``pieces[j]`` lives on [breaks[j], breaks[j+1]]."""

    __slots__ = ("breaks", "pieces")

    def __init__(self, breaks, pieces):
        self.breaks = tuple(rat(b) for b in breaks)
        if len(self.breaks) < 2 or any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing, at least two")
        pieces = [_padd(tuple(rat(c) for c in p), ()) for p in pieces]
        if len(pieces) != len(self.breaks) - 1:
            raise ValueError("need one polynomial per interval")
        self.pieces = tuple(pieces)

    @classmethod
    def const(cls, breaks, c):
        return cls(breaks, [(rat(c),)] * (len(breaks) - 1))

    def _coerce(self, other):
        if isinstance(other, PW):
            if other.breaks != self.breaks:
                raise ValueError("piecewise polynomials on different breakpoints")
            return other
        return PW.const(self.breaks, other)

    def __add__(self, other):
        o = self._coerce(other)
        return PW(self.breaks, [_padd(p, q) for p, q in zip(self.pieces, o.pieces)])

    __radd__ = __add__

    def __neg__(self):
        return PW(self.breaks, [tuple(-c for c in p) for p in self.pieces])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, PW):
            o = self._coerce(other)
            return PW(self.breaks, [_pmul(p, q) for p, q in zip(self.pieces, o.pieces)])
        c = rat(other)
        return PW(self.breaks, [tuple(c * x for x in p) for p in self.pieces])

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, PW):
            return self.breaks == other.breaks and self.pieces == other.pieces
        return self == PW.const(self.breaks, other)

    def __hash__(self):
        return hash((self.breaks, self.pieces))

    def __bool__(self):
        return any(self.pieces)

    def __repr__(self):
        return f"PW({[str(b) for b in self.breaks]}, {[[str(c) for c in p] for p in self.pieces]})"

    def deriv(self) -> "PW":
        return PW(self.breaks, [_pderiv(p) for p in self.pieces])

    def piece_index(self, t) -> int:
        t = rat(t)
        if not self.breaks[0] <= t <= self.breaks[-1]:
            raise OutOfDomain(f"t = {t} outside [{self.breaks[0]}, {self.breaks[-1]}]")
        for j in range(len(self.pieces)):
            if t <= self.breaks[j + 1]:
                return j
        return len(self.pieces) - 1

    def __call__(self, t) -> Fraction:
        return _peval(self.pieces[self.piece_index(t)], rat(t))

    def integral_from(self, anchor) -> "PW":
        """F(t) = int_anchor^t f(s) ds, exact and continuous."""
        anchor = rat(anchor)
        prims = [_pinteg(p) for p in self.pieces]
        # make continuous starting from the left
        shifted = []
        offset = ZERO
        for j, P in enumerate(prims):
            a = self.breaks[j]
            c = offset - _peval(P, a)
            Q = _padd(P, (c,))
            shifted.append(Q)
            offset = _peval(Q, self.breaks[j + 1])
        F = PW(self.breaks, shifted)
        base = F(anchor)
        return F - base

    def is_continuous(self) -> bool:
        return all(_peval(p, b) == _peval(q, b)
                   for p, q, b in zip(self.pieces, self.pieces[1:], self.breaks[1:-1]))


def _iszero(c) -> bool:
    return not c


# ---------------------------------------------------------------- DGA model

@dataclass(frozen=True)
class DGA:
    """Cochain complex plus a graded-commutative product ``(i, j) -> {k: c}``."""
    complex: CochainComplex
    product: Mapping

    @property
    def space(self) -> GradedSpace:
        return self.complex.space


def sphere_dga(n: int) -> DGA:
    V = GradedSpace((("1", 0), ("w", n)))
    return DGA(CochainComplex(V), {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}})


def interval_dga() -> DGA:
    """1, u in degree 0 and v = du in degree 1, with u^2 = uv = v^2 = 0."""
    V = GradedSpace((("1", 0), ("u", 0), ("v", 1)))
    d0 = GradedMap(V, V, 1, {(2, 1): 1})
    prod = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (0, 2): {2: 1}, (2, 0): {2: 1}}
    return DGA(CochainComplex(V, d0), prod)


def pair_dga() -> DGA:
    """u in degree 0, v = du in degree 1, zero product."""
    V = GradedSpace((("u", 0), ("v", 1)))
    return DGA(CochainComplex(V, GradedMap(V, V, 1, {(1, 0): 1})), {})


def point_dga() -> DGA:
    V = GradedSpace((("1", 0),))
    return DGA(CochainComplex(V), {(0, 0): {0: 1}})


# ---------------------------------------------------------------- operations

def _add_into(acc: dict, out, c):
    if _iszero(c):
        return
    v = acc.get(out)
    v = c if v is None else v + c
    if _iszero(v):
        acc.pop(out, None)
    else:
        acc[out] = v


def clean_op(op: Mapping) -> dict:
    out = {}
    for inp, row in op.items():
        r = {o: c for o, c in row.items() if not _iszero(c)}
        if r:
            out[tuple(inp)] = r
    return out


def op_degree_ok(space: GradedSpace, op: Mapping, k: int, shift: int) -> bool:
    for inp, row in op.items():
        if len(inp) != k:
            return False
        want = sum(space.degree(i) for i in inp) - k + shift + 1
        if any(space.degree(o) != want for o in row):
            return False
    return True


def beta0_ops(dga: DGA, n: int) -> dict:
    V = dga.space
    m1 = {}
    for (j, i), v in dga.complex.d0.entries.items():
        s = -1 if (n + 1 + V.degree(i)) % 2 else 1
        m1.setdefault((i,), {})[j] = s * v
    m2 = {}
    for (i, j), row in dga.product.items():
        s = -1 if (V.degree(i) * (V.degree(j) + 1)) % 2 else 1
        m2[(i, j)] = {k: s * rat(c) for k, c in row.items() if c}
    return {(1, BETA0): clean_op(m1), (2, BETA0): clean_op(m2)}


def _norm_beta(b):
    return (rat(b[0]), int(b[1]))


class AinfOperations:
    def __init__(self, dga: DGA, n: int, monoid: DiscreteSubmonoid, E0, e0, ops: Mapping | None = None):
        self.dga, self.n, self.monoid = dga, int(n), monoid
        self.E0, self.e0 = rat(E0), rat(e0)
        allowed = set(gk_set(monoid, self.E0, self.e0))
        table = beta0_ops(dga, self.n)
        for (k, b), op in (ops or {}).items():
            b = _norm_beta(b)
            op = clean_op(op)
            if b == BETA0:
                if k in (1, 2) and op != table[(k, BETA0)] and op:
                    raise ValueError(f"energy-zero operation m_{k} must be the signed DGA structure")
                if k not in (1, 2) and op:
                    raise ValueError(f"m_{k} at energy zero must vanish")
                continue
            if not op:
                continue
            if (b, k) not in allowed:
                raise ValueError(f"operation ({k}, {b}) outside the energy window")
            if 0 < b[0] < self.e0:
                raise ValueError("operations below e0 must vanish")
            if not op_degree_ok(dga.space, op, k, 1 - b[1]):
                raise ValueError(f"operation ({k}, {b}) has the wrong degree")
            table[(k, b)] = op
        self.table = {key: op for key, op in table.items() if op}

    @property
    def space(self):
        return self.dga.space

    def keys(self):
        return [(k, b) for (b, k) in gk_set(self.monoid, self.E0, self.e0)]

    def __eq__(self, other):
        return (isinstance(other, AinfOperations) and self.dga == other.dga and self.n == other.n
                and self.monoid == other.monoid and self.E0 == other.E0 and self.e0 == other.e0
                and self.table == other.table)

    def __repr__(self):
        return f"AinfOperations(E0={self.E0}, ops={sorted(self.table, key=str)})"


def energy_cut_ainf(A: AinfOperations, E) -> AinfOperations:
    E = rat(E)
    if E > A.E0:
        raise ValueError("cannot raise the cut level")
    keep = {(k, b): op for (k, b), op in A.table.items() if b[0] + k * A.e0 <= E}
    return AinfOperations(A.dga, A.n, A.monoid, E, A.e0, keep)


# ---------------------------------------------------------------- relations

def _shifted(space, idx):
    return space.degree(idx) - 1


def _compose_terms(space, outer: dict, inner: dict, k1: int, k2: int, inner_sign: bool, k: int):
    """sum_i (+-) outer(x_1..x_{i-1}, inner(x_i..), ..) on every basis k-tuple."""
    dim = space.dim
    result: dict = {}
    for i in range(1, k1 + 1):
        for xs in iproduct(range(dim), repeat=k):
            pre, mid, post = xs[:i - 1], xs[i - 1:i - 1 + k2], xs[i - 1 + k2:]
            row_in = inner.get(mid)
            if not row_in:
                continue
            sgn = 1
            if inner_sign and sum(_shifted(space, x) for x in pre) % 2:
                sgn = -1
            for o, c in row_in.items():
                row_out = outer.get(pre + (o,) + post)
                if not row_out:
                    continue
                for oo, cc in row_out.items():
                    acc = result.setdefault(xs, {})
                    _add_into(acc, oo, c * cc * sgn)
    return {x: r for x, r in result.items() if r}


def _splits(table_a, table_b, k, beta):
    for (k1, b1), A in table_a.items():
        k2 = k + 1 - k1
        if k2 < 0 or k1 < 1:
            continue
        b2 = beta_sub(beta, b1)
        B = table_b.get((k2, b2))
        if B:
            yield k1, k2, A, B


def _defect_from_table(space, table, k, beta) -> dict:
    total: dict = {}
    for k1, k2, A, B in _splits(table, table, k, beta):
        for x, row in _compose_terms(space, A, B, k1, k2, True, k).items():
            acc = total.setdefault(x, {})
            for o, c in row.items():
                _add_into(acc, o, c)
    return {x: r for x, r in total.items() if r}


def ainf_defect(A: AinfOperations, k: int, beta) -> dict:
    return _defect_from_table(A.space, A.table, k, _norm_beta(beta))


def check_partial_ainf(A: AinfOperations) -> Report:
    rep = Report("A-infinity relation defect")
    for k, b in A.keys():
        d = ainf_defect(A, k, b)
        if d:
            rep.failures.append(((k, b), d))
    return rep


# ---------------------------------------------------------------- pseudo-isotopies

def _const_family(op: dict, breaks) -> dict:
    return {x: {o: PW.const(breaks, c) for o, c in row.items()} for x, row in op.items()}


def _eval_family(op: dict, t) -> dict:
    out = {}
    for x, row in op.items():
        r = {o: c(t) if isinstance(c, PW) else c for o, c in row.items()}
        r = {o: c for o, c in r.items() if c}
        if r:
            out[x] = r
    return out


def _deriv_family(op: dict) -> dict:
    return clean_op({x: {o: c.deriv() for o, c in row.items()} for x, row in op.items()})


class PseudoIsotopy:
    """Families m^t (shifted degree 1 - mu) and c^t (shifted degree -mu) on shared breakpoints."""

    def __init__(self, dga: DGA, n: int, monoid: DiscreteSubmonoid, E0, e0, breaks,
                 m: Mapping, c: Mapping | None = None):
        self.dga, self.n, self.monoid = dga, int(n), monoid
        self.E0, self.e0 = rat(E0), rat(e0)
        self.breaks = tuple(rat(b) for b in breaks)
        allowed = set(gk_set(monoid, self.E0, self.e0))
        base = {key: _const_family(op, self.breaks) for key, op in beta0_ops(dga, self.n).items()}
        self.m = dict(base)
        for (k, b), op in m.items():
            b = _norm_beta(b)
            op = clean_op({x: {o: self._pw(v) for o, v in row.items()} for x, row in op.items()})
            if b == BETA0:
                continue
            if (b, k) not in allowed:
                raise ValueError(f"m family ({k}, {b}) outside the energy window")
            if op:
                if not op_degree_ok(dga.space, op, k, 1 - b[1]):
                    raise ValueError(f"m family ({k}, {b}) has the wrong degree")
                self.m[(k, b)] = op
        self.c = {}
        for (k, b), op in (c or {}).items():
            b = _norm_beta(b)
            op = clean_op({x: {o: self._pw(v) for o, v in row.items()} for x, row in op.items()})
            if not op:
                continue
            if (b, k) not in allowed:
                raise ValueError(f"c family ({k}, {b}) outside the energy window")
            if not op_degree_ok(dga.space, op, k, -b[1]):
                raise ValueError(f"c family ({k}, {b}) has the wrong degree")
            self.c[(k, b)] = op

    def _pw(self, v):
        if isinstance(v, PW):
            if v.breaks != self.breaks:
                raise ValueError("family uses foreign breakpoints")
            return v
        return PW.const(self.breaks, v)

    @property
    def space(self):
        return self.dga.space

    def keys(self):
        return [(k, b) for (b, k) in gk_set(self.monoid, self.E0, self.e0)]

    def __eq__(self, other):
        return (isinstance(other, PseudoIsotopy) and self.breaks == other.breaks and self.E0 == other.E0
                and self.m == other.m and self.c == other.c and self.dga == other.dga and self.n == other.n)


def constant_isotopy(A: AinfOperations, breaks=(0, 1)) -> PseudoIsotopy:
    return PseudoIsotopy(A.dga, A.n, A.monoid, A.E0, A.e0, breaks,
                         {key: op for key, op in A.table.items()})


def _isotopy_rhs(space, m, c, k, beta) -> dict:
    """sum (-1)^* c(..m..) - sum m(..c..)."""
    total: dict = {}
    for k1, k2, C, M in _splits(c, m, k, beta):
        for x, row in _compose_terms(space, C, M, k1, k2, True, k).items():
            acc = total.setdefault(x, {})
            for o, v in row.items():
                _add_into(acc, o, v)
    for k1, k2, M, C in _splits(m, c, k, beta):
        for x, row in _compose_terms(space, M, C, k1, k2, False, k).items():
            acc = total.setdefault(x, {})
            for o, v in row.items():
                _add_into(acc, o, -v)
    return {x: r for x, r in total.items() if r}


def isotopy_defect(I: PseudoIsotopy, k: int, beta) -> dict:
    beta = _norm_beta(beta)
    total = _isotopy_rhs(I.space, I.m, I.c, k, beta)
    for x, row in _deriv_family(I.m.get((k, beta), {})).items():
        acc = total.setdefault(x, {})
        for o, v in row.items():
            _add_into(acc, o, v)
    return {x: r for x, r in total.items() if r}


def restrict_endpoint(I: PseudoIsotopy, t) -> AinfOperations:
    t = rat(t)
    if not I.breaks[0] <= t <= I.breaks[-1]:
        raise OutOfDomain(f"t = {t} outside [{I.breaks[0]}, {I.breaks[-1]}]")
    ops = {key: _eval_family(op, t) for key, op in I.m.items() if key[1] != BETA0}
    return AinfOperations(I.dga, I.n, I.monoid, I.E0, I.e0, ops)


def energy_cut_isotopy(I: PseudoIsotopy, E) -> PseudoIsotopy:
    E = rat(E)
    keep = lambda tab: {(k, b): op for (k, b), op in tab.items() if b[0] + k * I.e0 <= E}
    return PseudoIsotopy(I.dga, I.n, I.monoid, E, I.e0, I.breaks, keep(I.m), keep(I.c))


def sample_points(breaks) -> list:
    pts = list(breaks)
    pts += [(a + b) / 2 for a, b in zip(breaks, breaks[1:])]
    return sorted(set(pts))


def check_pseudoisotopy(I: PseudoIsotopy) -> Report:
    rep = Report("pseudo-isotopy conditions")
    for key, tab in (("m", I.m), ("c", I.c)):
        for kb, op in tab.items():
            for row in op.values():
                if not all(v.is_continuous() for v in row.values()):
                    rep.failures.append(("continuity", key, kb))
                    break
    for k, b in I.keys():
        d = _defect_from_table(I.space, I.m, k, b)
        if d:
            bad = [t for t in sample_points(I.breaks)
                   if any(v(t) for row in d.values() for v in row.values())]
            rep.failures.append(("A-infinity relation at fixed t", (k, b), bad))
    for k, b in I.keys():
        if isotopy_defect(I, k, b):
            rep.failures.append(("isotopy equation", (k, b)))
    for (k, b), op in I.c.items():
        if b[0] <= 0 and op:
            rep.failures.append(("c must vanish at zero energy", (k, b)))
    return rep


def collared_check(I: PseudoIsotopy, tau) -> bool:
    tau = rat(tau)
    lo, hi = -tau, 1 + tau
    if I.breaks[0] > lo or I.breaks[-1] < hi or 0 not in I.breaks or 1 not in I.breaks:
        return False
    collar = [j for j in range(len(I.breaks) - 1)
              if I.breaks[j + 1] <= 0 or I.breaks[j] >= 1]
    for op in I.c.values():
        for row in op.values():
            for v in row.values():
                if any(v.pieces[j] for j in collar):
                    return False
    for op in I.m.values():
        for row in op.values():
            for v in row.values():
                dv = v.deriv()
                if any(dv.pieces[j] for j in collar):
                    return False
    return True


def integrate_isotopy(m1: AinfOperations, c: Mapping, breaks=(0, 1), start=None) -> PseudoIsotopy:
    """Solve the isotopy equation backward from m^1 = m1 with the given c.

    ``start`` optionally supplies already-known m families (for keys it
    contains, integration is skipped)."""
    breaks = tuple(rat(b) for b in breaks)
    known = {key: op for key, op in (start or {}).items()}
    for key, op in beta0_ops(m1.dga, m1.n).items():
        known.setdefault(key, _const_family(op, breaks))
    cfam = {}
    for (k, b), op in c.items():
        b = _norm_beta(b)
        cfam[(k, b)] = clean_op({x: {o: v if isinstance(v, PW) else PW.const(breaks, v)
                                     for o, v in row.items()} for x, row in op.items()})
    order = sorted(m1.keys(), key=lambda kb: (kb[1][0] + kb[0] * m1.e0, kb[1][0], kb[0], kb[1][1]))
    for k, b in order:
        if (k, b) in known:
            continue
        rhs = _isotopy_rhs(m1.space, known, cfam, k, b)
        final = m1.table.get((k, b), {})
        fam: dict = {}
        xs = set(rhs) | set(final)
        for x in xs:
            outs = set(rhs.get(x, {})) | set(final.get(x, {}))
            for o in outs:
                r = rhs.get(x, {}).get(o)
                # dm/dt = -rhs, so m(t) = m(1) + int_t^1 rhs = m(1) - int_1^t rhs
                v = PW.const(breaks, final.get(x, {}).get(o, 0))
                if r is not None:
                    v = v - r.integral_from(1)
                if v:
                    fam.setdefault(x, {})[o] = v
        if fam:
            known[(k, b)] = fam
    return PseudoIsotopy(m1.dga, m1.n, m1.monoid, m1.E0, m1.e0, breaks,
                         {kb: op for kb, op in known.items() if kb[1] != BETA0}, cfam)


def promote_via_isotopy(m0: AinfOperations, m1: AinfOperations, I: PseudoIsotopy):
    """Extend I and m0 from cut(m0) to cut(m1) with c = 0 on the new keys."""
    fails = []
    E0, E1 = m0.E0, m1.E0
    if E1 < E0:
        fails.append("m1 must have the higher cut")
    if I.E0 != E0 or m0.e0 != m1.e0 or I.e0 != m0.e0:
        fails.append("isotopy cut and e0 must match m0")
    if not fails:
        if not check_pseudoisotopy(I).ok:
            fails.append("input isotopy fails its conditions")
        if restrict_endpoint(I, 0) != m0:
            fails.append("isotopy does not start at m0")
        if restrict_endpoint(I, 1) != energy_cut_ainf(m1, E0):
            fails.append("isotopy does not end at the cut of m1")
        if not check_partial_ainf(m1).ok:
            fails.append("m1 fails the A-infinity relations")
    if fails:
        raise PreconditionFailed(fails)
    if E0 == E1:
        return m0, I
    Ip = integrate_isotopy(m1, I.c, I.breaks, start=I.m)
    return restrict_endpoint(Ip, 0), Ip


@dataclass
class AinfLimitResult:
    structure: AinfOperations
    certificates: list
    stages: list


def homotopy_limit_ainf(tower: list, isotopies: list, final=None) -> AinfLimitResult:
    """tower[j] at cut E^j; isotopies[j] runs from tower[j] to cut(tower[j+1], E^j)."""
    N = len(tower) if final is None else final
    if len(isotopies) < N - 1:
        raise PreconditionFailed(["need one isotopy per consecutive pair"])
    stages = list(tower[:N])
    isos = list(isotopies[:N - 1])
    certs = []
    for r in range(1, N):
        for j in range(r - 1, -1, -1):
            old = stages[j]
            new, Inew = promote_via_isotopy(old, stages[j + 1], isos[j])
            certs.append((r, j, old.E0, energy_cut_ainf(new, old.E0) == old))
            stages[j], isos[j] = new, Inew
    return AinfLimitResult(stages[0], certs, stages)


# ---------------------------------------------------------------- sign audit

def _gen_degree(k, beta):
    return beta[1] + k - 2


def bar_sign_audit(dimL: int, kmax: int, monoid: DiscreteSubmonoid | None = None, Emax=2,
                   drop_k1: bool = False) -> Report:
    """Check that the boundary signs square to zero on the free operad of strata.

    Generators M(k, beta) have degree mu(beta) + k - 2 (dimension minus
    dim L).  The geometric fiber product over ev_i differs from operadic
    o_i by the parity (i - 1)(mu(beta2) + k2)(dimL + 1).
    """
    from .trees import boundary_epsilon
    if kmax > 6:
        raise ValueError("kmax must be at most 6")
    G = monoid if monoid is not None else DiscreteSubmonoid(((1, 0), (1, 2)))
    elems = monoid_below(G, Emax)
    members = set(elems)
    stable = lambda k, b: k >= 0 and (b[0] > 0 or k >= 2)
    gens = [(k, b) for b in elems for k in range(0, kmax + 1) if stable(k, b)]

    def boundary(k, b):
        out = []
        for b1 in elems:
            b2 = beta_sub(b, b1)
            if b2 not in members:
                continue
            for k1 in range(1, k + 1):
                k2 = k + 1 - k1
                if not (stable(k1, b1) and stable(k2, b2)):
                    continue
                for i in range(1, k1 + 1):
                    e = boundary_epsilon(k1, k2, i, dimL, b2[1], drop_k1)
                    e += (i - 1) * (b2[1] + k2) * (dimL + 1)
                    out.append((-1 if e % 2 else 1, (k1, b1), i, (k2, b2)))
        return out

    rep = Report("boundary sign coherence")
    checked = 0
    for g in gens:
        terms: dict = {}
        for s, A, i, B in boundary(*g):
            dA = _gen_degree(*A)
            # d(A o_i B) = dA o_i B + (-1)^|A| A o_i dB
            for s2, P, j, Q in boundary(*A):
                kQ = Q[0]
                if j <= i <= j + kQ - 1:
                    key, sg = ("n", P, j, Q, i - j + 1, B), 1
                elif i < j:
                    key, sg = ("p", P, i, B, j, Q), 1
                else:
                    ii = i - kQ + 1
                    sg = -1 if (_gen_degree(*Q) * _gen_degree(*B)) % 2 else 1
                    key = ("p", P, j, Q, ii, B)
                terms.setdefault(key, []).append(s * s2 * sg)
            for s2, P, j, Q in boundary(*B):
                sg = -1 if dA % 2 else 1
                key = ("n", A, i, P, j, Q)
                terms.setdefault(key, []).append(s * s2 * sg)
        for key, signs in terms.items():
            checked += 1
            if len(signs) != 2 or sum(signs) != 0:
                rep.failures.append((g, key, signs))
    rep.info = {"generators": len(gens), "double_terms": checked, "dimL": dimL, "kmax": kmax}
    return rep
