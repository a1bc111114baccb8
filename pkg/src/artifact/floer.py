"""Partial Floer cochain complexes over an energy filtration.

Every structure here is a table of blocks indexed by pairs of critical
labels.  A block from label ``a`` to label ``b`` carries the implicit
Novikov weight ``T^(E(b)-E(a)) e^((mu(b)-mu(a))/2)``.  Those weights
multiply consistently, so block composition over Q reproduces composition
over the Novikov ring, and reduction mod ``T^E`` is a filter on the energy
gap.

All relations are instances of the Hom-complex differential

    D(X) = d_tgt X - (-1)^|X| X d_src

where ``|X|`` is the Floer degree: 1 for a differential, 0 for a cochain
map, -1 for a homotopy, -2 for a homotopy between homotopies.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .errors import CutRaiseError, PreconditionFailed, PromotionObstructed, SpaceMismatch, DegreeError
from .gradecx import CochainComplex, GradedMap, GradedSpace, compose, solve_linear
from .novikov import NovikovElement, DiscreteSubmonoid, rat
from .report import Report

ZERO = Fraction(0)


# ---------------------------------------------------------------- critical data

@dataclass(frozen=True)
class Label:
    id: str
    E: Fraction
    mu: int
    dimR: int
    complex: CochainComplex

    def __post_init__(self):
        object.__setattr__(self, "E", rat(self.E))
        if self.dimR < 0:
            raise ValueError("dimR must be non-negative")
        for _, d in self.complex.space.basis:
            if not 0 <= d <= self.dimR:
                raise DegreeError(f"label {self.id}: basis degree {d} outside [0, {self.dimR}]")

    @property
    def space(self) -> GradedSpace:
        return self.complex.space


class CriticalData:
    __slots__ = ("labels", "_by_id")

    def __init__(self, labels: Iterable[Label]):
        self.labels = tuple(labels)
        self._by_id = {l.id: l for l in self.labels}
        if len(self._by_id) != len(self.labels):
            raise ValueError("labels must be unique")

    def __getitem__(self, key) -> Label:
        return self._by_id[key]

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)

    @property
    def ids(self) -> list[str]:
        return [l.id for l in self.labels]

    def __eq__(self, other):
        return isinstance(other, CriticalData) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"CriticalData({self.ids})"


# ---------------------------------------------------------------- block operators

class BlockOp:
    """Blocks ``(a, b) -> GradedMap`` from label a of ``src`` to label b of ``tgt``."""

    __slots__ = ("src", "tgt", "fdeg", "blocks")

    def __init__(self, src: CriticalData, tgt: CriticalData, fdeg: int, blocks: Mapping | None = None):
        self.src, self.tgt, self.fdeg = src, tgt, int(fdeg)
        self.blocks = {}
        for (a, b), f in (blocks or {}).items():
            if f is None or f.is_zero():
                continue
            la, lb = src[a], tgt[b]
            if f.source != la.space or f.target != lb.space:
                raise SpaceMismatch(f"block ({a},{b}) has the wrong source or target space")
            if f.degree != self.rdeg(a, b):
                raise DegreeError(f"block ({a},{b}) has degree {f.degree}, expected {self.rdeg(a, b)}")
            self.blocks[(a, b)] = f

    def rdeg(self, a, b) -> int:
        return self.fdeg + self.src[a].mu - self.tgt[b].mu

    def gap(self, a, b) -> Fraction:
        return self.tgt[b].E - self.src[a].E

    def get(self, a, b):
        return self.blocks.get((a, b))

    def zero_block(self, a, b) -> GradedMap:
        return GradedMap.zero(self.src[a].space, self.tgt[b].space, self.rdeg(a, b))

    def pairs(self):
        return [(a.id, b.id) for a in self.src for b in self.tgt]


def _chain_at(ops, a, b):
    """(ops[0] o ops[1] o ... )_(a, b), or None when no term contributes."""
    if len(ops) == 1:
        return ops[0].get(a, b)
    head, rest = ops[0], ops[1:]
    total = None
    for m in head.src.ids:
        f = head.get(m, b)
        if f is None:
            continue
        g = _chain_at(rest, a, m)
        if g is None:
            continue
        t = compose(f, g)
        total = t if total is None else total + t
    return total


def _eval_terms(terms, a, b, fdeg=0):
    total = None
    for coef, ops in terms:
        if coef == 0:
            continue
        t = _chain_at(ops, a, b)
        if t is None or t.is_zero():
            continue
        t = t.scale(coef)
        total = t if total is None else total + t
    if total is None:
        src, tgt = terms[0][1][-1].src, terms[0][1][0].tgt
        deg = fdeg + src[a].mu - tgt[b].mu
        total = GradedMap.zero(src[a].space, tgt[b].space, deg)
    return total


def signed_d0(label: Label) -> GradedMap:
    """d0 with the column sign (-1)^(dimR + mu + 1 + deg)."""
    d0 = label.complex.d0
    sp = label.space
    base = label.dimR + label.mu + 1
    return GradedMap(sp, sp, 1, {(j, i): v if (base + sp.degree(i)) % 2 == 0 else -v
                                 for (j, i), v in d0.entries.items()})


# ---------------------------------------------------------------- partial structures

def _check_range(name, op: BlockOp, lo, hi):
    for (a, b) in op.blocks:
        g = op.gap(a, b)
        if not lo <= g <= hi:
            raise ValueError(f"{name} entry ({a},{b}) has gap {g} outside [{lo}, {hi}]")


class PartialComplex:
    """Maps ``(a_minus, a_plus) -> m_{1; a_plus, a_minus}`` for 0 < gap <= cut."""

    def __init__(self, critical: CriticalData, cut, maps: Mapping | None = None):
        self.critical = critical
        self.cut = rat(cut)
        if self.cut < 0:
            raise ValueError("cut must be non-negative")
        op = BlockOp(critical, critical, 1, maps or {})
        for (a, b) in op.blocks:
            g = op.gap(a, b)
            if not 0 < g <= self.cut:
                raise ValueError(f"map ({a},{b}) has gap {g}, allowed range is (0, {self.cut}]")
        self.maps = op.blocks
        self._op = op

    def dhat(self) -> BlockOp:
        blocks = dict(self.maps)
        for l in self.critical:
            blocks[(l.id, l.id)] = signed_d0(l)
        return BlockOp(self.critical, self.critical, 1, blocks)

    def __eq__(self, other):
        return (isinstance(other, PartialComplex) and self.critical == other.critical
                and self.cut == other.cut and self.maps == other.maps)

    def __repr__(self):
        return f"PartialComplex(cut={self.cut}, maps={sorted(self.maps)})"


class PartialOperator:
    """Common base: blocks between two critical data with a cut level and a loss."""

    fdeg = 0
    kind = "operator"

    def __init__(self, src: CriticalData, tgt: CriticalData, cut, loss, entries: Mapping | None, fdeg=None):
        if fdeg is not None:
            self.fdeg = int(fdeg)
        self.cut, self.loss = rat(cut), rat(loss)
        if self.loss < 0:
            raise ValueError("loss must be non-negative")
        op = BlockOp(src, tgt, self.fdeg, entries or {})
        _check_range(self.kind, op, -self.loss, self.cut - self.loss)
        self.src, self.tgt = src, tgt
        self.entries = op.blocks
        self.op = op

    def level(self, a, b):
        return self.op.gap(a, b) + self.loss

    def _fields_eq(self, other):
        return (type(self) is type(other) and self.src == other.src and self.tgt == other.tgt
                and self.cut == other.cut and self.loss == other.loss and self.entries == other.entries)

    def __eq__(self, other):
        return self._fields_eq(other)

    def __repr__(self):
        return f"{type(self).__name__}(cut={self.cut}, loss={self.loss}, entries={sorted(self.entries)})"


class PartialMap(PartialOperator):
    """Cochain map entries ``(a1, a2) -> psi_{a2, a1}`` for -loss <= gap <= cut - loss."""

    fdeg = 0
    kind = "map"

    def __init__(self, source: PartialComplex, target: PartialComplex, cut, loss=0, entries=None):
        super().__init__(source.critical, target.critical, cut, loss, entries)
        self.source, self.target = source, target

    @classmethod
    def identity(cls, X: PartialComplex, cut=None):
        cut = X.cut if cut is None else cut
        return cls(X, X, cut, 0, {(l.id, l.id): GradedMap.identity(l.space) for l in X.critical})



class PartialHomotopy(PartialOperator):
    """Homotopy from ``psi1`` to ``psi2``: D h = psi2 - psi1."""

    fdeg = -1
    kind = "homotopy"

    def __init__(self, psi1: PartialMap, psi2: PartialMap, cut=None, loss=None, entries=None):
        cut = psi1.cut if cut is None else cut
        loss = psi1.loss if loss is None else loss
        if psi1.source != psi2.source or psi1.target != psi2.target:
            raise SpaceMismatch("homotopy endpoints must share source and target")
        super().__init__(psi1.src, psi1.tgt, cut, loss, entries)
        self.psi1, self.psi2 = psi1, psi2



def operator(src, tgt, cut, loss, entries, fdeg) -> PartialOperator:
    return PartialOperator(src, tgt, cut, loss, entries, fdeg=fdeg)


# ---------------------------------------------------------------- assembly / cut

def assemble_differential(X: PartialComplex) -> dict:
    """Novikov-valued blocks ``(a_minus, a_plus) -> matrix of NovikovElement``."""
    out = {}
    D = X.dhat()
    for (a, b), f in sorted(D.blocks.items()):
        la, lb = X.critical[a], X.critical[b]
        gap, dmu = lb.E - la.E, lb.mu - la.mu
        rows = f.dense()
        out[(a, b)] = [[NovikovElement.monomial(v, gap, dmu) if v else NovikovElement() for v in row]
                       for row in rows]
    return out


def energy_cut(X, E):
    E = rat(E)
    if E > X.cut:
        raise CutRaiseError(f"cannot raise cut from {X.cut} to {E}")
    if isinstance(X, PartialComplex):
        return PartialComplex(X.critical, E, {k: f for k, f in X.maps.items()
                                              if X._op.gap(*k) <= E})
    keep = {k: f for k, f in X.entries.items() if X.op.gap(*k) <= E - X.loss}
    if isinstance(X, PartialMap):
        return PartialMap(X.source, X.target, E, X.loss, keep)
    if isinstance(X, PartialHomotopy):
        return PartialHomotopy(X.psi1, X.psi2, E, X.loss, keep)
    return PartialOperator(X.src, X.tgt, E, X.loss, keep, fdeg=X.fdeg)


# ---------------------------------------------------------------- relations

def _relation_report(anchor, terms, src, tgt, fdeg_out, lo, hi) -> Report:
    rep = Report(anchor)
    for a in src.ids:
        for b in tgt.ids:
            g = tgt[b].E - src[a].E
            if not lo <= g <= hi:
                continue
            r = _eval_terms(terms, a, b, fdeg=fdeg_out)
            if not r.is_zero():
                rep.failures.append(((a, b), r))
    return rep


def partial_complex_terms(X: PartialComplex):
    D = X.dhat()
    return [(1, [D, D])]


def check_partial_complex(X: PartialComplex) -> Report:
    """d-hat o d-hat vanishes for every pair with gap <= cut."""
    return _relation_report("partial complex relation (d o d = 0)", partial_complex_terms(X),
                            X.critical, X.critical, 2, 0, X.cut)


def cochain_map_terms(psi: PartialMap, D1=None, D2=None):
    D1 = psi.source.dhat() if D1 is None else D1
    D2 = psi.target.dhat() if D2 is None else D2
    return [(1, [D2, psi.op]), (-1, [psi.op, D1])]


def check_cochain_map(psi: PartialMap) -> Report:
    return _relation_report("cochain map relation (d psi - psi d = 0)", cochain_map_terms(psi),
                            psi.src, psi.tgt, 1, -psi.loss, psi.cut - psi.loss)


def homotopy_terms(h: PartialHomotopy, D1=None, D2=None):
    D1 = h.psi1.source.dhat() if D1 is None else D1
    D2 = h.psi1.target.dhat() if D2 is None else D2
    return [(1, [D2, h.op]), (1, [h.op, D1]), (-1, [h.psi2.op]), (1, [h.psi1.op])]


def check_homotopy(h: PartialHomotopy) -> Report:
    return _relation_report("cochain homotopy relation (d h + h d = psi2 - psi1)", homotopy_terms(h),
                            h.src, h.tgt, 0, -h.loss, h.cut - h.loss)


def square_terms(D1, D2p, h, psi2, psi21, psi21p, psi1):
    return [(1, [D2p, h]), (1, [h, D1]), (-1, [psi2, psi21]), (1, [psi21p, psi1])]


def check_square_homotopy(F1, F2p, h: PartialOperator, psi2, psi21, psi21p, psi1) -> Report:
    """d' h + h d = psi2 psi21 - psi21' psi1 on gaps <= cut(h) - loss."""
    terms = square_terms(F1.dhat(), F2p.dhat(), h.op, psi2.op, psi21.op, psi21p.op, psi1.op)
    return _relation_report("homotopy-commutative square relation", terms, F1.critical, F2p.critical,
                            0, -h.loss, h.cut - h.loss)


def tower_terms(D1i, D2ip1, H, h_a, h_b, h_ab_ip1, h_ab_i, psi1, psi2):
    return [(1, [D2ip1, H]), (-1, [H, D1i]), (-1, [h_b]), (1, [h_a]),
            (-1, [h_ab_ip1, psi1]), (1, [psi2, h_ab_i])]


# ---------------------------------------------------------------- composition

def compose_maps(psi21: PartialMap, psi32: PartialMap) -> PartialMap:
    """psi32 o psi21; losses add, cut is the smaller of the two cuts."""
    if psi21.target != psi32.source:
        raise SpaceMismatch("psi21.target != psi32.source")
    loss = psi21.loss + psi32.loss
    cut = min(psi21.cut, psi32.cut)
    entries = {}
    src, tgt = psi21.src, psi32.tgt
    for a in src.ids:
        for b in tgt.ids:
            g = tgt[b].E - src[a].E
            if -loss <= g <= cut - loss:
                f = _chain_at([psi32.op, psi21.op], a, b)
                if f is not None and not f.is_zero():
                    entries[(a, b)] = f
    return PartialMap(psi21.source, psi32.target, cut, loss, entries)


# ---------------------------------------------------------------- level solver

@dataclass
class Unknown:
    name: str
    a: str
    b: str
    level: Fraction


def _slots(op: BlockOp, a, b):
    la, lb = op.src[a], op.tgt[b]
    deg = op.rdeg(a, b)
    return [(j, i) for i in range(la.space.dim) for j in range(lb.space.dim)
            if lb.space.degree(j) == la.space.degree(i) + deg]


@dataclass
class Relation:
    anchor: str
    terms: Callable  # state -> terms list
    src: CriticalData
    tgt: CriticalData
    fdeg_out: int
    loss: Fraction  # level of pair (a, b) = gap + loss


def _solve_levels(state: dict, unknowns: list, relations: list, lo, hi, minimal=None):
    """Fill the unknown blocks level by level on (lo, hi].

    ``state`` maps names to mutable BlockOps.  ``minimal(state, level, pairs)``
    may propose a solution first; it is kept only if every relation at the
    level vanishes.
    """
    levels = set(u.level for u in unknowns)
    for rel in relations:
        for a in rel.src.ids:
            for b in rel.tgt.ids:
                L = rel.tgt[b].E - rel.src[a].E + rel.loss
                if lo < L <= hi:
                    levels.add(L)
    for L in sorted(levels):
        if not lo < L <= hi:
            continue
        us = [u for u in unknowns if u.level == L]
        rel_pairs = [(rel, a, b) for rel in relations for a in rel.src.ids for b in rel.tgt.ids
                     if rel.tgt[b].E - rel.src[a].E + rel.loss == L]

        def residual():
            vec = []
            for rel, a, b in rel_pairs:
                r = _eval_terms(rel.terms(state), a, b, fdeg=rel.fdeg_out)
                dense = r.dense()
                vec.extend(v for row in dense for v in row)
            return vec

        if minimal is not None and us:
            saved = {(u.name, u.a, u.b): state[u.name].blocks.get((u.a, u.b)) for u in us}
            minimal(state, L, us)
            if not any(residual()):
                continue
            for (n, a, b), f in saved.items():
                if f is None:
                    state[n].blocks.pop((a, b), None)
                else:
                    state[n].blocks[(a, b)] = f

        slots = [(u, s) for u in us for s in _slots(state[u.name], u.a, u.b)]
        for u in us:
            state[u.name].blocks.pop((u.a, u.b), None)
        r0 = residual()
        cols = []
        for u, (j, i) in slots:
            op = state[u.name]
            la, lb = op.src[u.a], op.tgt[u.b]
            op.blocks[(u.a, u.b)] = GradedMap(la.space, lb.space, op.rdeg(u.a, u.b), {(j, i): 1})
            r = residual()
            del op.blocks[(u.a, u.b)]
            cols.append([x - y for x, y in zip(r, r0)])
        A = [[cols[c][r] for c in range(len(cols))] for r in range(len(r0))]
        sol = solve_linear(A, [-v for v in r0], ncols=len(cols))
        if not sol.ok:
            raise PromotionObstructed(f"obstruction at level {L} is not a coboundary",
                                      certificate={"level": L, "functional": sol.certificate,
                                                   "pairs": [(rel.anchor, a, b) for rel, a, b in rel_pairs]})
        acc: dict = {}
        for (u, (j, i)), v in zip(slots, sol.x):
            if v:
                acc.setdefault((u.name, u.a, u.b), {})[(j, i)] = v
        for (n, a, b), ent in acc.items():
            op = state[n]
            op.blocks[(a, b)] = GradedMap(op.src[a].space, op.tgt[b].space, op.rdeg(a, b), ent)


def _mutable(op: BlockOp) -> BlockOp:
    return BlockOp(op.src, op.tgt, op.fdeg, dict(op.blocks))


def _new_unknowns(name, op: BlockOp, loss, lo, hi):
    out = []
    for a in op.src.ids:
        for b in op.tgt.ids:
            L = op.gap(a, b) + loss
            if lo < L <= hi and _slots(op, a, b):
                out.append(Unknown(name, a, b, L))
    return out


def _gap0_invertible(psi: PartialMap) -> bool:
    """Is the energy-preserving part of a loss-0 map invertible?"""
    if psi.loss != 0:
        return False
    src, tgt = psi.src, psi.tgt
    rows, cols = [], []
    for l in tgt:
        rows += [(l.id, j) for j in range(l.space.dim)]
    for l in src:
        cols += [(l.id, i) for i in range(l.space.dim)]
    if len(rows) != len(cols):
        return False
    A = [[ZERO] * len(cols) for _ in rows]
    ri = {r: k for k, r in enumerate(rows)}
    ci = {c: k for k, c in enumerate(cols)}
    for (a, b), f in psi.entries.items():
        if psi.op.gap(a, b) != 0:
            continue
        for (j, i), v in f.entries.items():
            A[ri[(b, j)]][ci[(a, i)]] = v
    n = len(rows)
    for c in range(n):
        # rank check: each standard vector must be solvable
        e = [Fraction(int(r == c)) for r in range(n)]
        if not solve_linear(A, e, ncols=n).ok:
            return False
    return True


# ---------------------------------------------------------------- promotions

def promote_complex_with_map(X1: PartialComplex, X2: PartialComplex, psi: PartialMap):
    """Extend X1 and psi: X1 -> X2 from cut(X1) to cut(X2)."""
    E1, E2 = X1.cut, X2.cut
    failures = []
    if psi.source != X1 or psi.target.critical != X2.critical:
        failures.append("psi must go from X1 to X2")
    if psi.loss != 0:
        failures.append("psi must have loss 0")
    if psi.cut != E1:
        failures.append("psi must have the cut level of X1")
    if E2 < E1:
        failures.append("target cut must not be below the source cut")
    if not failures:
        if not _gap0_invertible(psi):
            failures.append("psi is not invertible modulo positive energy")
        if not check_partial_complex(X1).ok:
            failures.append("X1 fails the partial complex relation")
        if not check_partial_complex(X2).ok:
            failures.append("X2 fails the partial complex relation")
        if not check_cochain_map(psi).ok:
            failures.append("psi fails the cochain map relation")
    if failures:
        raise PreconditionFailed(failures)
    if E1 == E2:
        return X1, psi
    C = X1.critical
    D1 = X1.dhat()
    state = {"m": _mutable(D1), "psi": _mutable(psi.op)}
    D2 = X2.dhat()
    unknowns = [u for u in _new_unknowns("m", state["m"], 0, E1, E2)] + \
               _new_unknowns("psi", state["psi"], 0, E1, E2)
    relations = [
        Relation("partial complex relation", lambda s: [(1, [s["m"], s["m"]])], C, C, 2, ZERO),
        Relation("cochain map relation", lambda s: [(1, [D2, s["psi"]]), (-1, [s["psi"], s["m"]])],
                 C, X2.critical, 1, ZERO),
    ]

    def minimal(s, L, us):
        # new psi entries stay zero; new m1 := known part of d2 psi - psi d1
        for u in us:
            if u.name == "m":
                b = _eval_terms([(1, [D2, s["psi"]]), (-1, [s["psi"], s["m"]])], u.a, u.b, fdeg=1)
                if not b.is_zero():
                    s["m"].blocks[(u.a, u.b)] = b

    _solve_levels(state, unknowns, relations, E1, E2, minimal=minimal)
    maps = {k: f for k, f in state["m"].blocks.items() if k[0] != k[1]}
    X1p = PartialComplex(C, E2, maps)
    psip = PartialMap(X1p, X2, E2, 0, state["psi"].blocks)
    return X1p, psip


def promote_map(psi21p: PartialMap, psi21: PartialMap, psi2: PartialMap, psi1: PartialMap,
                h: PartialOperator):
    """Square psi21: F1->F2, psi21': F1'->F2', psi1: F1->F1', psi2: F2->F2'.

    Promotes psi1 and the homotopy h: F1 -> F2' (d' h + h d = psi2 psi21 - psi21' psi1)
    from cut(psi1) to cut(psi2).
    """
    F1, F2, F1p, F2p = psi21.source, psi21.target, psi21p.source, psi21p.target
    E1, E2 = psi1.cut, psi2.cut
    c = psi2.loss
    failures = []
    if psi1.source != F1 or psi1.target != F1p or psi2.source != F2 or psi2.target != F2p:
        failures.append("square does not close up")
    if h.src != F1.critical or h.tgt != F2p.critical or h.fdeg != -1:
        failures.append("h must be a degree -1 operator F1 -> F2'")
    for X in (F1, F2, F1p, F2p):
        if X.cut != E2:
            failures.append("all four complexes must have the upper cut level")
            break
    if failures:
        raise PreconditionFailed(failures)
    if not (psi21.loss == 0 and psi21p.loss == 0 and psi21.cut == E2 and psi21p.cut == E2
            and _gap0_invertible(psi21) and _gap0_invertible(psi21p)
            and check_cochain_map(psi21).ok and check_cochain_map(psi21p).ok):
        failures.append("(i) horizontal maps must be loss-0 cochain maps at the upper cut, invertible mod positive energy")
    if not (psi2.cut == E2 and check_cochain_map(psi2).ok):
        failures.append("(ii) psi2 must be a cochain map at the upper cut")
    if not (psi1.loss == c and check_cochain_map(psi1).ok and E1 <= E2):
        failures.append("(iii) psi1 must be a cochain map of the same loss at the lower cut")
    if not (h.loss == c and h.cut == E1 and check_square_homotopy(F1, F2p, h, psi2, psi21, psi21p, psi1).ok):
        failures.append("(iv) h must make the square homotopy commutative at the lower cut")
    if failures:
        raise PreconditionFailed(failures)
    if E1 == E2:
        return psi1, h
    D1, D1p, D2p = F1.dhat(), F1p.dhat(), F2p.dhat()
    state = {"psi1": _mutable(psi1.op), "h": _mutable(h.op)}
    unknowns = _new_unknowns("psi1", state["psi1"], c, E1, E2) + _new_unknowns("h", state["h"], c, E1, E2)
    relations = [
        Relation("cochain map relation", lambda s: [(1, [D1p, s["psi1"]]), (-1, [s["psi1"], D1])],
                 F1.critical, F1p.critical, 1, c),
        Relation("homotopy-commutative square relation",
                 lambda s: square_terms(D1, D2p, s["h"], psi2.op, psi21.op, psi21p.op, s["psi1"]),
                 F1.critical, F2p.critical, 0, c),
    ]
    _solve_levels(state, unknowns, relations, E1, E2)
    psi1p = PartialMap(F1, F1p, E2, c, state["psi1"].blocks)
    hp = PartialOperator(F1.critical, F2p.critical, E2, c, state["h"].blocks, fdeg=-1)
    return psi1p, hp


@dataclass
class TowerData:
    """The data around two consecutive levels i, i+1 of a tower.

    Complexes F1i, F2i, F1ip1, F2ip1 at the upper cut; psi1: F1i -> F1ip1 and
    psi2: F2i -> F2ip1 loss-0 maps; n_a/n_b at both levels; homotopies
    h_ab_i (lower cut), h_ab_ip1, h_a, h_b (upper cut), and H (lower cut).
    """
    F1i: PartialComplex
    F2i: PartialComplex
    F1ip1: PartialComplex
    F2ip1: PartialComplex
    psi1: PartialMap
    psi2: PartialMap
    n_a_i: PartialMap
    n_b_i: PartialMap
    n_a_ip1: PartialMap
    n_b_ip1: PartialMap
    h_ab_i: PartialOperator
    h_ab_ip1: PartialOperator
    h_a: PartialOperator
    h_b: PartialOperator
    H: PartialOperator


def check_tower_relation(t: TowerData, H=None, h_ab_i=None) -> Report:
    H = t.H if H is None else H
    h_ab_i = t.h_ab_i if h_ab_i is None else h_ab_i
    terms = tower_terms(t.F1i.dhat(), t.F2ip1.dhat(), H.op, t.h_a.op, t.h_b.op, t.h_ab_ip1.op,
                        h_ab_i.op, t.psi1.op, t.psi2.op)
    return _relation_report("homotopy-of-homotopies relation", terms, t.F1i.critical, t.F2ip1.critical,
                            -1, -H.loss, H.cut - H.loss)


def _hom_report(anchor, D_src, X: PartialOperator, D_tgt, rhs):
    """D(X) = rhs with rhs given as (coef, ops) terms."""
    sign = -1 if X.fdeg % 2 == 0 else 1
    terms = [(1, [D_tgt, X.op]), (sign, [X.op, D_src])] + [(-c, ops) for c, ops in rhs]
    return _relation_report(anchor, terms, X.src, X.tgt, X.fdeg + 1, -X.loss, X.cut - X.loss)


def check_tower_preconditions(t: TowerData) -> list[str]:
    fails = []
    Eip1 = t.F1ip1.cut
    for X in (t.F1i, t.F2i, t.F1ip1, t.F2ip1):
        if X.cut != Eip1 or not check_partial_complex(X).ok:
            fails.append("(1) complexes must be partial complexes at the upper cut")
            break
    for p in (t.psi1, t.psi2):
        if p.loss != 0 or not _gap0_invertible(p) or not check_cochain_map(p).ok:
            fails.append("(1) level maps must be loss-0 cochain maps invertible mod positive energy")
            break
    for n in (t.n_a_i, t.n_b_i, t.n_a_ip1, t.n_b_ip1):
        if not check_cochain_map(n).ok:
            fails.append("(2) n maps must be cochain maps")
            break
    r1 = _hom_report("", t.F1i.dhat(), t.h_ab_i, t.F2i.dhat(), [(1, [t.n_b_i.op]), (-1, [t.n_a_i.op])])
    r2 = _hom_report("", t.F1ip1.dhat(), t.h_ab_ip1, t.F2ip1.dhat(),
                     [(1, [t.n_b_ip1.op]), (-1, [t.n_a_ip1.op])])
    if not (r1.ok and r2.ok):
        fails.append("(3) h_ab must be homotopies from n_a to n_b")
    for h, na, ni in ((t.h_a, t.n_a_ip1, t.n_a_i), (t.h_b, t.n_b_ip1, t.n_b_i)):
        r = _hom_report("", t.F1i.dhat(), h, t.F2ip1.dhat(),
                        [(1, [t.psi2.op, ni.op]), (-1, [na.op, t.psi1.op])])
        if not r.ok:
            fails.append("(4) level homotopies must run from n^(i+1) psi1 to psi2 n^i")
            break
    if not check_tower_relation(t).ok:
        fails.append("H must satisfy the homotopy-of-homotopies relation at the lower cut")
    return fails


def promote_homotopy(t: TowerData):
    """Promote h_ab_i and H from the lower cut to the upper cut."""
    fails = check_tower_preconditions(t)
    if fails:
        raise PreconditionFailed(fails)
    lo, hi = t.h_ab_i.cut, t.F1ip1.cut
    c = t.h_ab_i.loss
    if lo == hi:
        return t.h_ab_i, t.H
    D1i, D2i, D2ip1 = t.F1i.dhat(), t.F2i.dhat(), t.F2ip1.dhat()
    state = {"h": _mutable(t.h_ab_i.op), "H": _mutable(t.H.op)}
    unknowns = _new_unknowns("h", state["h"], c, lo, hi) + _new_unknowns("H", state["H"], c, lo, hi)
    relations = [
        Relation("homotopy relation", lambda s: [(1, [D2i, s["h"]]), (1, [s["h"], D1i]),
                                                 (-1, [t.n_b_i.op]), (1, [t.n_a_i.op])],
                 t.F1i.critical, t.F2i.critical, 0, c),
        Relation("homotopy-of-homotopies relation",
                 lambda s: tower_terms(D1i, D2ip1, s["H"], t.h_a.op, t.h_b.op, t.h_ab_ip1.op,
                                       s["h"], t.psi1.op, t.psi2.op),
                 t.F1i.critical, t.F2ip1.critical, -1, c),
    ]
    _solve_levels(state, unknowns, relations, lo, hi)
    hp = PartialOperator(t.F1i.critical, t.F2i.critical, hi, c, state["h"].blocks, fdeg=-1)
    Hp = PartialOperator(t.F1i.critical, t.F2ip1.critical, hi, c, state["H"].blocks, fdeg=-2)
    return hp, Hp


# ---------------------------------------------------------------- homotopy limit

@dataclass
class LimitResult:
    complex: PartialComplex
    certificates: list  # (round, level, agrees)
    stages: list


def homotopy_limit(tower: list, maps: list, final=None) -> LimitResult:
    """Tower X^1 .. X^N (cuts E^1 < ... < E^N) with maps psi^k: X^k -> X^(k+1) at cut E^k.

    Round r promotes X^(r-1), ..., X^1 up to E^r, each against the already
    promoted next stage.  Returns X^1 at cut E^final.
    """
    N = len(tower) if final is None else final
    if len(maps) < N - 1:
        raise PreconditionFailed(["need one connecting map per consecutive pair"])
    for k in range(len(tower) - 1):
        if not tower[k].cut < tower[k + 1].cut:
            raise PreconditionFailed(["cut levels must increase"])
    stages = list(tower[:N])
    psis = list(maps[:N - 1])
    certs = []
    for r in range(1, N):
        Er = stages[r].cut
        for k in range(r - 1, -1, -1):
            old = stages[k]
            try:
                new, psi_new = promote_complex_with_map(old, stages[k + 1], psis[k])
            except PromotionObstructed as exc:
                exc.stage = k
                raise
            certs.append((r, k, old.cut, energy_cut(new, old.cut) == old))
            stages[k] = new
            psis[k] = psi_new
        assert stages[0].cut == Er
    return LimitResult(stages[0], certs, stages)


# ---------------------------------------------------------------- Morse case

def formal_dimension(mu_minus: int, mu_plus: int, dimR_plus: int) -> int:
    return mu_plus - mu_minus - 1 + dimR_plus


def boundary_sign(mu_minus: int, mu: int, mu_plus: int, dimR_alpha: int, dimR_plus: int) -> int:
    dimM = formal_dimension(mu, mu_plus, dimR_plus)
    eps = (mu - mu_minus) * dimM - (mu - mu_minus - 1) * dimR_alpha
    return -1 if eps % 2 else 1


def fiber_swap_sign(dimX1: int, dimX2: int, dimY: int) -> int:
    return -1 if ((dimX1 - dimY) * (dimX2 - dimY)) % 2 else 1


@dataclass
class MorseKSystem:
    critical: CriticalData
    counts: dict  # (a_minus, a_plus) -> rows x cols matrix (target basis x source basis)
    dims: dict | None = None

    def __post_init__(self):
        for l in self.critical:
            if any(d != 0 for _, d in l.space.basis) or not l.complex.d0.is_zero():
                raise ValueError(f"label {l.id}: Morse data must sit in degree 0 with d0 = 0")
        self.counts = {k: [[rat(v) for v in row] for row in m] for k, m in self.counts.items()}
        if self.dims is None:
            self.dims = {(a.id, b.id): formal_dimension(a.mu, b.mu, b.dimR)
                         for a in self.critical for b in self.critical if a.id != b.id}


def morse_check(K: MorseKSystem) -> Report:
    rep = Report("Morse relation (d o d = 0)")
    C = K.critical
    for (a, b), m in K.counts.items():
        la, lb = C[a], C[b]
        if len(m) != lb.space.dim or any(len(r) != la.space.dim for r in m):
            rep.failures.append(("shape", (a, b)))
        if not any(v for r in m for v in r):
            continue
        if formal_dimension(la.mu, lb.mu, lb.dimR) != 0:
            rep.failures.append(("count at nonzero dimension", (a, b)))
        if lb.E <= la.E:
            rep.failures.append(("non-positive energy", (a, b)))
    for (a, b), d in K.dims.items():
        if d != formal_dimension(C[a].mu, C[b].mu, C[b].dimR):
            rep.failures.append(("dimension formula", (a, b)))
    if rep.failures:
        return rep
    for lm in C:
        for lp in C:
            if lm.id == lp.id or formal_dimension(lm.mu, lp.mu, lp.dimR) != 1:
                continue
            total = [[ZERO] * lm.space.dim for _ in range(lp.space.dim)]
            for la in C:
                n1 = K.counts.get((lm.id, la.id))
                n2 = K.counts.get((la.id, lp.id))
                if n1 is None or n2 is None:
                    continue
                s = boundary_sign(lm.mu, la.mu, lp.mu, la.dimR, lp.dimR)
                for j in range(lp.space.dim):
                    for i in range(lm.space.dim):
                        total[j][i] += s * sum(n2[j][k] * n1[k][i] for k in range(la.space.dim))
            if any(v for r in total for v in r):
                rep.failures.append(("d^2 != 0", (lm.id, lp.id), total))
    return rep


def morse_to_partial_complex(K: MorseKSystem, cut) -> PartialComplex:
    C = K.critical
    maps = {}
    for (a, b), m in K.counts.items():
        g = C[b].E - C[a].E
        if 0 < g <= rat(cut) and any(v for r in m for v in r):
            maps[(a, b)] = GradedMap.from_dense(C[a].space, C[b].space, 1 - C[b].mu + C[a].mu, m)
    return PartialComplex(C, cut, maps)


def check_gapped(X: PartialComplex, G: DiscreteSubmonoid) -> list:
    bad = []
    for (a, b) in X.maps:
        la, lb = X.critical[a], X.critical[b]
        if not G.contains((lb.E - la.E, lb.mu - la.mu)):
            bad.append((a, b))
    return bad


# ---------------------------------------------------------------- whole-operator algebra

def op_mul(A: BlockOp, B: BlockOp) -> BlockOp:
    """A o B."""
    blocks = {}
    for a in B.src.ids:
        for b in A.tgt.ids:
            f = _chain_at([A, B], a, b)
            if f is not None and not f.is_zero():
                blocks[(a, b)] = f
    return BlockOp(B.src, A.tgt, A.fdeg + B.fdeg, blocks)


def op_add(A: BlockOp, B: BlockOp, coef=1) -> BlockOp:
    """A + coef * B."""
    blocks = dict(A.blocks)
    for k, f in B.blocks.items():
        g = f.scale(coef)
        blocks[k] = blocks[k] + g if k in blocks else g
    return BlockOp(A.src, A.tgt, A.fdeg, blocks)


def op_identity(C: CriticalData) -> BlockOp:
    return BlockOp(C, C, 0, {(l.id, l.id): GradedMap.identity(l.space) for l in C})


def op_inverse_unipotent(g: BlockOp) -> BlockOp:
    """Inverse of id + N where N only has blocks of positive energy gap."""
    C = g.src
    N = op_add(g, op_identity(C), -1)
    for (a, b) in N.blocks:
        if N.gap(a, b) <= 0:
            raise ValueError("not unipotent: nilpotent part has a non-positive gap block")
    inv, power, sign = op_identity(C), op_identity(C), -1
    while True:
        power = op_mul(power, N)
        if not power.blocks:
            return inv
        inv = op_add(inv, power, sign)
        sign = -sign


def hom_d(D_src: BlockOp, X: BlockOp, D_tgt: BlockOp) -> BlockOp:
    """d X - (-1)^|X| X d."""
    return op_add(op_mul(D_tgt, X), op_mul(X, D_src), -1 if X.fdeg % 2 == 0 else 1)


def op_filter(X: BlockOp, lo, hi) -> dict:
    return {k: f for k, f in X.blocks.items() if lo <= X.gap(*k) <= hi}
