"""Seeded instance builders for the Floer promotion algorithms.

Consistent inputs are produced by gauge conjugation: starting from the
block-diagonal signed ``d0`` on interval-model labels, conjugating by a
unipotent ``g = id + N`` gives an exact differential, ``g2 g1^-1`` gives
an exact cochain map, and ``g W g'^-1`` transports homotopies.  Cutting
these exact objects to lower energy levels gives valid partial data whose
promotions are then recomputed from scratch.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .floer import (BlockOp, CriticalData, Label, PartialComplex, PartialMap, PartialOperator,
                    TowerData, hom_d, op_add, op_filter, op_identity, op_inverse_unipotent, op_mul,
                    signed_d0)
from .gradecx import CochainComplex, GradedMap, interval_complex, point_complex

F = Fraction


def interval_labels(labels) -> CriticalData:
    """labels: iterable of (id, E, mu); every label carries the interval model."""
    return CriticalData(Label(i, F(E), mu, 1, interval_complex()) for i, E, mu in labels)


def base_dhat(C: CriticalData) -> BlockOp:
    return BlockOp(C, C, 1, {(l.id, l.id): signed_d0(l) for l in C})


def random_op(rng: random.Random, src, tgt, fdeg, lo, hi, density=0.6, strict_lo=False, vals=(-2, -1, 1, 2)):
    blocks = {}
    for a in src:
        for b in tgt:
            g = b.E - a.E
            if g < lo or g > hi or (strict_lo and g == lo):
                continue
            deg = fdeg + a.mu - b.mu
            ent = {}
            for i in range(a.space.dim):
                for j in range(b.space.dim):
                    if b.space.degree(j) == a.space.degree(i) + deg and rng.random() < density:
                        ent[(j, i)] = rng.choice(vals)
            if ent:
                blocks[(a.id, b.id)] = GradedMap(a.space, b.space, deg, ent)
    return BlockOp(src, tgt, fdeg, blocks)


def random_gauge(rng, C, hi, density=0.6) -> BlockOp:
    N = random_op(rng, C, C, 0, 0, hi, density, strict_lo=True)
    return op_add(op_identity(C), N)


def conj(g: BlockOp, X: BlockOp, h: BlockOp) -> BlockOp:
    """g X h^-1."""
    return op_mul(op_mul(g, X), op_inverse_unipotent(h))


def complex_from(D: BlockOp, cut) -> PartialComplex:
    return PartialComplex(D.src, cut, {k: f for k, f in op_filter(D, 0, F(cut)).items() if k[0] != k[1]})


def map_from(X, Y, op: BlockOp, cut, loss=0) -> PartialMap:
    cut, loss = F(cut), F(loss)
    return PartialMap(X, Y, cut, loss, op_filter(op, -loss, cut - loss))


def oper_from(op: BlockOp, cut, loss) -> PartialOperator:
    cut, loss = F(cut), F(loss)
    return PartialOperator(op.src, op.tgt, cut, loss, op_filter(op, -loss, cut - loss), fdeg=op.fdeg)


SIX = [("a", 0, 0), ("b", F(1, 2), 1), ("c", 1, 0), ("d", F(3, 2), 1), ("e", 2, 1), ("f", F(5, 2), 0)]


def lemma_instance(seed=0, E1=1, E2=F(5, 2), labels=SIX):
    """(X1 at E1, X2 at E2, psi: X1 -> X2 at E1)."""
    rng = random.Random(seed)
    C = interval_labels(labels)
    D0 = base_dhat(C)
    g1, g2 = random_gauge(rng, C, E2), random_gauge(rng, C, E2)
    X1 = complex_from(conj(g1, D0, g1), E1)
    X2 = complex_from(conj(g2, D0, g2), E2)
    psi = map_from(X1, X2, op_mul(g2, op_inverse_unipotent(g1)), E1, 0)
    return X1, X2, psi


def tower_instance(seed=0, cuts=(F(1, 2), F(3, 2), F(5, 2)), labels=SIX):
    rng = random.Random(seed)
    C = interval_labels(labels)
    D0 = base_dhat(C)
    top = max(cuts)
    gs = [random_gauge(rng, C, top) for _ in cuts]
    X = [complex_from(conj(g, D0, g), E) for g, E in zip(gs, cuts)]
    psis = [map_from(X[k], X[k + 1], op_mul(gs[k + 1], op_inverse_unipotent(gs[k])), cuts[k], 0)
            for k in range(len(cuts) - 1)]
    return X, psis


@dataclass
class SquareInstance:
    F1: PartialComplex
    F2: PartialComplex
    F1p: PartialComplex
    F2p: PartialComplex
    psi21: PartialMap
    psi21p: PartialMap
    psi1: PartialMap
    psi2: PartialMap
    h: PartialOperator


def square_instance(seed=0, E1=1, E2=F(5, 2), c=F(1, 2), labels=SIX) -> SquareInstance:
    rng = random.Random(seed)
    C = interval_labels(labels)
    D0 = base_dhat(C)
    E1, E2, c = F(E1), F(E2), F(c)
    g1, g2, g1p, g2p = (random_gauge(rng, C, E2 + c) for _ in range(4))
    Z = random_op(rng, C, C, -1, -c, E2)
    W = random_op(rng, C, C, -1, -c, E2)
    K = op_add(op_identity(C), hom_d(D0, Z, D0))
    F1, F2, F1p, F2p = (complex_from(conj(g, D0, g), E2) for g in (g1, g2, g1p, g2p))
    psi21 = map_from(F1, F2, op_mul(g2, op_inverse_unipotent(g1)), E2)
    psi21p = map_from(F1p, F2p, op_mul(g2p, op_inverse_unipotent(g1p)), E2)
    psi1 = map_from(F1, F1p, conj(g1p, K, g1), E1, c)
    psi2 = map_from(F2, F2p, conj(g2p, op_add(K, hom_d(D0, W, D0)), g2), E2, c)
    h = oper_from(conj(g2p, W, g1), E1, c)
    return SquareInstance(F1, F2, F1p, F2p, psi21, psi21p, psi1, psi2, h)


def tower_square_instance(seed=0, Ei=1, Eip1=F(5, 2), c=F(1, 2), labels=None) -> TowerData:
    rng = random.Random(seed)
    if labels is None:
        labels = [("a", 0, 0), ("b", F(1, 2), 1), ("c", 1, 2), ("d", F(3, 2), 1), ("e", 2, 0), ("f", F(5, 2), 2)]
    C = interval_labels(labels)
    D0 = base_dhat(C)
    Ei, Eip1, c = F(Ei), F(Eip1), F(c)
    hi = Eip1 + c
    g1i, g2i, g1n, g2n = (random_gauge(rng, C, hi) for _ in range(4))
    Za = random_op(rng, C, C, -1, -c, Eip1)
    W = random_op(rng, C, C, -1, -c, Eip1)
    Ya = random_op(rng, C, C, -1, -c, Eip1)
    Yb = random_op(rng, C, C, -1, -c, Eip1)
    Q = random_op(rng, C, C, -3, -c, Eip1)
    d = lambda X: hom_d(D0, X, D0)
    Ka = op_add(op_identity(C), d(Za))
    Kb = op_add(Ka, d(W))
    F1i, F2i, F1n, F2n = (complex_from(conj(g, D0, g), Eip1) for g in (g1i, g2i, g1n, g2n))
    psi1 = map_from(F1i, F1n, op_mul(g1n, op_inverse_unipotent(g1i)), Eip1)
    psi2 = map_from(F2i, F2n, op_mul(g2n, op_inverse_unipotent(g2i)), Eip1)
    n_a_i = map_from(F1i, F2i, conj(g2i, Ka, g1i), Eip1, c)
    n_b_i = map_from(F1i, F2i, conj(g2i, Kb, g1i), Eip1, c)
    n_a_n = map_from(F1n, F2n, conj(g2n, op_add(Ka, d(Ya)), g1n), Eip1, c)
    n_b_n = map_from(F1n, F2n, conj(g2n, op_add(Kb, d(Yb)), g1n), Eip1, c)
    h_ab_i = oper_from(conj(g2i, W, g1i), Ei, c)
    h_ab_n = oper_from(conj(g2n, op_add(op_add(W, Yb), Ya, -1), g1n), Eip1, c)
    h_a = oper_from(conj(g2n, Ya, g1i), Eip1, c)
    h_a = PartialOperator(h_a.src, h_a.tgt, h_a.cut, c, {k: f.scale(-1) for k, f in h_a.entries.items()}, fdeg=-1)
    h_b = oper_from(conj(g2n, Yb, g1i), Eip1, c)
    h_b = PartialOperator(h_b.src, h_b.tgt, h_b.cut, c, {k: f.scale(-1) for k, f in h_b.entries.items()}, fdeg=-1)
    H = oper_from(conj(g2n, d(Q), g1i), Ei, c)
    return TowerData(F1i, F2i, F1n, F2n, psi1, psi2, n_a_i, n_b_i, n_a_n, n_b_n, h_ab_i, h_ab_n, h_a, h_b, H)


def morse_three_point(two_channel=True):
    """Labels 0, 1, 2 at energies 0, 1, 2 and Maslov 0, 1, 2.

    With ``two_channel`` label 1 carries a two-point R and the two broken
    trajectories cancel; otherwise the single product is nonzero.
    """
    from .floer import MorseKSystem
    from .gradecx import GradedSpace
    if two_channel:
        R1 = CochainComplex(GradedSpace((("p", 0), ("q", 0))))
        counts = {("0", "1"): [[1], [1]], ("1", "2"): [[1, -1]]}
    else:
        R1 = point_complex()
        counts = {("0", "1"): [[1]], ("1", "2"): [[1]]}
    C = CriticalData([Label("0", 0, 0, 0, point_complex()), Label("1", 1, 1, 0, R1),
                      Label("2", 2, 2, 0, point_complex())])
    return MorseKSystem(C, counts)


# ---------------------------------------------------------------- A-infinity instances

def random_pw(rng: random.Random, breaks, degree=2, vals=(-2, -1, 1, 2)):
    """Continuous piecewise polynomial with small integer-ish coefficients."""
    from .ainf import PW
    from .ainf import _peval
    breaks = [F(b) for b in breaks]
    pieces = []
    for j in range(len(breaks) - 1):
        p = [F(rng.choice(vals), rng.choice((1, 2))) for _ in range(degree + 1)]
        if pieces:
            # match the previous piece at the shared breakpoint
            p[0] += _peval(tuple(pieces[-1]), breaks[j]) - _peval(tuple(p), breaks[j])
        pieces.append(p)
    return PW(breaks, pieces)


def random_c(rng, space, keys, breaks, density=0.7):
    """Random c-families of shifted degree -mu on the given (k, beta) keys."""
    from itertools import product as iproduct
    out = {}
    for k, beta in keys:
        op = {}
        for xs in iproduct(range(space.dim), repeat=k):
            want = sum(space.degree(x) for x in xs) - k - beta[1] + 1
            for o in space.of_degree(want):
                if rng.random() < density:
                    op.setdefault(xs, {})[o] = random_pw(rng, breaks)
        if op:
            out[(k, beta)] = op
    return out


def trivial_ainf(dga, n, G, E, e0):
    from .ainf import AinfOperations
    return AinfOperations(dga, n, G, E, e0, {})


def seeded_isotopy(seed=0, E=2, e0=1, breaks=(0, F(1, 2), 1)):
    """2-dimensional model, G = <(1,0)>, polynomial c at (1, (1,0)) integrated
    backward from the trivial structure at cut E."""
    from .ainf import integrate_isotopy, pair_dga
    from .novikov import DiscreteSubmonoid
    rng = random.Random(seed)
    dga = pair_dga()
    G = DiscreteSubmonoid(((1, 0),))
    m1 = trivial_ainf(dga, 1, G, E, e0)
    c = random_c(rng, dga.space, [(1, (F(1), 0))], breaks, density=1.0)
    return m1, integrate_isotopy(m1, c, breaks)


def ainf_structure(seed, dga, n, G, E, e0, breaks=(0, F(1, 2), 1)):
    """A nontrivial structure at cut E: the t = 0 end of a random isotopy from the trivial one."""
    from .ainf import integrate_isotopy, restrict_endpoint
    from .novikov import gk_set
    rng = random.Random(seed)
    keys = [(k, b) for b, k in gk_set(G, E, e0) if b[0] > 0]
    c = random_c(rng, dga.space, keys, breaks, density=0.5)
    return restrict_endpoint(integrate_isotopy(trivial_ainf(dga, n, G, E, e0), c, breaks), 0)


def ainf_promotion_instance(seed=0, E0=F(3, 2), E1=3, e0=F(1, 2), breaks=(0, F(1, 2), 1)):
    """(m0 @E0, m1 @E1, I @E0 from m0 to cut(m1, E0)) on the interval model."""
    from .ainf import energy_cut_ainf, energy_cut_isotopy, integrate_isotopy, interval_dga, restrict_endpoint
    from .novikov import DiscreteSubmonoid, gk_set
    rng = random.Random(seed)
    dga = interval_dga()
    G = DiscreteSubmonoid(((1, 0),))
    m1 = ainf_structure(seed + 1000, dga, 1, G, F(E1), F(e0), breaks)
    keys = [(k, b) for b, k in gk_set(G, F(E0), F(e0)) if b[0] > 0]
    c = random_c(rng, dga.space, keys, breaks)
    I = energy_cut_isotopy(integrate_isotopy(energy_cut_ainf(m1, F(E0)), c, breaks), F(E0))
    return restrict_endpoint(I, 0), m1, I


def ainf_tower_instance(seed=0, cuts=(1, F(3, 2), 2), e0=F(1, 2), breaks=(0, F(1, 2), 1)):
    """Stages A^j at cuts[j] with isotopies from A^j to cut(A^(j+1), cuts[j])."""
    from .ainf import energy_cut_ainf, energy_cut_isotopy, integrate_isotopy, interval_dga, restrict_endpoint
    from .novikov import DiscreteSubmonoid, gk_set
    rng = random.Random(seed)
    dga = interval_dga()
    G = DiscreteSubmonoid(((1, 0),))
    cuts = [F(x) for x in cuts]
    stages = [ainf_structure(seed + 1000, dga, 1, G, cuts[-1], F(e0), breaks)]
    isos = []
    for E in reversed(cuts[:-1]):
        keys = [(k, b) for b, k in gk_set(G, E, F(e0)) if b[0] > 0]
        c = random_c(rng, dga.space, keys, breaks)
        I = energy_cut_isotopy(integrate_isotopy(energy_cut_ainf(stages[0], E), c, breaks), E)
        stages.insert(0, restrict_endpoint(I, 0))
        isos.insert(0, I)
    return stages, isos


# ---------------------------------------------------------------- sample files

def write_samples(outdir) -> list:
    """Write CLI-ready JSON inputs built from the seeded instances."""
    import os
    from .serialize import dumps, emit_ainf, emit_isotopy, emit_ksystem, emit_map, emit_morse, emit_tower
    os.makedirs(outdir, exist_ok=True)
    files = {}
    files["morse3.json"] = emit_morse(morse_three_point(True))
    files["morse3_bad.json"] = emit_morse(morse_three_point(False))
    X1, X2, psi = lemma_instance(0)
    files["x1.json"], files["x2.json"], files["psi.json"] = emit_ksystem(X1), emit_ksystem(X2), emit_map(psi)
    X, psis = tower_instance(0)
    files["tower.json"] = emit_tower(X, psis)
    m0, m1, I = ainf_promotion_instance(0)
    files["m0.json"], files["m1.json"], files["iso.json"] = emit_ainf(m0), emit_ainf(m1), emit_isotopy(I)
    written = []
    for name, body in sorted(files.items()):
        path = os.path.join(outdir, name)
        with open(path, "w") as fh:
            fh.write(dumps(body))
        written.append(path)
    return written


if __name__ == "__main__":
    import sys
    for p in write_samples(sys.argv[1] if len(sys.argv) > 1 else "samples"):
        print(p)
