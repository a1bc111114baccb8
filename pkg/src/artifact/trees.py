"""Decorated planar rooted trees indexing A-infinity boundary and corner strata.

A tree is a nested structure of interior vertices.  Each vertex carries a
monoid decoration ``beta = (energy, mu)`` and an ordered tuple of children;
a child is either another vertex or an input leaf.  Leaf 0 (the output) is
the root edge and is implicit.  The planar code string is canonical, so
equality and deduplication are string comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import IndexOutOfRange
from .novikov import BETA0, DiscreteSubmonoid, beta_add, beta_sub, monoid_below, rat, rat_str

LEAF = "*"


def beta_str(beta) -> str:
    return "" if beta == BETA0 else f"{rat_str(beta[0])}:{beta[1]}"


@dataclass(frozen=True)
class Vertex:
    beta: tuple
    children: tuple

    def code(self) -> str:
        inner = ",".join(LEAF if c == LEAF else c.code() for c in self.children)
        return f"({beta_str(self.beta)}|{inner})"


class DecoratedTree:
    __slots__ = ("root", "_code")

    def __init__(self, root: Vertex):
        self.root = root
        self._code = root.code()

    @property
    def code(self) -> str:
        return self._code

    def __eq__(self, other):
        return isinstance(other, DecoratedTree) and self._code == other._code

    def __hash__(self):
        return hash(self._code)

    def __repr__(self):
        return f"DecoratedTree({self._code})"

    def vertices(self) -> list:
        """(path, beta, k_v) for each interior vertex in preorder."""
        out = []

        def walk(v, path):
            out.append((path, v.beta, len(v.children)))
            for n, c in enumerate(v.children):
                if c != LEAF:
                    walk(c, path + (n,))
        walk(self.root, ())
        return out

    @property
    def k(self) -> int:
        def count(v):
            return sum(1 if c == LEAF else count(c) for c in v.children)
        return count(self.root)

    @property
    def beta(self):
        total = BETA0
        for _, b, _ in self.vertices():
            total = beta_add(total, b)
        return total

    def interior_edges(self) -> list:
        """Paths of the non-root vertices; each labels the edge above it."""
        return [p for p, _, _ in self.vertices() if p]

    def is_stable(self) -> bool:
        return all(b[0] > 0 or kv >= 2 for _, b, kv in self.vertices())


def corolla(k: int, beta=BETA0) -> DecoratedTree:
    return DecoratedTree(Vertex(_norm(beta), (LEAF,) * k))


def _norm(beta):
    return (rat(beta[0]), int(beta[1]))


def parse_tree(code: str) -> DecoratedTree:
    pos = 0

    def vertex():
        nonlocal pos
        assert code[pos] == "("
        bar = code.index("|", pos)
        bs = code[pos + 1:bar]
        beta = BETA0 if bs == "" else (rat(bs.split(":")[0]), int(bs.split(":")[1]))
        pos = bar + 1
        kids = []
        while code[pos] != ")":
            if code[pos] == ",":
                pos += 1
                continue
            if code[pos] == LEAF:
                kids.append(LEAF)
                pos += 1
            else:
                kids.append(vertex())
        pos += 1
        return Vertex(beta, tuple(kids))

    t = DecoratedTree(vertex())
    if pos != len(code):
        raise ValueError(f"trailing characters in tree code {code!r}")
    return t


# ---------------------------------------------------------------- enumeration

class _Enumerator:
    def __init__(self, G: DiscreteSubmonoid, beta):
        self.G = G
        self.elements = monoid_below(G, beta[0])
        self.members = set(self.elements)

    def below(self, beta):
        return [b for b in self.elements if beta_sub(beta, b) in self.members]

    @lru_cache(maxsize=None)
    def trees(self, k, beta):
        out = []
        for bv in self.below(beta):
            rest = beta_sub(beta, bv)
            minc = 0 if bv[0] > 0 else 2
            for kids in self.forest(k, rest, minc):
                out.append(Vertex(bv, kids))
        return tuple(out)

    @lru_cache(maxsize=None)
    def forest(self, k, beta, minc):
        """Ordered child tuples using k leaves and total decoration beta."""
        out = []
        if k == 0 and beta == BETA0:
            if minc <= 0:
                out.append(())
            return tuple(out)
        nxt = max(minc - 1, 0)
        if k >= 1:
            for rest in self.forest(k - 1, beta, nxt):
                out.append((LEAF,) + rest)
        for b1 in self.below(beta):
            for k1 in range(0, k + 1):
                if (k1, b1) == (k, beta) and minc >= 2:
                    continue
                if b1 == BETA0 and k1 < 2:
                    continue
                subs = self.trees(k1, b1)
                if not subs:
                    continue
                rests = self.forest(k - k1, beta_sub(beta, b1), nxt)
                for s in subs:
                    for rest in rests:
                        out.append((s,) + rest)
        return tuple(out)


def enumerate_trees(G: DiscreteSubmonoid, k: int, beta=BETA0) -> list:
    beta = _norm(beta)
    if k < 0 or beta[0] < 0:
        return []
    en = _Enumerator(G, beta)
    if beta not in en.members:
        return []
    trees = {DecoratedTree(v) for v in en.trees(k, beta)}
    return sorted(trees, key=lambda t: t.code)


def corner_codim(t: DecoratedTree) -> int:
    return len(t.interior_edges())


def graft(t1: DecoratedTree, t2: DecoratedTree, i: int) -> DecoratedTree:
    """Attach the root of t1 to the i-th input of t2 (operadically t2 o_i t1)."""
    k2 = t2.k
    if not 1 <= i <= k2:
        raise IndexOutOfRange(f"input {i} out of range 1..{k2}")
    counter = [0]

    def walk(v):
        kids = []
        for c in v.children:
            if c == LEAF:
                counter[0] += 1
                kids.append(t1.root if counter[0] == i else LEAF)
            else:
                kids.append(walk(c))
        return Vertex(v.beta, tuple(kids))

    return DecoratedTree(walk(t2.root))


def compose_at(outer: DecoratedTree, i: int, inner: DecoratedTree) -> DecoratedTree:
    """outer o_i inner."""
    return graft(inner, outer, i)


def tree_dimension(t: DecoratedTree, dimL: int) -> int:
    vs = t.vertices()
    total = sum(b[1] + dimL + kv - 2 for _, b, kv in vs) - dimL * corner_codim(t)
    b = t.beta
    expected = b[1] + dimL + t.k - 2 - corner_codim(t)
    if total != expected:
        raise AssertionError(f"dimension identity fails for {t.code}: {total} != {expected}")
    return total


def corner_strata(G, k, beta, m) -> list:
    return [t for t in enumerate_trees(G, k, beta) if corner_codim(t) == m]


# ---------------------------------------------------------------- boundary signs

def moduli_nonempty(k: int, beta) -> bool:
    return k >= 0 and (beta[0] > 0 or k >= 2)


def boundary_epsilon(k1, k2, i, dimL, mu2, drop_k1=False) -> int:
    eps = (k1 - 1) * (k2 - 1) + dimL + (0 if drop_k1 else k1) + (i - 1) * (1 + (mu2 + k2) * dimL)
    return eps % 2


def boundary_sign(k1, k2, i, dimL, mu2, drop_k1=False) -> int:
    return -1 if boundary_epsilon(k1, k2, i, dimL, mu2, drop_k1) else 1


def boundary_terms(G, k, beta, dimL, drop_k1=False) -> list:
    """Codimension-one splittings (beta1, k1, beta2, k2, i, sign).

    The second factor (beta2, k2) is inserted into input i of the first.
    """
    beta = _norm(beta)
    elems = monoid_below(G, beta[0])
    members = set(elems)
    out = []
    for b1 in elems:
        b2 = beta_sub(beta, b1)
        if b2 not in members:
            continue
        for k1 in range(1, k + 1):
            k2 = k + 1 - k1
            if not (moduli_nonempty(k1, b1) and moduli_nonempty(k2, b2)):
                continue
            for i in range(1, k1 + 1):
                out.append((b1, k1, b2, k2, i, boundary_sign(k1, k2, i, dimL, b2[1], drop_k1)))
    return out


# ---------------------------------------------------------------- corner towers

def _expansions(G, t: DecoratedTree, extra: int):
    """Trees obtained by replacing each vertex of t with a tree of the same
    arity and decoration, adding ``extra`` interior edges in total.

    Yields (tree, frozenset of paths of the new edges)."""
    cache = {}

    def options(kv, bv):
        key = (kv, bv)
        if key not in cache:
            cache[key] = [(s, corner_codim(s)) for s in enumerate_trees(G, kv, bv)]
        return cache[key]

    def build(v, budget):
        """Yield (vertex, used, marks) where marks holds relative paths of new-edge vertices."""
        for sub, cd in options(len(v.children), v.beta):
            if cd > budget:
                continue
            # fill the leaves of sub with the children of v, recursively expanded
            for filled, used, marks in _fill(sub.root, list(v.children), budget - cd):
                new_marks = marks | _new_paths(sub.root)
                yield filled, cd + used, new_marks

    def _fill(sub_root, kids, budget):
        # returns list of (vertex, used, marks) after substituting kids into leaves of sub_root
        slots = []

        def collect(v, path):
            for n, c in enumerate(v.children):
                if c == LEAF:
                    slots.append(path + (n,))
                else:
                    collect(c, path + (n,))
        collect(sub_root, ())
        results = [((), 0, [])]
        for kid in kids:
            nxt = []
            for chosen, used, _ in results:
                if kid == LEAF:
                    nxt.append((chosen + ((LEAF, 0, frozenset()),), used, None))
                else:
                    for kv, ku, km in build(kid, budget - used):
                        nxt.append((chosen + ((kv, ku, km),), used + ku, None))
            results = nxt
        out = []
        for chosen, used, _ in results:
            marks = set()
            repl = dict(zip(slots, chosen))

            def rebuild(v, path):
                ks = []
                for n, c in enumerate(v.children):
                    p = path + (n,)
                    if c == LEAF:
                        node, _, km = repl[p]
                        ks.append(node)
                        marks.update(p + q for q in km)
                    else:
                        ks.append(rebuild(c, p))
                return Vertex(v.beta, tuple(ks))
            out.append((rebuild(sub_root, ()), used, frozenset(marks)))
        return out

    def _new_paths(sub_root):
        return frozenset(p for p, _, _ in DecoratedTree(sub_root).vertices() if p)

    for v, used, marks in build(t.root, extra):
        if used == extra:
            yield DecoratedTree(v), marks


def corner_tower_check(G, k, beta, m, l):
    """Count flagged trees (T, S): T of codimension m + l, S the l edges added
    when degenerating a codimension-m stratum further.  Each codimension
    m + l tree must appear exactly binomial(m + l, l) times."""
    beta = _norm(beta)
    flagged = set()
    for t in corner_strata(G, k, beta, m):
        for T, S in _expansions(G, t, l):
            flagged.add((T.code, S))
    fibers: dict = {}
    for code, _ in flagged:
        fibers[code] = fibers.get(code, 0) + 1
    target = {t.code for t in corner_strata(G, k, beta, m + l)}
    want = comb(m + l, l)
    ok = set(fibers) == target and all(v == want for v in fibers.values())
    ratio = Fraction(len(flagged), len(target)) if target else None
    return ok, {"flagged": len(flagged), "strata": len(target), "ratio": ratio, "binomial": want}
