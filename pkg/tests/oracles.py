"""Brute-force oracles used to freeze expected values.

They share no code with the library: trees come from Dyck words, strata from
laminar interval families, monoid elements from integer combinations.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import comb


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def monoid_elements(gens, E):
    """All sums of generators with energy <= E, by bounded multiplicities."""
    gens = [(Fraction(e), int(m)) for e, m in gens]
    bounds = [int(Fraction(E) // e) for e, _ in gens]
    out = set()
    for mult in product(*(range(b + 1) for b in bounds)):
        en = sum((c * e for c, (e, _) in zip(mult, gens)), Fraction(0))
        if en <= E:
            out.add((en, sum(c * m for c, (_, m) in zip(mult, gens))))
    return sorted(out)


def _dyck(n):
    """Dyck words of semilength n as strings of '(' and ')'."""
    if n == 0:
        yield ""
        return
    for i in range(n):
        for a in _dyck(i):
            for b in _dyck(n - 1 - i):
                yield "(" + a + ")" + b


def _plane_tree(word):
    """Plane tree with root plus one node per '(' pair; nodes are child lists."""
    root = []
    stack = [root]
    for ch in word:
        if ch == "(":
            node = []
            stack[-1].append(node)
            stack.append(node)
        else:
            stack.pop()
    return root


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _code(node, deco):
    kind, beta = deco[id(node)]
    if kind == "leaf":
        return "*"
    b = "" if beta == (0, 0) else f"{_fmt(Fraction(beta[0]))}:{beta[1]}"
    return "(" + b + "|" + ",".join(_code(c, deco) for c in node) + ")"


def _nodes(root):
    out, stack = [], [root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(v)
    return out


def tree_codes(gens, k, beta):
    """Canonical codes of stable decorated planar trees with k inputs and total beta."""
    beta = (Fraction(beta[0]), int(beta[1]))
    elems = monoid_elements(gens, beta[0])
    positive = [b for b in elems if b[0] > 0]
    emin = min((b[0] for b in positive), default=None)
    pmax = int(beta[0] // emin) if emin else 0
    # zero-energy vertices have >= 2 children, so a tree with k leaves and at
    # most pmax positive vertices has at most 2(k + pmax) - 1 nodes
    codes = set()
    for n in range(0, 2 * (k + pmax) - 1):
        for word in _dyck(n):
            root = _plane_tree(word)
            nodes = _nodes(root)
            childless = [v for v in nodes if not v and v is not root]
            unary = sum(1 for v in nodes if len(v) == 1)
            if not k <= len(childless) <= k + pmax - unary:
                continue
            inner = [v for v in nodes if v is root or v]
            for leafset in combinations(range(len(childless)), k):
                verts = inner + [childless[i] for i in range(len(childless)) if i not in leafset]
                leaves = [childless[i] for i in leafset]
                for decos in _decorations(verts, elems, positive, beta):
                    deco = {id(v): ("vertex", d) for v, d in zip(verts, decos)}
                    deco.update({id(v): ("leaf", None) for v in leaves})
                    codes.add(_code(root, deco))
    return codes


def _decorations(verts, elems, positive, beta):
    """Assignments of monoid elements summing to beta; unstable choices pruned."""
    out = []

    def rec(i, acc, chosen):
        if acc[0] > beta[0]:
            return
        if i == len(verts):
            if acc == beta:
                out.append(tuple(chosen))
            return
        for d in (elems if len(verts[i]) >= 2 else positive):
            rec(i + 1, (acc[0] + d[0], acc[1] + d[1]), chosen + [d])

    rec(0, (Fraction(0), 0), [])
    return out


def laminar_counts(k):
    """Number of laminar families of m intervals of [1..k] with sizes in [2, k-1], per m."""
    ivs = [(a, b) for a in range(k) for b in range(a + 2, k + 1) if b - a < k]

    def compatible(x, y):
        (a, b), (c, d) = x, y
        return b <= c or d <= a or (a <= c and d <= b) or (c <= a and b <= d)

    counts = {}
    for m in range(0, k):
        n = 0
        for fam in combinations(ivs, m):
            if all(compatible(x, y) for x, y in combinations(fam, 2)):
                n += 1
        if n:
            counts[m] = n
    return counts
