"""Exact arithmetic in the universal Novikov ring.

An element is a finite sum of terms ``c * T**energy * e**(mu/2)`` with
rational ``c`` and ``energy`` and integer ``mu``.  Elements are kept in a
canonical sorted form so that equality is structural.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import InvalidCutLevel, MinimalEnergyViolation

INF = float("inf")


def rat(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/", 1)
            p, q = int(p), int(q)
            if q == 0:
                raise ZeroDivisionError("zero denominator")
            return Fraction(p, q)
        return Fraction(int(s))
    raise TypeError(f"cannot read {x!r} as an exact rational")


def rat_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class NovikovTerm:
    coeff: Fraction
    energy: Fraction
    mu: int

    def __post_init__(self):
        if self.coeff == 0:
            raise ValueError("term coefficient must be nonzero")


class NovikovElement:
    __slots__ = ("_t",)

    def __init__(self, terms: Iterable = ()):
        items = []
        for t in terms:
            if isinstance(t, NovikovTerm):
                c, en, mu = t.coeff, t.energy, t.mu
            else:
                c, en, mu = t
            items.append((rat(en), int(mu), rat(c)))
        self._t = _canonical(items)

    @classmethod
    def _raw(cls, items) -> "NovikovElement":
        """Build from (energy, mu, coeff) triples that are already Fractions and ints."""
        obj = cls.__new__(cls)
        obj._t = _canonical(items)
        return obj

    @classmethod
    def monomial(cls, coeff=1, energy=0, mu=0) -> "NovikovElement":
        return cls([(coeff, energy, mu)])

    @classmethod
    def zero(cls) -> "NovikovElement":
        return cls()

    @classmethod
    def one(cls) -> "NovikovElement":
        return cls([(1, 0, 0)])

    @property
    def terms(self) -> tuple[NovikovTerm, ...]:
        return tuple(NovikovTerm(c, en, mu) for en, mu, c in self._t)

    def is_zero(self) -> bool:
        return not self._t

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = _lift(other)
        return isinstance(other, NovikovElement) and self._t == other._t

    def __hash__(self):
        return hash(self._t)

    def __add__(self, other):
        return nov_add(self, _lift(other))

    __radd__ = __add__

    def __neg__(self):
        obj = NovikovElement.__new__(NovikovElement)
        obj._t = tuple((en, mu, -c) for en, mu, c in self._t)
        return obj

    def __sub__(self, other):
        return nov_add(self, -_lift(other))

    def __rsub__(self, other):
        return nov_add(_lift(other), -self)

    def __mul__(self, other):
        return nov_mul(self, _lift(other))

    __rmul__ = __mul__

    def __repr__(self):
        if not self._t:
            return "0"
        parts = []
        for en, mu, c in self._t:
            s = f"{rat_str(c)}*T^{rat_str(en)}"
            if mu:
                s += f"*e^({mu}/2)"
            parts.append(s)
        return " + ".join(parts)

    def in_lambda0(self) -> bool:
        return all(en >= 0 for en, _, _ in self._t)

    def in_lambda_plus(self) -> bool:
        return all(en > 0 for en, _, _ in self._t)

    def to_json(self) -> list:
        return [{"c": rat_str(c), "T": rat_str(en), "e": mu} for en, mu, c in self._t]

    @classmethod
    def from_json(cls, data) -> "NovikovElement":
        return cls((rat(d["c"]), rat(d["T"]), int(d["e"])) for d in data)


def _canonical(items) -> tuple:
    """Merge equal (energy, mu), drop zeros, sort.  Keys avoid Fraction hashing."""
    acc: dict = {}
    for en, mu, c in items:
        key = (en.numerator, en.denominator, mu)
        v = acc.get(key)
        if v is None:
            acc[key] = [en, c]
        else:
            v[1] += c
    out = [(key[0] / key[1], en, key[2], c) for key, (en, c) in acc.items() if c]
    # rounding is monotone, so the float decides unless it ties; then the exact value does
    out.sort(key=lambda t: t[:3])
    return tuple(t[1:] for t in out)


def _lift(x) -> NovikovElement:
    if isinstance(x, NovikovElement):
        return x
    return NovikovElement.monomial(x) if x else NovikovElement()


def nov_add(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return NovikovElement._raw(a._t + b._t)


def nov_mul(a: NovikovElement, b: NovikovElement) -> NovikovElement:
    return NovikovElement._raw((e1 + e2, m1 + m2, c1 * c2) for e1, m1, c1 in a._t for e2, m2, c2 in b._t)


def nov_valuation(a: NovikovElement):
    """Smallest energy exponent, or ``INF`` for zero."""
    return a._t[0][0] if a._t else INF


def truncate(a: NovikovElement, E) -> NovikovElement:
    E = rat(E)
    if E < 0:
        raise InvalidCutLevel(f"cut level {E} is negative")
    obj = NovikovElement.__new__(NovikovElement)
    obj._t = tuple(t for t in a._t if t[0] < E)
    return obj


def nov_inverse(a: NovikovElement, E) -> NovikovElement:
    """Inverse of a unit of the nonnegative-energy ring, modulo T^E.

    The energy-zero part must be a single monomial ``c e^(mu/2)``.
    """
    E = rat(E)
    if E < 0:
        raise InvalidCutLevel(f"cut level {E} is negative")
    if not a.in_lambda0() or a.is_zero():
        raise ValueError("not a unit")
    lead = [t for t in a._t if t[0] == 0]
    if len(lead) != 1:
        raise ValueError("not a unit: energy-zero part is not a single monomial")
    u = NovikovElement.monomial(1 / lead[0][2], 0, -lead[0][1])
    # a = lead * (1 - x) with x in the positive-energy ideal
    x = -(truncate(nov_mul(a, u), E) - NovikovElement.one())
    inv, power = NovikovElement.one(), NovikovElement.one()
    while True:
        power = truncate(nov_mul(power, x), E)
        if power.is_zero():
            break
        inv = inv + power
    return truncate(nov_mul(inv, u), E)


Beta = tuple  # (energy: Fraction, mu: int)
BETA0: Beta = (Fraction(0), 0)


def beta_add(b1: Beta, b2: Beta) -> Beta:
    return (b1[0] + b2[0], b1[1] + b2[1])


def beta_sub(b1: Beta, b2: Beta) -> Beta:
    return (b1[0] - b2[0], b1[1] - b2[1])


@dataclass(frozen=True)
class DiscreteSubmonoid:
    generators: tuple = ()

    def __post_init__(self):
        gens = []
        for g in self.generators:
            en, mu = rat(g[0]), int(g[1])
            if en <= 0:
                raise ValueError(f"generator energy must be positive, got {en}")
            if mu % 2:
                raise ValueError(f"generator mu must be even, got {mu}")
            gens.append((en, mu))
        object.__setattr__(self, "generators", tuple(sorted(set(gens))))

    def contains(self, beta: Beta) -> bool:
        beta = (rat(beta[0]), int(beta[1]))
        return beta in set(monoid_below(self, max(beta[0], Fraction(0))))

    def to_json(self) -> dict:
        return {"generators": [[rat_str(e), m] for e, m in self.generators]}

    @classmethod
    def from_json(cls, data) -> "DiscreteSubmonoid":
        gens = data["generators"] if isinstance(data, dict) else data
        return cls(tuple((rat(e), int(m)) for e, m in gens))


def monoid_below(G: DiscreteSubmonoid, E0) -> list:
    E0 = rat(E0)
    if E0 < 0:
        raise InvalidCutLevel(f"bound {E0} is negative")
    seen = {BETA0}
    frontier = [BETA0]
    while frontier:
        nxt = []
        for b in frontier:
            for g in G.generators:
                c = beta_add(b, g)
                if c[0] <= E0 and c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return sorted(seen)


def e_min(G: DiscreteSubmonoid) -> Fraction:
    # generators have positive energy, so the least one is the minimum
    if not G.generators:
        return Fraction(1)
    return min(e for e, _ in G.generators)


def gk_set(G: DiscreteSubmonoid, E0, e0) -> list:
    """Pairs (beta, k) with E(beta) + k*e0 <= E0, sorted by that total."""
    E0, e0 = rat(E0), rat(e0)
    if e0 <= 0:
        raise MinimalEnergyViolation("e0 must be positive")
    if e0 > e_min(G):
        raise MinimalEnergyViolation(f"e0 = {e0} exceeds e_min = {e_min(G)}")
    out = []
    for b in monoid_below(G, E0):
        k = 0
        while b[0] + k * e0 <= E0:
            out.append((b, k))
            k += 1
    out.sort(key=lambda bk: (bk[0][0] + bk[1] * e0, bk[0][0], bk[1], bk[0][1]))
    return out
