from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.errors import InvalidCutLevel, MinimalEnergyViolation
from artifact.novikov import (BETA0, INF, DiscreteSubmonoid, NovikovElement, e_min, gk_set, monoid_below,
                              nov_add, nov_inverse, nov_mul, nov_valuation, rat, truncate)

from oracles import monoid_elements

T = NovikovElement.monomial

energies = st.fractions(min_value=0, max_value=5, max_denominator=6)
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
terms = st.tuples(coeffs, energies, st.integers(-3, 3).map(lambda m: 2 * m))
elements = st.lists(terms, max_size=5).map(NovikovElement)


def test_addition_examples():
    assert T(1, F(1, 2)) + T(-1, F(1, 2)) == 0
    assert (T(2, 0) + T(3, 0, 2)).terms == NovikovElement([(2, 0, 0), (3, 0, 2)]).terms
    assert (T(1, F(1, 3)) + T(1, 1)) + T(1, F(1, 3)) == NovikovElement([(2, F(1, 3), 0), (1, 1, 0)])


def test_multiplication_examples():
    a = T(1, F(1, 2)) + T(2, 1)
    assert a * T(3, F(1, 4)) == NovikovElement([(3, F(3, 4), 0), (6, F(5, 4), 0)])
    assert T(1, 0, 2) * T(1, 0, -2) == NovikovElement.one()
    assert (a * NovikovElement.zero()).is_zero()


def test_valuation_examples():
    assert nov_valuation(T(3, F(1, 2), 4) + T(5, 2)) == F(1, 2)
    assert nov_valuation(NovikovElement.zero()) == INF
    assert nov_valuation(NovikovElement.one()) == 0


def test_truncate_examples():
    assert truncate(T(1, F(1, 2)) + T(1, 2), 1) == T(1, F(1, 2))
    assert truncate(T(1, F(1, 2)) + T(1, 0), 0).is_zero()
    with pytest.raises(InvalidCutLevel):
        truncate(T(1, 1), -1)


@given(elements, elements, elements)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + (-a)).is_zero()
    assert a * NovikovElement.one() == a


@given(elements, elements)
def test_valuation_laws(a, b):
    assert nov_valuation(nov_add(a, b)) >= min(nov_valuation(a), nov_valuation(b))
    # exact multiplicativity can fail only through cancellation of leading terms
    if not a.is_zero() and not b.is_zero():
        assert nov_valuation(nov_mul(a, b)) >= nov_valuation(a) + nov_valuation(b)
    if len(a.terms) == 1 and not b.is_zero():
        assert nov_valuation(a * b) == nov_valuation(a) + nov_valuation(b)


@given(elements, elements, energies)
def test_truncate_is_a_homomorphism(a, b, E):
    assert truncate(a + b, E) == truncate(a, E) + truncate(b, E)
    assert truncate(a * b, E) == truncate(truncate(a, E) * truncate(b, E), E)


@given(st.lists(st.tuples(coeffs, energies.map(lambda e: e + F(1, 10)), st.just(0)), max_size=4),
       coeffs.filter(bool), energies)
def test_inverse(tail, lead, E):
    a = T(lead) + NovikovElement(tail)
    inv = nov_inverse(a, E)
    assert truncate(a * inv, E) == truncate(NovikovElement.one(), E)


@given(elements)
def test_json_round_trip(a):
    assert NovikovElement.from_json(a.to_json()) == a


def test_rat_parsing():
    assert rat("3/6") == F(1, 2)
    assert rat(4) == F(4)
    with pytest.raises(ZeroDivisionError):
        rat("1/0")
    with pytest.raises(TypeError):
        rat(0.5)


def test_monoid_below_examples():
    assert monoid_below(DiscreteSubmonoid(((1, 2),)), F(5, 2)) == [(0, 0), (1, 2), (2, 4)]
    assert monoid_below(DiscreteSubmonoid(()), 7) == [BETA0]
    got = monoid_below(DiscreteSubmonoid(((1, 0), (F(3, 2), 2))), 3)
    assert got == [(0, 0), (1, 0), (F(3, 2), 2), (2, 0), (F(5, 2), 2), (3, 0), (3, 4)]


@given(st.lists(st.tuples(st.integers(1, 4).map(lambda n: F(n, 2)), st.integers(-2, 2).map(lambda m: 2 * m)),
                max_size=3), st.integers(0, 8).map(lambda n: F(n, 2)))
def test_monoid_below_matches_brute_force(gens, E):
    assert monoid_below(DiscreteSubmonoid(tuple(gens)), E) == monoid_elements(gens, E)


def test_e_min():
    assert e_min(DiscreteSubmonoid(((1, 2),))) == 1
    assert e_min(DiscreteSubmonoid((( F(3, 2), 0), (1, 2)))) == 1
    assert e_min(DiscreteSubmonoid(())) == 1


def test_gk_set_examples():
    b0, b1 = BETA0, (F(1), 0)
    assert gk_set(DiscreteSubmonoid(()), 2, 1) == [(b0, 0), (b0, 1), (b0, 2)]
    assert gk_set(DiscreteSubmonoid(()), 0, 1) == [(b0, 0)]
    assert gk_set(DiscreteSubmonoid(((1, 0),)), 1, 1) == [(b0, 0), (b0, 1), (b1, 0)]
    with pytest.raises(MinimalEnergyViolation):
        gk_set(DiscreteSubmonoid(((1, 0),)), 1, 2)


@given(st.integers(0, 8).map(lambda n: F(n, 2)), st.sampled_from([F(1, 2), F(1, 3), F(1)]))
def test_gk_set_bounds_and_order(E0, e0):
    G = DiscreteSubmonoid(((1, 0), (1, 2)))
    out = gk_set(G, E0, e0)
    totals = [b[0] + k * e0 for b, k in out]
    assert all(t <= E0 for t in totals)
    assert totals == sorted(totals)
    assert len(set(out)) == len(out)
