from fractions import Fraction as F
from itertools import permutations
from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.corners import (CollaredCube, CornerComponent, SmoothingMap, admissible_coord_check, classify_point,
                              covering_map, covering_square_check, normalized_corner, partial_collar_box,
                              partial_collar_commute, partition_volume, smoothing_eval,
                              smoothing_property_check)
from artifact.errors import InvalidPartition, OutOfDomain, Unsupported

TAU = F(1, 4)


def test_component_counts_examples():
    assert len(normalized_corner(2, 2)) == 4
    assert len(normalized_corner(2, 1)) == 4
    assert normalized_corner(3, 0) == [CornerComponent((), ())]
    assert normalized_corner(2, 3) == []


@pytest.mark.parametrize("n", range(6))
def test_component_counts(n):
    for k in range(n + 1):
        comps = normalized_corner(n, k)
        assert len(comps) == len(set(comps)) == comb(n, k) * 2 ** k


def test_component_dict_round_trip():
    c = CornerComponent.from_dict({3: 1, 1: 0})
    assert c.A == (1, 3) and c.sigma == (0, 1)
    assert CornerComponent.from_dict(c.as_dict()) == c


def test_covering_examples():
    _, info = covering_map(2, 1, 1)
    assert info["sources"] == 8 and info["targets"] == 4
    assert info["histogram"] == {2: 4}
    table, info = covering_map(3, 0, 2)
    assert info["histogram"] == {1: info["targets"]}
    assert len(set(table.values())) == len(table)


@pytest.mark.parametrize("n", range(6))
def test_covering_fibers(n):
    for k in range(n + 1):
        for l in range(n - k + 1):
            _, info = covering_map(n, l, k)
            assert info["surjective"]
            assert list(info["histogram"]) == [comb(k + l, l)]


@pytest.mark.parametrize("n", range(6))
def test_covering_squares(n):
    for k1 in range(n + 1):
        for k2 in range(n - k1 + 1):
            for k3 in range(n - k1 - k2 + 1):
                assert covering_square_check(n, k1, k2, k3)


def test_classify_examples():
    C = CollaredCube(2, TAU)
    assert classify_point(C, (F(1, 2), F(1, 2)))[0] == 0
    k, comp = classify_point(C, (-TAU / 2, F(1, 2)))
    assert k == 1 and comp.as_dict() == {1: 0}
    k, comp = classify_point(C, (-TAU, 1 + TAU))
    assert k == 2 and comp.as_dict() == {1: 0, 2: 1}
    with pytest.raises(OutOfDomain):
        classify_point(C, (2, 0))


coords = st.fractions(min_value=F(-1, 4), max_value=F(5, 4), max_denominator=16)


@given(st.lists(coords, min_size=3, max_size=3))
def test_retraction_idempotent(x):
    C = CollaredCube(3, TAU)
    r = C.retract(x)
    assert C.retract(r) == r
    assert classify_point(C, r)[0] == 0
    # a point of a codim-k stratum retracts onto the matching closed face
    k, comp = classify_point(C, x)
    assert all(r[i - 1] == s for i, s in comp.as_dict().items())


@pytest.mark.parametrize("n", range(5))
def test_partition_volume(n):
    assert partition_volume(CollaredCube(n, TAU)) == (1 + 2 * TAU) ** n


def test_partial_collar_examples():
    assert partial_collar_commute(2, [(1, 0)], [], TAU)
    assert partial_collar_commute(2, [(1, 0)], [(2, 0)], TAU)
    assert partial_collar_commute(2, [(2, 0)], [(1, 0)], TAU)
    assert partial_collar_box(2, {(1, 0)}, TAU) == ((-TAU, 1), (0, 1))
    with pytest.raises(InvalidPartition):
        partial_collar_commute(2, [(1, 0)], [(1, 0), (2, 1)], TAU)


@pytest.mark.parametrize("n", range(1, 5))
def test_partial_collar_exhaustive(n):
    faces = [(i, s) for i in range(1, n + 1) for s in (0, 1)]
    # every ordered split of a face subset into two disjoint parts
    for mask in range(3 ** len(faces)):
        c1, c2, m = [], [], mask
        for f in faces:
            m, r = divmod(m, 3)
            if r == 1:
                c1.append(f)
            elif r == 2:
                c2.append(f)
        assert partial_collar_commute(n, c1, c2, TAU)


def test_phi2_examples():
    x, s = smoothing_eval(2, (1, 1))
    assert x == pytest.approx((0.0,), abs=1e-15) and s == pytest.approx(sqrt(2), abs=1e-15)
    x, s = smoothing_eval(2, (1, 0))
    assert x == pytest.approx((-1.0,), abs=1e-15) and s == pytest.approx(0.0, abs=1e-15)
    assert smoothing_eval(2, (0, 0)) == ((0.0,), 0.0)


def test_phi2_action_is_negation():
    assert np.allclose(SmoothingMap(2).representation((1, 0)), [[-1.0]])


@pytest.mark.parametrize("k,tol", [(1, 1e-15), (2, 1e-12), (3, 1e-9)])
def test_smoothing_properties(k, tol):
    rep = smoothing_property_check(k, 10_000, tol)
    assert rep.ok, rep.failures
    if k == 1:
        assert all(v == 0 for v in rep.info["max_violation"].values())


def test_phi3_representation_is_a_homomorphism():
    S = SmoothingMap(3)
    for p in permutations(range(3)):
        for q in permutations(range(3)):
            pq = tuple(p[q[i]] for i in range(3))
            assert np.allclose(S.representation(pq), S.representation(q) @ S.representation(p)) or \
                np.allclose(S.representation(pq), S.representation(p) @ S.representation(q))


def test_smoothing_unsupported():
    with pytest.raises(Unsupported):
        SmoothingMap(4)
    with pytest.raises(OutOfDomain):
        SmoothingMap(2).evaluate([-1, 0])


def test_admissible_identity():
    rep = admissible_coord_check("0")
    assert rep.ok
    assert set(rep.info["envelope_C"].values()) == {0.0}
    assert rep.info["second_derivative_at_0"] == 0.0


def test_admissible_translation_curvature():
    rep = admissible_coord_check("1")
    assert rep.info["second_derivative_at_0"] == pytest.approx(-2, abs=1e-6)


def test_admissible_exponential_decay():
    rep = admissible_coord_check("exp(-T)")
    assert rep.ok, rep.failures
    assert len(rep.info["envelope_C"]) == 4


def test_admissible_slow_change_fails():
    # f(T) = T / S = T / log T gives t' - t ~ 1/S^3: no exponential envelope
    assert not admissible_coord_check("T/log(T)").ok
