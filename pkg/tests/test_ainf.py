import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import ainf
from artifact.ainf import (PW, AinfOperations, PseudoIsotopy, ainf_defect, bar_sign_audit, check_partial_ainf,
                           check_pseudoisotopy, collared_check, constant_isotopy, energy_cut_ainf,
                           energy_cut_isotopy, homotopy_limit_ainf, integrate_isotopy, isotopy_defect,
                           promote_via_isotopy, restrict_endpoint)
from artifact.errors import OutOfDomain, PreconditionFailed
from artifact.instances import (ainf_promotion_instance, ainf_structure, ainf_tower_instance, random_pw,
                                seeded_isotopy)
from artifact.novikov import BETA0, DiscreteSubmonoid, gk_set

G = DiscreteSubmonoid(((1, 0),))
B1 = (F(1), 0)
BR = (0, F(1, 2), 1)
unit_t = st.fractions(min_value=0, max_value=1, max_denominator=12)
seeds = st.integers(0, 30)


# ---------------------------------------------------------------- piecewise polynomials

pws = st.integers(0, 10 ** 6).map(lambda s: random_pw(random.Random(s), BR, degree=3))


@given(pws, pws, unit_t)
def test_pw_ring_ops_are_pointwise(p, q, t):
    assert (p + q)(t) == p(t) + q(t)
    assert (p * q)(t) == p(t) * q(t)
    assert (p - q)(t) == p(t) - q(t)
    assert (3 * p)(t) == 3 * p(t)


@given(pws, unit_t)
def test_pw_integral(p, a):
    P = p.integral_from(a)
    assert P.is_continuous()
    assert P(a) == 0
    assert P.deriv() == p


def test_pw_domain():
    p = PW.const(BR, 2)
    with pytest.raises(OutOfDomain):
        p(F(3, 2))
    with pytest.raises(ValueError):
        PW((0, 0), [(1,)])
    assert not PW.const(BR, 0)


# ---------------------------------------------------------------- A-infinity relations

@pytest.mark.parametrize("dga,n", [(ainf.sphere_dga(1), 1), (ainf.sphere_dga(2), 2), (ainf.sphere_dga(3), 3),
                                   (ainf.interval_dga(), 1), (ainf.pair_dga(), 2), (ainf.point_dga(), 0)])
def test_dga_is_ainf(dga, n):
    A = AinfOperations(dga, n, DiscreteSubmonoid(()), 3, 1)
    assert ainf_defect(A, 1, BETA0) == {}
    assert ainf_defect(A, 2, BETA0) == {}
    assert ainf_defect(A, 3, BETA0) == {}
    assert check_partial_ainf(A).ok


@settings(max_examples=10)
@given(seeds)
def test_deformed_structure_is_ainf(seed):
    A = ainf_structure(seed, ainf.interval_dga(), 1, G, 2, F(1, 2))
    assert check_partial_ainf(A).ok


def test_corrupted_operation_fails():
    A = ainf_structure(0, ainf.interval_dga(), 1, G, 2, F(1, 2))
    assert A.table[(1, B1)]
    ops = {k: v for k, v in A.table.items() if k[1] != BETA0}
    ops[(1, B1)] = {}
    bad = AinfOperations(A.dga, 1, G, 2, F(1, 2), ops)
    assert ainf_defect(bad, 2, B1) != {}
    rep = check_partial_ainf(bad)
    assert [f[0] for f in rep.failures] == [(2, B1)]


def test_operation_validation():
    dga = ainf.pair_dga()
    with pytest.raises(ValueError):
        AinfOperations(dga, 2, G, 1, 1, {(1, B1): {(0,): {1: 1}}})  # outside the window
    with pytest.raises(ValueError):
        AinfOperations(dga, 2, G, 2, 1, {(1, B1): {(0,): {0: 1}}})  # wrong degree
    with pytest.raises(ValueError):
        AinfOperations(dga, 2, G, 2, 1, {(3, BETA0): {(0, 0, 0): {1: 1}}})


# ---------------------------------------------------------------- pseudo-isotopies

def test_constant_family_has_zero_defect():
    A = ainf_structure(1, ainf.interval_dga(), 1, G, 2, F(1, 2))
    I = constant_isotopy(A, BR)
    for k, b in I.keys():
        assert isotopy_defect(I, k, b) == {}
    assert check_pseudoisotopy(I).ok
    assert collared_check(constant_isotopy(A, (-1, 0, 1, 2)), F(1, 2))
    for t in (0, F(1, 3), 1):
        assert restrict_endpoint(I, t) == A


def test_linear_family_defect_is_slope():
    dga = ainf.pair_dga()
    lin = PW(BR, [(0, 3), (0, 3)])
    I = PseudoIsotopy(dga, 2, G, 2, 1, BR, {(1, B1): {(0,): {1: lin}}})
    assert isotopy_defect(I, 1, B1) == {(0,): {1: PW.const(BR, 3)}}
    rep = check_pseudoisotopy(I)
    assert [f[:2] for f in rep.failures] == [("isotopy equation", (1, B1))]


def test_fixed_t_failure_is_localized():
    # m_{1,beta}(1) = (t - 1/2) v breaks the unit relation except at t = 1/2
    dga = ainf.interval_dga()
    a = PW(BR, [(F(-1, 2), 1), (F(-1, 2), 1)])
    I = PseudoIsotopy(dga, 1, G, 2, F(1, 2), BR, {(1, B1): {(0,): {2: a}}})
    rep = check_pseudoisotopy(I)
    fixed = [f for f in rep.failures if f[0] == "A-infinity relation at fixed t"]
    assert fixed
    for f in fixed:
        assert F(1, 2) not in f[2] and 0 in f[2]


def test_discontinuous_family_fails():
    dga = ainf.pair_dga()
    jump = PW(BR, [(0,), (1,)])
    I = PseudoIsotopy(dga, 2, G, 2, 1, BR, {}, {(1, B1): {(0,): {0: jump}}})
    assert ("continuity", "c", (1, B1)) in check_pseudoisotopy(I).failures


def test_seeded_isotopy_solves_the_equation():
    m1, I = seeded_isotopy(0)
    assert I.c and I.m[(1, B1)]
    for b, k in gk_set(G, 2, 1):
        assert isotopy_defect(I, k, b) == {}
    assert check_pseudoisotopy(I).ok
    assert restrict_endpoint(I, 1) == m1


def test_collared_check():
    br = (F(-1, 4), 0, 1, F(5, 4))
    bump = PW(br, [(0,), (0, 1, -1), (0,)])
    m1 = AinfOperations(ainf.pair_dga(), 2, G, 2, 1, {})
    I = integrate_isotopy(m1, {(1, B1): {(0,): {0: bump}}}, br)
    assert check_pseudoisotopy(I).ok
    assert collared_check(I, F(1, 4))
    slope = PW(br, [(0, 1), (0,), (0,)])
    J = PseudoIsotopy(m1.dga, 2, G, 2, 1, br, {(1, B1): {(0,): {1: slope}}})
    assert not collared_check(J, F(1, 4))
    # a family without collars is not collared
    assert not collared_check(constant_isotopy(m1, BR), F(1, 4))


@settings(max_examples=10)
@given(seeds, unit_t)
def test_restrict_commutes_with_cut(seed, t):
    _, _, I = ainf_promotion_instance(seed % 4)
    E = F(1)
    assert energy_cut_ainf(restrict_endpoint(I, t), E) == restrict_endpoint(energy_cut_isotopy(I, E), t)


@settings(max_examples=10)
@given(seeds, unit_t)
def test_isotopy_is_ainf_at_every_t(seed, t):
    _, I = seeded_isotopy(seed)
    assert check_partial_ainf(restrict_endpoint(I, t)).ok


# ---------------------------------------------------------------- promotion and limits

def test_constant_isotopy_promotion_returns_m1():
    m1 = ainf_structure(2, ainf.interval_dga(), 1, G, 3, F(1, 2))
    m0 = energy_cut_ainf(m1, F(3, 2))
    m0p, Ip = promote_via_isotopy(m0, m1, constant_isotopy(m0, BR))
    assert m0p == m1
    assert check_pseudoisotopy(Ip).ok


def test_same_level_promotion_is_identity():
    m0, m1, I = ainf_promotion_instance(0)
    m1c = energy_cut_ainf(m1, m0.E0)
    assert promote_via_isotopy(m0, m1c, I) == (m0, I)


@settings(max_examples=4)
@given(st.integers(0, 20))
def test_seeded_promotion(seed):
    m0, m1, I = ainf_promotion_instance(seed)
    m0p, Ip = promote_via_isotopy(m0, m1, I)
    assert m0p.E0 == m1.E0
    assert check_partial_ainf(m0p).ok
    assert check_pseudoisotopy(Ip).ok
    assert energy_cut_ainf(m0p, m0.E0) == m0
    assert restrict_endpoint(Ip, 1) == m1
    assert restrict_endpoint(Ip, 0) == m0p


def test_promotion_rejects_mismatched_endpoint():
    m0, m1, I = ainf_promotion_instance(1)
    other = ainf_structure(99, ainf.interval_dga(), 1, G, m0.E0, m0.e0)
    with pytest.raises(PreconditionFailed):
        promote_via_isotopy(other, m1, I)


def test_limit_two_stage_is_single_promote():
    stages, isos = ainf_tower_instance(3, cuts=(1, 2))
    res = homotopy_limit_ainf(stages, isos)
    direct, _ = promote_via_isotopy(stages[0], stages[1], isos[0])
    assert res.structure == direct


def test_limit_three_stage():
    stages, isos = ainf_tower_instance(4)
    res = homotopy_limit_ainf(stages, isos)
    assert res.structure.E0 == 2
    assert check_partial_ainf(res.structure).ok
    assert len(res.certificates) == 3 and all(c[-1] for c in res.certificates)


def test_limit_constant_tower():
    A = ainf_structure(5, ainf.interval_dga(), 1, G, 2, F(1, 2))
    cuts = (1, F(3, 2), 2)
    stages = [energy_cut_ainf(A, E) for E in cuts]
    isos = [constant_isotopy(s, BR) for s in stages[:-1]]
    assert homotopy_limit_ainf(stages, isos).structure == A


# ---------------------------------------------------------------- sign audit

@pytest.mark.parametrize("dimL", [2, 3])
def test_bar_sign_audit(dimL):
    rep = bar_sign_audit(dimL, 4)
    assert rep.ok, rep.failures[:3]
    assert rep.info["double_terms"] > 0


def test_bar_sign_audit_mutation_fails():
    assert not bar_sign_audit(2, 4, drop_k1=True).ok


def test_bar_sign_audit_bound():
    with pytest.raises(ValueError):
        bar_sign_audit(2, 7)
