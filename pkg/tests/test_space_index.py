from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from critspde.space_index import (
    BesovIndex,
    DomainError,
    SobolevIndex,
    SpacePair,
    TimeWeightIndex,
    complex_interpolate,
    identify_scale_space,
    interpolation_smoothness,
    is_exact,
    mixed_derivative_index,
    num,
    sobolev_embeds,
    time_embeds,
    trace_embedding_ok,
    trace_embedding_ok_unweighted,
    trace_space,
    valid_time_weight,
)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=12)
unit_open = st.fractions(min_value=0, max_value=1, max_denominator=24).filter(lambda t: 0 < t < 1)
qs = st.fractions(min_value=Fr(11, 10), max_value=12, max_denominator=10)


def test_num_promotes_ints_and_keeps_floats():
    assert num(3) == Fr(3) and isinstance(num(3), Fr)
    assert isinstance(num(0.5), float)
    assert is_exact(num(2)) and not is_exact(0.5)


def test_index_invariants():
    with pytest.raises(DomainError):
        SobolevIndex(0, 1)
    with pytest.raises(DomainError):
        SobolevIndex(float("inf"), 2)
    with pytest.raises(DomainError):
        BesovIndex(0, 2, 1)
    with pytest.raises(DomainError):
        TimeWeightIndex(2, Fr(1, 2))
    with pytest.raises(DomainError):
        TimeWeightIndex(4, 1)  # kappa must stay below p/2 - 1 = 1
    assert valid_time_weight(6, Fr(3, 2)) and not valid_time_weight(6, 2)


def test_pair_invariants():
    with pytest.raises(DomainError):
        SpacePair(SobolevIndex(-1, 2), SobolevIndex(1, 3))
    with pytest.raises(DomainError):
        SpacePair(SobolevIndex(-1, 2), SobolevIndex(2, 2))
    with pytest.raises(DomainError):
        SpacePair(SobolevIndex(-1, 2), SobolevIndex(1, 2), scale_tag="robin")


def test_complex_interpolate_examples():
    assert complex_interpolate(SpacePair.shifted(0, 2), Fr(1, 2)).s == 0
    assert complex_interpolate(SpacePair(SobolevIndex(-2, 2), SobolevIndex(2, 2), 4), Fr(3, 4)).s == 1
    # beta = (1 + theta' + s')/2 lands on smoothness theta'
    for th, s in [(Fr(1, 5), Fr(1, 3)), (Fr(2, 7), Fr(1, 2))]:
        pair = SpacePair.shifted(s, 3)
        assert complex_interpolate(pair, (1 + th + s) / 2).s == th
    with pytest.raises(DomainError):
        complex_interpolate(SpacePair.shifted(0, 2), 1)


def test_trace_space_examples():
    assert trace_space(SpacePair.shifted(0, 3), TimeWeightIndex(4, 0)) == BesovIndex(Fr(1, 2), 3, 4)
    # order-4 pair shifted by s, p = 2 -> smoothness -s
    s = Fr(2, 5)
    pair = SpacePair.shifted(s, 2, order=4)
    assert trace_space(pair, TimeWeightIndex(2, 0)).s == -s


def test_trace_space_conservative_rd_critical():
    d, q, h, s, p = 3, Fr(4), Fr(2), Fr(1, 2), Fr(4)
    # kappa_crit from p * (h/(2(h-1)) - (d/q + s)/2) - 1
    kc = p * (h / (2 * (h - 1)) - (d / q + s) / 2) - 1
    assert trace_space(SpacePair.shifted(s, q), TimeWeightIndex(p, kc)).s == Fr(d) / q - 1 / (h - 1)


def test_sobolev_embeds_examples():
    assert sobolev_embeds(3, SobolevIndex(1, 2), SobolevIndex(0, 6))
    assert not sobolev_embeds(3, SobolevIndex(0, 2), SobolevIndex(0, 7))
    d, q, h, s, r = 2, Fr(3), Fr(3), Fr(1, 4), Fr(2)
    theta = Fr(d) / q * (1 - 1 / h) - s / h
    # theta - d/q = -d/(h r) exactly when r solves the companion relation
    r = Fr(d) / (h * (Fr(d) / q - theta))
    assert sobolev_embeds(d, SobolevIndex(theta, q), SobolevIndex(0, h * r))
    assert theta - Fr(d) / q == -Fr(d) / (h * r)


def test_time_embeds_examples():
    tw = TimeWeightIndex(4, 0)
    assert time_embeds(tw, Fr(1, 3), tw, Fr(1, 3))
    assert time_embeds(TimeWeightIndex(4, 0), Fr(1, 2), TimeWeightIndex(8, 0), Fr(1, 4))
    # (4, 1, 1/2) vs (8, 0, 0): the three conditions p0 <= p1, 0 <= 1/4 and
    # 1/2 - 2/4 = 0 >= -1/8 all hold, so the embedding formula returns true
    assert time_embeds(TimeWeightIndex(6, 1), Fr(1, 2), TimeWeightIndex(8, 0), 0)


def test_mixed_derivative_examples():
    assert mixed_derivative_index(2, 0, 0, 4, 1, 1, 0) == (2, 0, 0)
    assert mixed_derivative_index(2, 0, 0, 4, 1, 1, Fr(1, 2)) == (Fr(8, 3), Fr(1, 3), Fr(1, 2))
    p, k, s = mixed_derivative_index(5, Fr(1, 2), 0, 5, Fr(1, 2), 1, Fr(1, 3))
    assert (p, k) == (5, Fr(1, 2))


def test_trace_embedding_examples():
    assert trace_embedding_ok(Fr(49, 100), TimeWeightIndex(4, 0))
    tw = TimeWeightIndex(6, Fr(1, 2))
    assert not trace_embedding_ok(tw.loss, tw)
    # loss (1+kappa)/p = 2/5; 0.3 > 0.4 fails
    assert not trace_embedding_ok(Fr(3, 10), TimeWeightIndex(10, 3))
    assert trace_embedding_ok_unweighted(Fr(3, 10), 4)


def test_identify_scale_examples():
    assert identify_scale_space("dirichlet", Fr(3, 10), 2).kind == "plain"
    assert identify_scale_space("neumann", Fr(19, 10), 2).kind == "zero-normal-derivative"
    assert not identify_scale_space("dirichlet", Fr(1, 2), 2).identified
    assert identify_scale_space("dirichlet", Fr(-3, 10), 2).kind == "dual"
    assert identify_scale_space("periodic", 5, 3).kind == "plain"


@given(a=rationals, b=rationals, t1=unit_open, t2=unit_open, q=qs)
def test_reiteration(a, b, t1, t2, q):
    pair = SpacePair(SobolevIndex(a, q), SobolevIndex(a + 2, q))
    outer = complex_interpolate(pair, t1)
    # interpolating between X0 and [X0,X1]_{t1} at t2 equals [X0,X1]_{t1 t2}
    s_nested = (1 - t2) * pair.x0.s + t2 * outer.s
    assert s_nested == complex_interpolate(pair, t1 * t2).s


@given(p=st.integers(3, 20), kappa=st.fractions(0, 5, max_denominator=8), q=qs, s=rationals)
def test_trace_space_monotone(p, kappa, q, s):
    if not valid_time_weight(p, kappa) or not valid_time_weight(p + 1, kappa):
        return
    pair = SpacePair.shifted(s, q)
    lo = trace_space(pair, TimeWeightIndex(p, kappa)).s
    hi = trace_space(pair, TimeWeightIndex(p + 1, kappa)).s
    assert lo < hi < pair.x1.s
    if valid_time_weight(p, kappa + Fr(1, 8)):
        assert trace_space(pair, TimeWeightIndex(p, kappa + Fr(1, 8))).s < lo


@given(d=st.integers(1, 4), s=st.lists(rationals, min_size=3, max_size=3), q=st.lists(qs, min_size=3, max_size=3))
def test_sobolev_embeds_preorder(d, s, q):
    a, b, c = (SobolevIndex(si, qi) for si, qi in zip(s, q))
    assert sobolev_embeds(d, a, a)
    if sobolev_embeds(d, a, b) and sobolev_embeds(d, b, c):
        assert sobolev_embeds(d, a, c)


@given(t=st.fractions(0, 1, max_denominator=30), q=qs, s=rationals)
def test_interpolation_endpoints_and_exactness(t, q, s):
    pair = SpacePair.shifted(s, q, order=4)
    val = interpolation_smoothness(pair, t)
    assert isinstance(val, Fr)
    assert pair.x0.s <= val <= pair.x1.s
