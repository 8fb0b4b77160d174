import random

import pytest
from hypothesis import given, settings, strategies as st

from tractorcheck.jets import (
    JetMismatch,
    JetScalar,
    OrderExhausted,
    zero_jet,
)
from tractorcheck.rationals import Q


def test_one_plus_t_times_one_minus_t():
    # (1+t)(1-t) = 1 - t^2, hand expansion at order 2
    t = JetScalar.variable(1, 2, 0)
    prod = (1 + t) * (1 - t)
    assert prod.coefficient((0,)) == 1
    assert prod.coefficient((1,)) == 0
    assert prod.coefficient((2,)) == -1


def test_reciprocal_of_two_plus_t():
    # 1/(2+t) = 1/2 - t/4 + t^2/8
    t = JetScalar.variable(1, 2, 0)
    r = (2 + t).reciprocal()
    assert r.coefficient((0,)) == Q(1, 2)
    assert r.coefficient((1,)) == Q(-1, 4)
    assert r.coefficient((2,)) == Q(1, 8)


def test_hand_expanded_bivariate_product():
    # (1 + x + 2y)(3 - x) = 3 + 2x + 6y - x^2 - 2xy, frozen by hand
    x = JetScalar.variable(2, 2, 0)
    y = JetScalar.variable(2, 2, 1)
    p = (1 + x + 2 * y) * (3 - x)
    assert p.coefficient((0, 0)) == 3
    assert p.coefficient((1, 0)) == 2
    assert p.coefficient((0, 1)) == 6
    assert p.coefficient((2, 0)) == -1
    assert p.coefficient((1, 1)) == -2
    assert p.coefficient((0, 2)) == 0


def _seeded_jet(nvars, order, seed, dense=True):
    rng = random.Random(seed)
    from tractorcheck.jets import _space

    sp = _space(nvars).ensure(order)
    coeffs = {}
    for e in sp.exps[: sp.sizes[order]]:
        if dense or rng.random() < 0.5:
            coeffs[e] = Q(rng.randint(-9, 9), rng.choice([1, 2, 3, 4, 5]))
    return JetScalar.from_terms(nvars, order, coeffs)


def test_mixed_partials_commute_on_seeded_jet():
    a = _seeded_jet(3, 4, seed=20240811)
    d12 = a.partial(0).partial(1)
    d21 = a.partial(1).partial(0)
    assert d12 == d21


def test_truncation_is_a_prefix():
    a = _seeded_jet(2, 4, seed=7)
    t = a.truncated(2)
    assert t.order == 2
    assert t.coeffs == a.coeffs[: len(t.coeffs)]


def test_order_budget_guard():
    a = JetScalar.constant(2, 0, 5)
    with pytest.raises(OrderExhausted):
        a.partial(0)


def test_mixing_orders_raises():
    a = JetScalar.constant(2, 2, 1)
    b = JetScalar.constant(2, 3, 1)
    with pytest.raises(JetMismatch):
        a + b
    with pytest.raises(JetMismatch):
        a * b
    c = JetScalar.constant(3, 2, 1)
    with pytest.raises(JetMismatch):
        a * c


def test_max_order_guard():
    with pytest.raises(ValueError):
        JetScalar.constant(2, 11, 1)


def test_power_matches_repeated_multiplication():
    a = _seeded_jet(2, 3, seed=3)
    assert a**3 == a * a * a
    assert a**0 == JetScalar.constant(2, 3, 1)


def test_negative_power_is_reciprocal_power():
    a = 2 + _seeded_jet(2, 3, seed=4) * Q(1, 10)
    assert a**-2 == (a.reciprocal()) ** 2


def test_sqrt_roundtrip():
    s = _seeded_jet(3, 4, seed=11)
    a = s - s.value() + Q(9, 4)  # constant term pinned to a perfect square
    r = a.sqrt()
    assert r * r == a
    assert r.value() == Q(3, 2)


def test_sqrt_rejects_non_square_constant():
    s = _seeded_jet(2, 3, seed=12)
    a = s - s.value() + 3
    with pytest.raises(ValueError):
        a.sqrt()


def test_zero_jet_is_shared_and_inert():
    z = zero_jet(2, 3)
    a = _seeded_jet(2, 3, seed=5)
    assert (a * z).is_zero()
    assert a + z == a


# ---------------------------------------------------------------------------
# property tests

small_q = st.fractions(min_value=-9, max_value=9, max_denominator=5)


@st.composite
def jets(draw, nvars=2, order=3):
    from tractorcheck.jets import _space

    sp = _space(nvars).ensure(order)
    n = sp.sizes[order]
    coeffs = draw(st.lists(small_q, min_size=n, max_size=n))
    return JetScalar(nvars, order, [Q(c) for c in coeffs])


@settings(max_examples=60, deadline=None)
@given(jets(), jets(), jets())
def test_ring_laws(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) + c == a + (b + c)


@settings(max_examples=60, deadline=None)
@given(jets(order=4), jets(order=4), st.integers(min_value=0, max_value=4))
def test_truncation_commutes_with_multiplication(a, b, k):
    assert (a * b).truncated(k) == a.truncated(k) * b.truncated(k)


@settings(max_examples=60, deadline=None)
@given(jets(order=4), jets(order=4), st.integers(min_value=0, max_value=1))
def test_leibniz_rule(a, b, v):
    lhs = (a * b).partial(v)
    rhs = a.partial(v) * b.truncated(3) + a.truncated(3) * b.partial(v)
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(jets())
def test_reciprocal_is_inverse(a):
    a = a + 7  # push the constant term away from zero
    assert a * a.reciprocal() == JetScalar.constant(2, 3, 1)


@settings(max_examples=40, deadline=None)
@given(jets(), jets(), st.integers(min_value=0, max_value=1))
def test_partial_is_linear(a, b, v):
    assert (a + b).partial(v) == a.partial(v) + b.partial(v)
