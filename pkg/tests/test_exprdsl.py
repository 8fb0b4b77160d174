import random

import pytest
from hypothesis import given, settings, strategies as st

from tractorcheck.exprdsl import (
    Div,
    ExprError,
    Lit,
    Mul,
    Pow,
    SceneError,
    Var,
    derivative,
    eval_jet,
    parse_expr,
    parse_scene,
    serialize_scene,
    to_string,
)
from tractorcheck.jets import JetScalar
from tractorcheck.rationals import Q

SYMS = ("x1", "x2", "x3")


def _env(point, order=4):
    return {
        c: JetScalar.variable(len(SYMS), order, i, v)
        for i, (c, v) in enumerate(zip(SYMS, point))
    }


def test_rational_literal_vs_power_precedence():
    # 1/2^3 must follow the grammar: '^' binds before '/', value 1/8
    e = parse_expr("1/2^3", SYMS)
    assert e == Div(Lit(Q(1)), Pow(Lit(Q(2)), 3))
    # while a plain 1/2 is a literal
    assert parse_expr("1/2", SYMS) == Lit(Q(1, 2))


def test_unary_minus_binds_looser_than_power():
    e = parse_expr("-x1^2", SYMS)
    env = _env((Q(3), Q(0), Q(0)))
    assert eval_jet(e, env).value() == -9


def test_zero_denominator_literal_rejected():
    with pytest.raises(ExprError):
        parse_expr("1/0", SYMS)


def test_unknown_identifier_rejected():
    with pytest.raises(ExprError):
        parse_expr("x1 + y", SYMS)


def test_eval_division_by_vanishing_expression():
    e = parse_expr("1/(x1 - 1)", SYMS)
    with pytest.raises(ZeroDivisionError):
        eval_jet(e, _env((Q(1), Q(0), Q(0))))


def test_eval_matches_hand_value():
    e = parse_expr("4/(1 + x1^2 + x2^2)^2", SYMS)
    v = eval_jet(e, _env((Q(1, 2), Q(1, 2), Q(0)))).value()
    assert v == Q(4) / Q(9, 4)  # (1 + 1/4 + 1/4)^2 = 9/4


def test_print_parse_roundtrip_fixed_cases():
    cases = [
        "1/2 + x1*(x2 - 3)",
        "-x1^2 - -x2",
        "(1 - 2/x2)*(x1 + 1/3)^4",
        "4/(1 + x1^2)^2",
        "x1/(x2*x3)",
        "1/2^3",
    ]
    for text in cases:
        tree = parse_expr(text, SYMS)
        again = parse_expr(to_string(tree), SYMS)
        assert again == tree, text


# random expression trees for the roundtrip property


def _random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Lit(Q(rng.randint(0, 9), rng.choice([1, 1, 2, 3])))
        return Var(rng.choice(SYMS))
    kind = rng.randint(0, 5)
    a = _random_expr(rng, depth - 1)
    b = _random_expr(rng, depth - 1)
    from tractorcheck.exprdsl import Add, Neg, Sub

    if kind == 0:
        return Add(a, b)
    if kind == 1:
        return Sub(a, b)
    if kind == 2:
        return Mul(a, b)
    if kind == 3:
        return Div(a, b)
    if kind == 4:
        return Neg(a)
    return Pow(a, rng.randint(0, 3))


@settings(max_examples=120, deadline=None)
@given(st.integers(min_value=0, max_value=2**30))
def test_print_parse_roundtrip_random(seed):
    # parse(print(parse(text))) == parse(text); start from printed random trees
    tree = _random_expr(random.Random(seed), 4)
    text = to_string(tree)
    once = parse_expr(text, SYMS)
    assert parse_expr(to_string(once), SYMS) == once


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**30), st.integers(min_value=0, max_value=2))
def test_symbolic_derivative_matches_jet_derivative(seed, v):
    rng = random.Random(seed)
    tree = _random_expr(rng, 3)
    point = (Q(1, 2), Q(1, 3), Q(2))
    env = _env(point, order=3)
    try:
        jet = eval_jet(tree, env)
        dsym = eval_jet(derivative(tree, SYMS[v]), env)
    except ZeroDivisionError:
        return  # random tree not evaluable at the base point
    assert jet.partial(v) == dsym.truncated(2)


# ---------------------------------------------------------------------------
# scene files

GOOD_SCENE = """
[scene]
name = roundball
dimension = 4
signature = riemannian
coordinates = x1, x2, x3, x4

[metric]
g_11 = "4/(1 + r2)^2"
g_22 = "4/(1 + r2)^2"
g_33 = "4/(1 + r2)^2"
g_44 = "4/(1 + r2)^2"

[einstein_scales]
scale_1 = "1"

[samples]
point_1 = 0, 0, 0, 0
point_2 = 1/2, 0, -1/3, 0
seed = 1
count = 3
"""


def test_parse_scene_roundtrip():
    spec = parse_scene(GOOD_SCENE)
    assert spec.dimension == 4
    assert spec.signature == (0, 4)
    assert len(spec.sample_points) == 2
    assert spec.sample_points[1][0] == Q(1, 2)
    again = parse_scene(serialize_scene(spec))
    assert again == spec


def test_scene_r2_is_expanded():
    spec = parse_scene(GOOD_SCENE)
    env = {
        c: JetScalar.constant(4, 0, v)
        for c, v in zip(spec.coordinates, (Q(1), Q(0), Q(0), Q(0)))
    }
    assert eval_jet(spec.metric_entry(1, 1), env).value() == Q(1)  # 4/(1+1)^2


def test_scene_dimension_guard():
    bad = GOOD_SCENE.replace("dimension = 4", "dimension = 2").replace(
        "coordinates = x1, x2, x3, x4", "coordinates = x1, x2"
    )
    with pytest.raises(SceneError):
        parse_scene(bad)


def test_scene_degenerate_metric_rejected():
    bad = """
[scene]
name = pinch
dimension = 3
coordinates = x1, x2, x3

[metric]
g_11 = "x1"
g_22 = "1"
g_33 = "1"

[samples]
point_1 = 0, 0, 0
"""
    with pytest.raises(SceneError) as err:
        parse_scene(bad)
    assert "degenerate" in str(err.value)


def test_scene_lower_triangular_metric_key_rejected():
    bad = GOOD_SCENE.replace('g_44 = "4/(1 + r2)^2"', 'g_41 = "1"')
    with pytest.raises(SceneError):
        parse_scene(bad)


def test_scene_nonpositive_scale_rejected():
    bad = GOOD_SCENE.replace('scale_1 = "1"', 'scale_1 = "x1 - 10"')
    with pytest.raises(SceneError):
        parse_scene(bad)
