"""Tractor layer: projector algebra, the D operator, connection curvature,
and the two independent W-tractor routes.

The deepest checks here are commutator-shaped: the curvature field must
reproduce [nabla, nabla] on seeded tractors, D must commute with conformal
transport, and the D-commutator identity must close with the W and Omega
terms on a generically curved metric.
"""

from fractions import Fraction
from functools import lru_cache

from tractorcheck.jets import JetScalar
from tractorcheck.riemann import Geometry, rescale_field
from tractorcheck.tractor import (d_commutator_residual, inject_slot,
                                  omega_injected, tractor_curvature,
                                  tractor_D, tractor_metric, w_tractor_direct,
                                  w_tractor_via_d, x_tractor, y_tractor,
                                  z_mixed)

C4 = ("x1", "x2", "x3", "x4")
C5 = ("x1", "x2", "x3", "x4", "x5")
PT4 = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), Fraction(1, 7))
PT5 = PT4 + (Fraction(1, 11),)

PERT4 = {
    "11": "1 + 1/10*x2^2",
    "12": "1/10*x1*x3",
    "22": "1 + 1/10*x1^2",
    "23": "1/10*x2*x4",
    "33": "1 + 1/10*x4^2",
    "44": "1 + 1/10*x3^2",
}
PERT5 = {
    "11": "1 + 1/10*x2^2",
    "12": "1/10*x1*x3",
    "22": "1 + 1/10*x5^2",
    "23": "1/10*x2*x4",
    "33": "1 + 1/10*x4^2",
    "45": "1/10*x5*x1",
    "44": "1 + 1/10*x3^2",
    "55": "1 + 1/10*x1^2",
}

SPHERE4 = {k: "4/(1+r2)^2" for k in ("11", "22", "33", "44")}


@lru_cache(maxsize=None)
def pert4(order=6):
    return Geometry.from_texts("pert4", C4, PERT4, PT4, order)


@lru_cache(maxsize=None)
def pert5(order=6):
    return Geometry.from_texts("pert5", C5, PERT5, PT5, order)


@lru_cache(maxsize=None)
def sphere4(order=6):
    return Geometry.from_texts("sphere4", C4, SPHERE4, PT4, order)


def same_components(a, b):
    k = min(a.order, b.order)
    at = a.truncated(k)
    bt = b.truncated(k)
    return all((x - y).is_zero() for x, y in zip(at.comps, bt.comps))


def is_const(jet, value):
    return (jet - JetScalar.constant(jet.nvars, jet.order, value)).is_zero()


def test_projector_pairings():
    g = pert4()
    k = 4
    x = x_tractor(g, k)
    y = y_tractor(g, k)
    z = z_mixed(g, k)
    assert is_const(x.otimes(y).contract(0, 1).comps[0], 1)
    assert x.otimes(x).contract(0, 1).is_zero()
    assert y.otimes(y).contract(0, 1).is_zero()
    assert x.otimes(z).contract(0, 1).is_zero()
    assert y.otimes(z).contract(0, 1).is_zero()
    zz = z.otimes(z).contract(0, 2)
    assert same_components(zz, g.inverse_metric_field(k))
    assert zz.weight == -2


def test_tractor_metric_pairs_to_lowering():
    g = pert4()
    k = 4
    h = tractor_metric(g, k)
    x = x_tractor(g, k)
    hx = h.otimes(x).contract(1, 2)
    assert same_components(hx, x.lower_slot(0))


def test_injection_inverts_mu_extraction():
    g = pert4()
    v = g.field_from("d", 2, ["x1", "x2^2", "1/3", "x3*x4"], order=4)
    t = inject_slot(v, 0)
    assert t.weight == 1
    assert same_components(t.tractor_block(0, "mu"), v)
    assert t.tractor_block(0, "alpha").is_zero()
    assert t.tractor_block(0, "tau").is_zero()


def test_d_on_constant_density_sphere():
    g = sphere4()
    v = g.density(1, weight=2)
    dv = tractor_D(v)
    assert dv.weight == 1
    # (n + 2w - 2) w = 12, box 1 = w J = 4 on the unit sphere
    assert is_const(dv.tractor_block(0, "alpha").comps[0], 12)
    assert dv.tractor_block(0, "mu").is_zero()
    assert is_const(dv.tractor_block(0, "tau").comps[0], -4)


def test_d_kills_weightless_constants():
    g = pert4()
    assert tractor_D(g.density(1, weight=0)).is_zero()


def test_d_degenerate_weight_is_x_box():
    # at w = 1 - n/2 only the tau block survives: D = -X box
    g = pert4()
    v = g.density("1/3 + x1*x2 - x3^2", weight=-1)
    dv = tractor_D(v)
    expected = -x_tractor(g, dv.order).lower_slot(0).otimes(v.box())
    assert same_components(dv, expected)
    assert dv.weight == expected.weight


SEEDED_TRACTOR = ["1/3 + x1*x2", "x3^2", "1 - x4", "x2 + x3*x1", "2/5",
                  "x1^2 - x2/3"]


def test_curvature_reproduces_connection_commutator():
    g = pert4()
    for w in (0, 2):
        v = g.field_from("U", w, SEEDED_TRACTOR, order=4)
        nn = v.nabla().nabla()
        comm = nn - nn.transpose((1, 0, 2))
        om = tractor_curvature(g, 4)
        rhs = om.otimes(v).contract(3, 4)
        assert (comm - rhs).is_zero()
        assert not comm.is_zero()


def test_curvature_x_annihilation():
    g = pert4()
    om = tractor_curvature(g, 3)
    assert om.tractor_block(2, "alpha").is_zero()
    x = x_tractor(g, om.order)
    assert om.otimes(x).contract(3, 4).tractor_block(2, "alpha").is_zero()
    # X into the down slot kills it outright
    assert not om.is_zero()


OMEGA = "1 + x1/5 + x2*x3/7"


def test_d_commutes_with_conformal_transport():
    g = pert4()
    hat = g.rescaled(OMEGA)
    v = g.field_from("U", 3, SEEDED_TRACTOR, order=5)
    lhs = rescale_field(tractor_D(v), OMEGA, hat)
    rhs = tractor_D(rescale_field(v, OMEGA, hat))
    assert (lhs - rhs).is_zero()
    assert not rhs.is_zero()


def test_x_is_conformally_invariant():
    g = pert4()
    hat = g.rescaled(OMEGA)
    x = x_tractor(g, 4)
    assert same_components(rescale_field(x, OMEGA, hat), x_tractor(hat, 4))


def test_w_routes_agree_n5():
    # geometry order 5 leaves the D route exactly enough room to land at
    # jet order 0, which is the value-at-the-sample-point comparison
    g = pert5(5)
    direct = w_tractor_direct(g, g.order - 4).raise_slot(2)
    via = w_tractor_via_d(g, g.order - 3)
    assert (direct.truncated(via.order) - via).is_zero()
    assert not direct.truncated(via.order).is_zero()


def test_w_routes_agree_n4():
    # in dimension four the Weyl and Cotton rows drop out and W is pure Bach
    g = pert4(5)
    direct = w_tractor_direct(g, g.order - 4)
    blocks_ok = all(
        direct.component(i, j, k, l).is_zero()
        for i in range(6) for j in range(6) for k in range(6) for l in range(6)
        if not (i in (0, 5) and k in (0, 5))
        if 0 in (i, k)
    )
    assert blocks_ok
    via = w_tractor_via_d(g, g.order - 3)
    assert (direct.raise_slot(2).truncated(via.order) - via).is_zero()
    assert not direct.is_zero()


def test_d_commutator_identity_rank1():
    # v at order 4 puts [D,D]v at order 0: all 343 residual components are
    # checked for exact vanishing at the sample point
    g = pert5()
    v = g.field_from("U", 2, ["1/3 + x1*x2", "x3^2", "1 - x4", "x5 + x3*x1",
                              "2/5", "x1^2 - x2/3", "x4*x5"], order=4)
    res = d_commutator_residual(v)
    assert res.order >= 0
    assert res.is_zero()
