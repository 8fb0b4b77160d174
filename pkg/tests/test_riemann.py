"""Curvature layer against hand oracles and structural identities.

Value oracles: the flat metric kills every curvature object; the unit round
sphere in stereographic coordinates (g = 4 delta / (1+r2)^2) has
Sc = n(n-1), P = g/2, and R_abcd = g_ac g_bd - g_ad g_bc.  Structural
checks pin the signs: the commutator definition of curvature on up and
down slots, metric compatibility, the second Bianchi identity, tractor
metric parallelism, and conformal invariance of the Weyl tensor.
"""

from fractions import Fraction
from functools import lru_cache

import pytest

from tractorcheck.jets import JetScalar, zero_jet
from tractorcheck.rationals import Q
from tractorcheck.riemann import (FieldJet, Geometry, GeometryError,
                                  rescale_field)

C4 = ("x1", "x2", "x3", "x4")
PT4 = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), Fraction(1, 7))

FLAT4 = {"11": "1", "22": "1", "33": "1", "44": "1"}
SPHERE4 = {
    "11": "4/(1+r2)^2",
    "22": "4/(1+r2)^2",
    "33": "4/(1+r2)^2",
    "44": "4/(1+r2)^2",
}
# generic bump with off-diagonal terms; positive definite near the origin
PERT4 = {
    "11": "1 + 1/10*x2^2",
    "12": "1/10*x1*x3",
    "22": "1 + 1/10*x1^2",
    "23": "1/10*x2*x4",
    "33": "1 + 1/10*x4^2",
    "44": "1 + 1/10*x3^2",
}


@lru_cache(maxsize=None)
def flat4(order=6):
    return Geometry.from_texts("flat4", C4, FLAT4, PT4, order)


@lru_cache(maxsize=None)
def sphere4(order=6):
    return Geometry.from_texts("sphere4", C4, SPHERE4, PT4, order)


@lru_cache(maxsize=None)
def pert4(order=6):
    return Geometry.from_texts("pert4", C4, PERT4, PT4, order)


def same_components(a, b):
    k = min(a.order, b.order)
    at = a.truncated(k)
    bt = b.truncated(k)
    return all((x - y).is_zero() for x, y in zip(at.comps, bt.comps))


def test_flat_curvature_vanishes():
    g = flat4()
    assert g.riemann_field(4).is_zero()
    assert g.ricci_field(4).is_zero()
    assert g.weyl_field(4).is_zero()
    assert g.cotton_field(3).is_zero()
    assert g.bach_field(2).is_zero()
    assert g.sc(4).is_zero()


def test_inverse_metric_roundtrip():
    g = pert4()
    gm = g.gm(6)
    gi = g.gi(6)
    one = JetScalar.constant(4, 6, 1)
    z = zero_jet(4, 6)
    for a in range(4):
        for c in range(4):
            acc = z
            for b in range(4):
                if gi[a][b].is_zero() or gm[b][c].is_zero():
                    continue
                acc = acc + gi[a][b] * gm[b][c]
            want = one if a == c else z
            assert (acc - want).is_zero()


def test_sphere_scalar_curvature():
    g = sphere4()
    assert (g.sc(4) - JetScalar.constant(4, 4, 12)).is_zero()
    assert (g.J(4) - JetScalar.constant(4, 4, 2)).is_zero()


def test_sphere_schouten_is_half_metric():
    g = sphere4()
    assert same_components(g.schouten_field(4),
                           g.metric_field(4).scaled(Fraction(1, 2)))


def test_sphere_riemann_is_metric_wedge():
    g = sphere4()
    rlow = g.riemann_field(4).lower_slot(2)
    gg = g.metric_field(4).otimes(g.metric_field(4))
    # E[a][b][c][d] = g_ac g_bd - g_ad g_bc
    expected = gg.transpose((0, 2, 1, 3)) - gg.transpose((0, 2, 3, 1))
    assert same_components(rlow, expected)


def test_sphere_weyl_and_cotton_vanish():
    g = sphere4()
    assert g.weyl_field(4).is_zero()
    assert g.cotton_field(3).is_zero()


def test_metric_compatibility():
    for g in (sphere4(), pert4()):
        assert g.metric_field(6).nabla().is_zero()
        assert g.inverse_metric_field(5).nabla().is_zero()


def test_trace_of_metric_is_dimension():
    g = pert4()
    tr = g.metric_field(5).trace(0, 1)
    assert tr.weight == 0
    assert (tr.comps[0] - JetScalar.constant(4, 5, 4)).is_zero()


VEC = ["x2*x3 + 1/3", "x1^2 - x4", "x3*x4/5", "x1 + x2^2"]


def test_commutator_up_slot():
    g = pert4()
    v = g.field_from("u", 0, VEC)
    nn = v.nabla().nabla()
    comm = nn - nn.transpose((1, 0, 2))
    rhs = g.riemann_field(4).otimes(v).contract(3, 4)
    assert (comm - rhs).is_zero()


def test_commutator_down_slot():
    g = pert4()
    w = g.field_from("d", 0, VEC)
    nn = w.nabla().nabla()
    comm = nn - nn.transpose((1, 0, 2))
    rhs = g.riemann_field(4).otimes(w).contract(2, 4)
    assert (comm + rhs).is_zero()


def test_densities_commute():
    g = pert4()
    rho = g.density("x1^2*x2 - x3/3 + 1/7", weight=3)
    nn = rho.nabla().nabla()
    comm = nn - nn.transpose((1, 0))
    assert comm.is_zero()


def test_second_bianchi():
    g = pert4()
    nr = g.riemann_field(4).nabla()
    cyc = nr + nr.transpose((2, 0, 1, 3, 4)) + nr.transpose((1, 2, 0, 3, 4))
    assert cyc.is_zero()


def test_riemann_antisymmetry():
    g = pert4()
    r = g.riemann_field(4)
    assert r.sym([0, 1]).is_zero()
    assert same_components(r.antisym([0, 1]), r)


def tractor_metric(g, k):
    n = g.n
    gm = g.gm(k)
    z = zero_jet(n, k)
    one = JetScalar.constant(n, k, 1)
    comps = []
    for i in range(n + 2):
        for j in range(n + 2):
            if (i, j) in ((0, n + 1), (n + 1, 0)):
                comps.append(one)
            elif 1 <= i <= n and 1 <= j <= n:
                comps.append(gm[i - 1][j - 1])
            else:
                comps.append(z)
    return FieldJet(g, "DD", 0, k, comps)


def test_tractor_metric_is_parallel():
    for g in (sphere4(), pert4()):
        h = tractor_metric(g, 4)
        assert h.nabla().is_zero()


def test_tractor_contraction_normalization():
    g = pert4()
    h = tractor_metric(g, 4)
    # h paired with itself through the tractor metric gives n + 2
    tr = h.contract(0, 1)
    assert (tr.comps[0] - JetScalar.constant(4, 4, 6)).is_zero()


OMEGA = "1 + x1/5 + x2*x3/7"


def test_weyl_conformal_invariance():
    g = pert4()
    hat = g.rescaled(OMEGA)
    moved = rescale_field(g.weyl_field(4), OMEGA, hat)
    assert same_components(moved, hat.weyl_field(4))


def test_rescaled_metric_transports():
    g = pert4()
    hat = g.rescaled(OMEGA)
    moved = rescale_field(g.metric_field(6), OMEGA, hat)
    assert same_components(moved, hat.metric_field(6))


def test_cotton_and_bach_are_generic_here():
    g = pert4()
    assert not g.cotton_field(3).is_zero()
    assert not g.bach_field(2).is_zero()
    assert not g.weyl_field(4).is_zero()


def test_order_accounting_guards():
    g = pert4(4)
    with pytest.raises(GeometryError):
        g.bach(1)
    with pytest.raises(GeometryError):
        g.weyl(3)
    v = g.field_from("u", 0, VEC, order=0)
    with pytest.raises(GeometryError):
        v.nabla()


def test_block_roundtrip():
    from tractorcheck.riemann import from_blocks

    g = pert4()
    h = tractor_metric(g, 4)
    alpha = h.tractor_block(0, "alpha")
    mu = h.tractor_block(0, "mu")
    tau = h.tractor_block(0, "tau")
    back = from_blocks(0, "D", alpha, mu, tau)
    assert same_components(back, h)
    assert back.weight == h.weight
