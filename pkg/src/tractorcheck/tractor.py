"""Tractor calculus on top of the jet curvature layer.

Everything follows the stored-component convention set in riemann:
(alpha; mu_1..mu_n; tau) per tractor slot, with the canonical injectors

    X: (0; 0; 1)  weight +1      pairs to the alpha block
    Y: (1; 0; 0)  weight -1      pairs to the tau block
    Z: delta into the mu block as a (tractor, up-tensor) pair, weight -1

and the tractor metric h = (0,0,1; 0,g,0; 1,0,0), weight 0.

The fundamental derivative here is the tractor-D operator

    D T = ((n+2w-2) w T; (n+2w-2) grad T; -box T),   box = Laplace + w J

which adds a down tractor slot in front, lowers the weight by one, and
costs two jet orders.  The curvature of the tractor connection and the
(n-4)-weighted W-tractor are assembled directly from Weyl, Cotton, and
Bach blocks; the same W is recomputed from X wedge the curvature via D as
an independent route, and the two must agree identically.
"""

import itertools
from fractions import Fraction

from .jets import JetScalar, zero_jet
from .rationals import Q
from .riemann import (TENSOR_DOWN, TRACTOR_DOWN, TRACTOR_UP, FieldJet,
                      GeometryError, from_blocks)


def x_tractor(geom, order):
    n = geom.n
    z = zero_jet(n, order)
    comps = [z] * (n + 2)
    comps[n + 1] = JetScalar.constant(n, order, 1)
    return FieldJet(geom, TRACTOR_UP, 1, order, comps)


def y_tractor(geom, order):
    n = geom.n
    z = zero_jet(n, order)
    comps = [z] * (n + 2)
    comps[0] = JetScalar.constant(n, order, 1)
    return FieldJet(geom, TRACTOR_UP, -1, order, comps)


def z_mixed(geom, order):
    """The mu-block injector as a (tractor, up tensor) pair of weight -1;
    lowering the tensor slot gives its weight +1 all-lower form."""
    n = geom.n
    z = zero_jet(n, order)
    one = JetScalar.constant(n, order, 1)
    comps = []
    for lam in range(n + 2):
        for a in range(n):
            comps.append(one if lam == 1 + a else z)
    return FieldJet(geom, TRACTOR_DOWN + "u", -1, order, comps)


def tractor_metric(geom, order):
    n = geom.n
    gm = geom.gm(order)
    z = zero_jet(n, order)
    one = JetScalar.constant(n, order, 1)
    comps = []
    for i in range(n + 2):
        for j in range(n + 2):
            if (i, j) in ((0, n + 1), (n + 1, 0)):
                comps.append(one)
            elif 1 <= i <= n and 1 <= j <= n:
                comps.append(gm[i - 1][j - 1])
            else:
                comps.append(z)
    return FieldJet(geom, TRACTOR_DOWN + TRACTOR_DOWN, 0, order, comps)


def inject_slot(field, s):
    """Turn a lower tensor slot into a tractor slot whose mu block carries
    the original components (the Z-pairing in reverse).  Weight drops by
    one, matching the +1 of the mu extraction."""
    if field.slots[s] != TENSOR_DOWN:
        raise GeometryError("inject needs a lower tensor slot")
    n = field.geom.n
    z = zero_jet(n, field.order)
    slots = field.slots[:s] + TRACTOR_DOWN + field.slots[s + 1:]
    shape = field.shape
    new_shape = shape[:s] + (n + 2,) + shape[s + 1:]
    old_strides = field.strides()
    comps = []
    for idx in itertools.product(*[range(e) for e in new_shape]):
        lam = idx[s]
        if lam == 0 or lam == n + 1:
            comps.append(z)
            continue
        flat = 0
        for t in range(len(idx)):
            v = idx[t] if t != s else lam - 1
            flat += v * old_strides[t]
        comps.append(field.comps[flat])
    return FieldJet(field.geom, slots, field.weight - 1, field.order, comps)


def tractor_D(field):
    """The tractor-D operator.  New down slot in front, weight w-1, two jet
    orders consumed.  At w = 1 - n/2 the first two blocks die and
    D = -X box on the nose."""
    w = field.weight
    n = field.geom.n
    f = Fraction(n) + 2 * w - 2
    bx = field.box()
    k = bx.order
    alpha = field.truncated(k).scaled(f * w)
    mu = field.nabla().truncated(k).scaled(f)
    tau = -bx
    return from_blocks(0, TRACTOR_DOWN, alpha, mu, tau)


def tractor_curvature(geom, order):
    """Curvature of the tractor connection, as a (d, d, U, D) field S with
    [nabla_a, nabla_b] V = S(a, b) acting on V through the last slot:

        S[a][b][1+c][1+f] = C_abcf
        S[a][b][1+c][n+1] = A_cab
        S[a][b][n+1][1+f] = -A_fab

    Both alpha rows vanish identically, so X annihilates it on either
    tractor slot.
    """
    n = geom.n
    k = min(order, geom.order - 3)
    C = geom.weyl(k)
    A = geom.cotton(k)
    z = zero_jet(n, k)
    ext = n + 2
    comps = [z] * (n * n * ext * ext)

    def put(a, b, lam, mu_, val):
        comps[((a * n + b) * ext + lam) * ext + mu_] = val

    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            for c in range(n):
                for f in range(n):
                    v = C[a][b][c][f]
                    if not v.is_zero():
                        put(a, b, 1 + c, 1 + f, v)
                v = A[c][a][b]
                if not v.is_zero():
                    put(a, b, 1 + c, n + 1, v)
            for f in range(n):
                v = A[f][a][b]
                if not v.is_zero():
                    put(a, b, n + 1, 1 + f, -v)
    return FieldJet(geom, "ddUD", 0, k, comps)


def omega_injected(geom, order):
    """The tractor curvature with both form slots Z-injected: a
    (D, D, U, D) object of weight -2."""
    om = tractor_curvature(geom, order)
    return inject_slot(inject_slot(om, 0), 1)


def w_tractor_direct(geom, order):
    """The W-tractor assembled blockwise: (n-4) times Weyl and Cotton in
    the Z..Z and X-bearing rows, Bach in the double-X row.  All slots down,
    weight -2."""
    n = geom.n
    k = min(order, geom.order - 4)
    C = geom.weyl(k)
    A = geom.cotton(k)
    B = geom.bach(k)
    f = Q(n - 4)
    z = zero_jet(n, k)
    ext = n + 2
    comps = [z] * (ext ** 4)

    def add(i, j, l, m, val):
        pos = ((i * ext + j) * ext + l) * ext + m
        comps[pos] = comps[pos] + val

    for a in range(n):
        for b in range(n):
            for c in range(n):
                for e in range(n):
                    v = C[a][b][c][e]
                    if not v.is_zero():
                        add(1 + a, 1 + b, 1 + c, 1 + e, f * v)
            for e in range(n):
                v = A[e][a][b]
                if not v.is_zero():
                    add(1 + a, 1 + b, n + 1, 1 + e, f * (-v))
                    add(1 + a, 1 + b, 1 + e, n + 1, f * v)
    # first-pair X rows: -(n-4) X_A Z_B^b A_bce + (n-4) Z_A^b X_B A_bce
    for b in range(n):
        for c in range(n):
            for e in range(n):
                v = A[b][c][e]
                if v.is_zero():
                    continue
                add(n + 1, 1 + b, 1 + c, 1 + e, f * (-v))
                add(1 + b, n + 1, 1 + c, 1 + e, f * v)
    for b in range(n):
        for e in range(n):
            v = B[e][b]
            if v.is_zero():
                continue
            add(n + 1, 1 + b, n + 1, 1 + e, v)
            add(n + 1, 1 + b, 1 + e, n + 1, -v)
            add(1 + b, n + 1, n + 1, 1 + e, -v)
            add(1 + b, n + 1, 1 + e, n + 1, v)
    return FieldJet(geom, "DDDD", -2, k, comps)


def w_tractor_via_d(geom, order):
    """Independent route to W: 3/(n-2) times the D-contraction of
    X wedged into the injected tractor curvature.  Returns the same slot
    picture as w_tractor_direct with the third slot raised, so lower it
    for comparisons; costs three more jet orders than the direct route."""
    n = geom.n
    omt = omega_injected(geom, order)
    k = omt.order
    xd = x_tractor(geom, k).lower_slot(0)
    t = xd.otimes(omt).antisym([0, 1, 2])
    dt = tractor_D(t)
    w = dt.contract(0, 1)
    return w.scaled(Fraction(3, n - 2))


def d_commutator_residual(v):
    """Residual of the D-commutator identity on a rank-one up tractor V of
    weight w:

        [D_A, D_B] V = (n+2w-2) W_AB V + 6 X_[A Omega_BP] D^P V

    with W acting through its last slot and the Omega term contracted
    through both its P and endomorphism slots.  Returns LHS - RHS.
    """
    geom = v.geom
    n = geom.n
    w = v.weight
    dd = tractor_D(tractor_D(v))
    lhs = dd - dd.transpose((1, 0, 2))

    k = lhs.order
    wdir = w_tractor_direct(geom, geom.order - 4).raise_slot(2)
    t1 = wdir.otimes(v).contract(3, 4).scaled(Fraction(n) + 2 * w - 2)

    omt = omega_injected(geom, geom.order - 3)
    xd = x_tractor(geom, omt.order).lower_slot(0)
    g = xd.otimes(omt).antisym([0, 1, 2])
    dv = tractor_D(v)
    # contract P (slot 2) against DV's new slot, then the endomorphism
    # down slot against V's own slot
    t2 = g.otimes(dv).contract(2, 5).contract(3, 4).scaled(6)

    rhs = (t1 + t2).truncated(k)
    return lhs.truncated(rhs.order) - rhs
