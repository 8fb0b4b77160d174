"""Conformally covariant powers of the Laplacian on Einstein backgrounds.

Two independent routes to one operator family.  The tractor route iterates
the parallel tractor against D,

    P_k f = (-1)^k sigma^{-k} (I . D)^k f,

and never mentions k-specific curvature corrections.  The product route
composes shifted Laplacians in the scale sigma determines,

    P_k = prod_{l=1..k} (Delta - b_l J),
    b_l = (n + 2l - 2)(n - 2l) / (2n),

after transporting everything to that scale and back.  Agreement of the
two, coefficient by rational coefficient, is the main payload of the
whole package; the critical Q-curvature, its noncritical cousins, the
third-power formulas that stay regular in dimension four, and the round
sphere spectral checks all ride on the same two pipelines.
"""

import weakref
from fractions import Fraction
from math import factorial

from .einstein import EinsteinScale
from .exprdsl import Div, Lit, Pow
from .rationals import Q
from .riemann import FieldJet, GeometryError, rescale_field
from .tractor import (tractor_D, w_tractor_direct, x_tractor, y_tractor,
                      z_mixed)


def factor_coefficient(n, l):
    """b_l = (n+2l-2)(n-2l)/(2n), the l-th shift in the product form.
    Vanishes at l = n/2, which is what makes the critical power special."""
    return Fraction((n + 2 * l - 2) * (n - 2 * l), 2 * n)


def domain_weight(n, k):
    """P_k eats densities of weight k - n/2 and emits weight -k - n/2."""
    return Fraction(2 * k - n, 2)


def _check_scale(scale):
    if not isinstance(scale, EinsteinScale) or not scale.parallel:
        raise GeometryError("this operator family needs an Einstein scale")


# -- tractor route --

def p_k_tractor(f, scale, k):
    """(-1)^k sigma^{-k} (I . D)^k f.  Works on any slot picture; the
    input weight must be k - n/2 against its geometry's dimension."""
    g = f.geom
    _check_scale(scale)
    if f.weight != domain_weight(g.n, k):
        raise GeometryError("P_%d input must have weight %s, got %s"
                            % (k, domain_weight(g.n, k), f.weight))
    v = f
    for _ in range(k):
        dv = tractor_D(v)
        v = scale.tractor.truncated(dv.order).otimes(dv).contract(0, 1)
    pref = g.density(Pow(scale.expr, -k), -k, order=v.order)
    return v.otimes(pref).scaled(Q((-1) ** k))


def p_k_box_route(f, scale, k):
    """Same operator, different factor order: box after a (k-1)-fold
    D-nest, then the I contractions, then (-1)^{k-1} sigma^{1-k}.  A
    genuinely distinct evaluation path kept as a cross-check."""
    g = f.geom
    _check_scale(scale)
    if f.weight != domain_weight(g.n, k):
        raise GeometryError("P_%d input must have weight %s, got %s"
                            % (k, domain_weight(g.n, k), f.weight))
    v = f
    for _ in range(k - 1):
        v = tractor_D(v)
    v = v.box()
    for _ in range(k - 1):
        v = scale.tractor.truncated(v.order).otimes(v).contract(0, 1)
    pref = g.density(Pow(scale.expr, 1 - k), 1 - k, order=v.order)
    return v.otimes(pref).scaled(Q((-1) ** (k - 1)))


# -- product route --

def shifted_laplacian_chain(f, k):
    """Apply (Delta - b_l J) for l = 1..k in the resident scale of f's
    geometry.  Plain Laplacians: in a fixed scale nothing here depends on
    the weight label, which is exactly why the factorization can hold."""
    u = f
    n = u.geom.n
    for l in range(1, k + 1):
        lap = u.laplacian()
        b = factor_coefficient(n, l)
        if b:
            u = lap - u.jet_scaled(u.geom.J(lap.order), -2).scaled(b)
        else:
            u = lap
    return u


def gjms_product(f, scale, k):
    """The product-form P_k in the scale sigma determines.

    For the resident scale this is shifted_laplacian_chain on the spot.
    Otherwise the field is transported to the sigma trivialization (a
    rescaled geometry with omega = 1/sigma), the chain runs there, and the
    result comes back; all exact, no order is lost to the transport."""
    g = f.geom
    _check_scale(scale)
    if f.weight != domain_weight(g.n, k):
        raise GeometryError("P_%d input must have weight %s, got %s"
                            % (k, domain_weight(g.n, k), f.weight))
    if scale.resident:
        return shifted_laplacian_chain(f, k)
    omega = Div(Lit(Q(1)), scale.expr)
    hat = _scale_geometry(g, scale, omega)
    fh = rescale_field(f, omega, hat)
    out = shifted_laplacian_chain(fh, k)
    return rescale_field(out, scale.expr, g)


_HATS = weakref.WeakKeyDictionary()


def _scale_geometry(g, scale, omega):
    """One rescaled geometry per (geometry, scale); the curvature caches
    inside it are what make repeated transports affordable."""
    per = _HATS.setdefault(g, {})
    key = repr(scale.expr)
    if key not in per:
        per[key] = g.rescaled(omega, name=g.name + "@" + "scale")
    return per[key]


def scale_independence_residual(f, scale_a, scale_b, k):
    """gjms_product must not care which Einstein scale of the class it is
    handed; returns the difference of the two runs."""
    return gjms_product(f, scale_a, k) - gjms_product(f, scale_b, k)


# -- Q-curvature --

def q_product_route(geom):
    """Critical Q-curvature, weight -n:

        Q = (2(1-n)/n) (prod_{l=1}^{n/2-1} (Delta - b_l J)) J

    computed in the resident scale, which must be Einstein."""
    n = geom.n
    if n % 2:
        raise GeometryError("critical Q needs even dimension")
    u = geom.j_field(geom.order - 2)
    u = shifted_laplacian_chain(u, n // 2 - 1)
    return u.scaled(Fraction(2 * (1 - n), n))


def q_einstein_value(geom):
    """Closed form on Einstein backgrounds, as one exact rational:

        Q = (-1)^{n/2} (n-1)! (Sc / (n(n-1)))^{n/2}

    evaluated from the scalar curvature at the sample point."""
    n = geom.n
    if n % 2:
        raise GeometryError("critical Q needs even dimension")
    sc = geom.sc(0).value()
    base = sc / (n * (n - 1))
    return Q((-1) ** (n // 2)) * factorial(n - 1) * base ** (n // 2)


def q_constant_residual(n):
    """The rational identity squaring the two Q displays against each
    other on constant-J backgrounds:

        (2(n-1)/n) prod_{l=1}^{n/2-1} b_l  =  (n-1)! (2/n)^{n/2}.

    Returns left minus right; zero in every even dimension."""
    prod = Fraction(1)
    for l in range(1, n // 2):
        prod *= factor_coefficient(n, l)
    return Fraction(2 * (n - 1), n) * prod \
        - factorial(n - 1) * Fraction(2, n) ** (n // 2)


def noncritical_q(geom, k):
    """Q_k = (2/(n-2k)) P_k(1), the unit density taken at weight k - n/2
    in the resident scale; n = 2k is excluded by construction."""
    n = geom.n
    if n == 2 * k:
        raise GeometryError("Q_%d is critical in dimension %d" % (k, n))
    one = geom.density("1", domain_weight(n, k), order=2 * k)
    u = shifted_laplacian_chain(one, k)
    return u.scaled(Fraction(2, n - 2 * k))


# -- round sphere spectrum --

def sphere_eigen_germs(geom):
    """Degree-one eigenfunction germs in the stereographic chart: the
    coordinate harmonics 2 x_i / (1+r^2) and the polar (1-r^2)/(1+r^2)."""
    out = ["2*%s/(1+r2)" % c for c in geom.coords]
    out.append("(1-r2)/(1+r2)")
    return out


def eigenvalue(n, j):
    """Laplace eigenvalue on the unit n-sphere, geometer's sign."""
    return Fraction(-j * (j + n - 1))


def spectral_prediction(n, j, k):
    """prod_l (lambda_j - b_l J) with J = n/2 on the unit sphere."""
    lam = eigenvalue(n, j)
    val = Fraction(1)
    for l in range(1, k + 1):
        val *= lam - factor_coefficient(n, l) * Fraction(n, 2)
    return val


def spectral_table(geom, kmax=2):
    """Eigen-residuals of the product-form P_k on unit-sphere germs.

    Each record checks P_k u = (prod_l (lambda_j - b_l J)) u as a full jet
    identity, u carried at the weight P_k expects.  Returns a list of
    dicts with the germ, j, k, the predicted rational, and the residual
    field; callers assert the residuals are zero."""
    n = geom.n
    rows = []
    for k in range(1, kmax + 1):
        w = domain_weight(n, k)
        cases = [("1", 0)] + [(t, 1) for t in sphere_eigen_germs(geom)]
        for text, j in cases:
            u = geom.density(text, w, order=2 * k)
            out = shifted_laplacian_chain(u, k)
            pred = spectral_prediction(n, j, k)
            res = out - u.truncated(out.order).scaled(pred).with_weight(out.weight)
            rows.append({"germ": text, "j": j, "k": k,
                         "predicted": pred, "residual": res})
    return rows


# -- third power, dimension-four family --

def double_d(f):
    return tractor_D(tractor_D(f))


def _w_pairing(f):
    """2 W(., C, ., E) D_C D_E f with both middle W slots raised."""
    g = f.geom
    dd = double_d(f)
    w = w_tractor_direct(g, g.order - 4).raise_slot(1).raise_slot(3)
    t = w.otimes(dd)
    return t.contract(1, 4).contract(2, 3).scaled(2)


def box3_rhs(f):
    """(n-4) box D D f + the W pairing, for f of weight 3 - n/2.  The
    point of the combination: on any background it is X X times a single
    density, so every projector pair except Y Y kills it."""
    g = f.geom
    if f.weight != Fraction(6 - g.n, 2):
        raise GeometryError("third-power input must have weight 3 - n/2")
    bx = double_d(f).box()
    return bx.scaled(g.n - 4) + _w_pairing(f)


def projector_annihilation_report(field2):
    """Contract a rank-2 down-tractor field with all nine projector pairs.
    Returns {(left, right): is_zero}; surviving tensor slots from Z are
    checked as part of the pairing."""
    g = field2.geom
    k = field2.order
    projs = [("X", x_tractor(g, k)), ("Y", y_tractor(g, k)),
             ("Z", z_mixed(g, k))]
    report = {}
    for na, pa in projs:
        row = pa.otimes(field2).contract(0, len(pa.slots))
        off = len(pa.slots) - 1
        for nb, pb in projs:
            val = pb.otimes(row).contract(0, len(pb.slots) + off)
            report[(na, nb)] = val.is_zero()
    return report


def n_operator(f):
    """N f = Y Y box D D f, the projected part of the third power that
    needs no 1/(n-4)."""
    g = f.geom
    bx = double_d(f).box()
    y = y_tractor(g, bx.order)
    return y.otimes(y.otimes(bx).contract(0, 1)).contract(0, 1)


def bach_hessian_pairing(f):
    """8 B^{cd} (2 grad_c grad_d f - (n-6) P_cd f)."""
    g = f.geom
    n = g.n
    hess = f.nabla().nabla()
    inner = hess.scaled(2) - f.otimes(g.schouten_field(hess.order)).scaled(n - 6)
    b = g.bach_field(g.order - 4).raise_slot(0).raise_slot(1)
    return b.otimes(inner).contract(0, 2).contract(0, 1).scaled(8)


def w_pairing_yy_residual(f):
    """The Y Y block of the W pairing against its Bach-Hessian closed
    form; a generic-background identity, no Einstein assumption."""
    t = _w_pairing(f)
    y = y_tractor(f.geom, t.order)
    yy = y.otimes(y.otimes(t).contract(0, 1)).contract(0, 1)
    return yy - bach_hessian_pairing(f).truncated(yy.order)


def box3_via_yy(f):
    """Y Y extraction of box3_rhs over (n-4); the regularized third power
    away from dimension four."""
    g = f.geom
    if g.n == 4:
        raise GeometryError("the Y Y route divides by n - 4")
    rhs = box3_rhs(f)
    y = y_tractor(g, rhs.order)
    yy = y.otimes(y.otimes(rhs).contract(0, 1)).contract(0, 1)
    return yy.scaled(Fraction(1, g.n - 4))


def p3_einstein(f, scale):
    """Third power through an Einstein scale, regular in every dimension:

        P_3 f = N f - 8 A^{cde} (sigma^{-1} grad_e sigma)
                        (2 grad_c grad_d f - (n-6) P_cd f).
    """
    g = f.geom
    n = g.n
    _check_scale(scale)
    nf = n_operator(f)
    a = g.cotton_field(g.order - 3)
    a = a.raise_slot(0).raise_slot(1).raise_slot(2)
    grad = scale.sigma.nabla()
    sinv = g.density(Pow(scale.expr, -1), -1, order=grad.order)
    u = grad.otimes(sinv)
    t = a.otimes(u).contract(2, 3)
    hess = f.nabla().nabla()
    inner = hess.scaled(2) - f.otimes(g.schouten_field(hess.order)).scaled(n - 6)
    term = t.otimes(inner).contract(0, 2).contract(0, 1).scaled(8)
    return nf - term


def bach_cotton_residual(scale):
    """B_cd - (4-n) sigma^{-1} A_cde grad^e sigma on a conformally
    Einstein background; identically zero.  In dimension four this is the
    statement that Bach vanishes outright."""
    g = scale.geom
    n = g.n
    _check_scale(scale)
    b = g.bach_field(g.order - 4)
    grad_up = scale.sigma.nabla().raise_slot(0)
    t = g.cotton_field(g.order - 3).otimes(grad_up).contract(2, 3)
    sinv = g.density(Pow(scale.expr, -1), -1, order=t.order)
    return b - t.otimes(sinv).scaled(4 - n)


def a_term_pair_residual(scale_a, scale_b):
    """A^{cde} (sigma_b grad_e sigma_a - sigma_a grad_e sigma_b): the
    obstruction to the curvature correction in the modified W being
    scale-independent.  Zero whenever both scales are Einstein."""
    g = scale_a.geom
    a = g.cotton_field(g.order - 3)
    a = a.raise_slot(0).raise_slot(1).raise_slot(2)
    m = scale_b.sigma.otimes(scale_a.sigma.nabla()) \
        - scale_a.sigma.otimes(scale_b.sigma.nabla())
    return a.otimes(m).contract(2, 3)
