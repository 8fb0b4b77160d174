"""Einstein scales, parallel tractors, and conformal Killing machinery.

A scale is a weight-one density sigma, nonvanishing at the sample point.
Its normalized tractor-D image

    I = (1/n) D sigma = (sigma; grad sigma; -(Lap sigma + J sigma)/n)

is parallel for the tractor connection exactly when the metric
sigma^{-2} g is Einstein, which turns "is this an Einstein scale" into a
finite exact computation on jets.

Conformal Killing vectors get the same treatment: a vector k is a CKV iff
the symmetric part of D applied to its standard tractor lift vanishes,
and the antisymmetric part (the adjoint tractor of k) then satisfies a
transport equation driven by the tractor curvature.  Each statement here
is a residual builder; tests and suites assert exact zeros.
"""

from fractions import Fraction

from .rationals import Q
from .riemann import TENSOR_DOWN, TENSOR_UP, FieldJet, GeometryError, from_blocks
from .tractor import tractor_D, tractor_curvature, w_tractor_direct, x_tractor


def m_splitting(u):
    """Differential splitting of a weight-w one-form into a tractor:

        u_a  |->  (0; (n+w-2) u_a; -div u),   weight w-1.

    The normalization is the one that makes the CKV lift below come out
    with mu block equal to k_b on the nose.
    """
    if u.slots != TENSOR_DOWN:
        raise GeometryError("splitting needs a single lower tensor slot")
    n = u.geom.n
    w = u.weight
    div = u.nabla().trace(0, 1)
    k = div.order
    alpha = u.zero_like(slots="", weight=w, order=k)
    mu = u.truncated(k).scaled(Fraction(n) + w - 2)
    return from_blocks(0, "D", alpha, mu, -div)


def ck_split(kvec):
    """Standard tractor lift of a vector field (weight 0, up slot):

        K = (0; k_b; -(1/n) div k),   weight 1.
    """
    if kvec.slots != TENSOR_UP or kvec.weight != 0:
        raise GeometryError("lift expects a plain weight-0 vector")
    return m_splitting(kvec.lower_slot(0)).scaled(Q(1, kvec.geom.n))


def killing_residuals(kvec):
    """The two faces of the conformal Killing equation, as a residual pair:

    - the trace-free symmetrized gradient of k lowered, and
    - the symmetric part of D applied to the lift of k.

    Both vanish iff k is a CKV; the suites check they vanish together.
    """
    g = kvec.geom
    n = g.n
    grad = kvec.lower_slot(0).nabla().sym([0, 1])
    pure = grad.trace(0, 1).otimes(g.metric_field(grad.order)).scaled(Q(1, n))
    dk = tractor_D(ck_split(kvec))
    return grad - pure, dk.sym([0, 1])


def splitting_gradient_block(kvec):
    """mu-mu block of sym(D K) for an arbitrary vector k.  With the 1/n
    normalization of ck_split this is identically n times the trace-free
    symmetrized gradient of k, CKV or not; kept as its own helper so that
    identity can be pinned in tests."""
    dk = tractor_D(ck_split(kvec))
    sym = dk.sym([0, 1])
    return sym.tractor_block(0, "mu").tractor_block(1, "mu")


def adjoint_tractor(kvec):
    """Adjoint tractor of a vector field: (1/n) antisym(D K).  For a CKV
    this is the full 2-form tractor whose transport equation couples back
    to the tractor curvature."""
    dk = tractor_D(ck_split(kvec))
    return dk.antisym([0, 1]).scaled(Q(1, kvec.geom.n))


def primary_part(adj):
    """Recover the vector from an adjoint tractor: contract with X on the
    first slot, take the mu block, raise.  On the image of adjoint_tractor
    this returns the original vector exactly (factor one, no rescaling)."""
    xk = x_tractor(adj.geom, adj.order)
    row = xk.otimes(adj).contract(0, 1)
    return row.tractor_block(0, "mu").raise_slot(0)


def adjoint_transport_residual(adj):
    """Residual of the adjoint-tractor transport equation

        nabla_a K_DE - ktilde^b Omega_ba DE = 0,

    where ktilde is the primary part of K.  Zero for the adjoint tractor
    of any CKV, on any background; the curvature term only matters off
    conformally flat scenes."""
    nab = adj.nabla()
    om = tractor_curvature(adj.geom, nab.order).lower_slot(2)
    kt = primary_part(adj)
    term = kt.otimes(om).contract(0, 1)
    return nab - term


class EinsteinScale:
    """A candidate Einstein scale: density sigma in E[1] together with its
    parallel-tractor certificate.

    Attributes:
        sigma      the density as a weight-1 field jet
        expr       the defining expression (kept for scale transport)
        tractor    I = (1/n) D sigma, up slot, weight 0
        residual   nabla I; identically zero iff sigma is Einstein
        parallel   bool(residual == 0)
        value      sigma at the sample point (must be a nonzero rational)
    """

    def __init__(self, geom, sigma, order=None):
        self.geom = geom
        self.expr = geom.expr(sigma) if isinstance(sigma, str) else sigma
        m = geom.order if order is None else order
        self.sigma = geom.density(self.expr, 1, order=m)
        self.value = self.sigma.component().coeffs[0]
        if not self.value:
            raise GeometryError("scale vanishes at the sample point")
        self.resident = (self.sigma - geom.density("1", 1, order=m)).is_zero()
        self.tractor = tractor_D(self.sigma).scaled(Q(1, geom.n)).raise_slot(0)
        self.residual = self.tractor.nabla()
        self.parallel = self.residual.is_zero()

    def __repr__(self):
        tag = "parallel" if self.parallel else "non-Einstein"
        return "EinsteinScale(%s, %s)" % (self.geom.name, tag)

    def recovery_residual(self):
        """X . I - sigma; zero by construction, kept as a suite check."""
        xk = x_tractor(self.geom, self.tractor.order)
        rec = xk.lower_slot(0).otimes(self.tractor).contract(0, 1)
        return rec - self.sigma.truncated(rec.order)


def scale_curvature_checks(scale):
    """Curvature pairings that must die on a parallel tractor:

        Omega(.,.) I,    W(...,I),    W(I,...)

    Returns the three contractions; each is identically zero when the
    scale is Einstein, with no conformal flatness assumed.
    """
    g = scale.geom
    i_up = scale.tractor
    om = tractor_curvature(g, g.order - 3)
    w = w_tractor_direct(g, g.order - 4)
    k = min(om.order, w.order, i_up.order)
    oi = om.truncated(k).otimes(i_up.truncated(k)).contract(3, 4)
    wi = w.truncated(k).otimes(i_up.truncated(k)).contract(3, 4)
    iw = i_up.truncated(k).otimes(w.truncated(k)).contract(0, 1)
    return oi, wi, iw


def pair_vector(s1, s2):
    """The vector built from two scales on one background:

        k^a = sigma1 grad^a sigma2 - sigma2 grad^a sigma1.

    Plain weight 0.  When both scales are Einstein this is a CKV; the
    converse direction is what the residual builders above test.
    """
    g1 = s1.sigma.nabla().raise_slot(0)
    g2 = s2.sigma.nabla().raise_slot(0)
    return s1.sigma.otimes(g2) - s2.sigma.otimes(g1)


def wedge_tractor(s1, s2):
    """I1 wedge I2 (unhalved: I1 I2 - I2 I1), an up-up 2-form tractor.
    Parallel whenever both scales are, and equal on the nose to the
    adjoint tractor of pair_vector(s1, s2) with both slots raised."""
    t = s1.tractor.otimes(s2.tractor)
    return t - t.transpose((1, 0))


def pair_curvature_checks(s1, s2):
    """Contractions of the pair data into the tractor curvature that
    vanish when both scales are Einstein:

        k^a Omega_ab ,   (grad^a sigma1)(grad^b sigma2) Omega_ab .

    Returns the two residuals."""
    g = s1.geom
    k = pair_vector(s1, s2)
    om = tractor_curvature(g, g.order - 3)
    m = min(k.order, om.order)
    first = k.truncated(m).otimes(om.truncated(m)).contract(0, 1)
    mu1 = s1.sigma.nabla().raise_slot(0)
    mu2 = s2.sigma.nabla().raise_slot(0)
    half = mu1.truncated(m).otimes(om.truncated(m)).contract(0, 1)
    second = mu2.truncated(m).otimes(half).contract(0, 1)
    return first, second
