"""Pointwise curvature data of a chart metric, in exact jet arithmetic.

Conventions, fixed once for the whole package:

  curvature   [nabla_a, nabla_b] v^c = R_ab^c_d v^d
  Ricci       Ric_bd = R_cb^c_d, scalar Sc = g^bd Ric_bd
  trace J     J = Sc / (2(n-1))
  Schouten    P_ab = (Ric_ab - J g_ab) / (n-2)
  Cotton      A_abc = grad_b P_ca - grad_c P_ba
  Bach        B_ab = grad^c A_acb + P^dc C_dacb
  weights     the conformal metric carries weight +2 in its two lower
              slots; raising one slot with the inverse metric adds -2.

On the unit round sphere these give Sc = n(n-1) and P = g/2.

Tractor slots (extent n+2) store components in the order
(alpha; mu_1..mu_n; tau) regardless of variance: a down slot holds the
component array of its metric-raised partner, so raising or lowering a
tractor slot is a relabel and every tractor-tractor contraction uses one
formula, alpha tau' + tau alpha' + g^ab mu_a mu'_b.  The mu block carries
a lower tensor index.  The connection acts blockwise on each tractor slot:

    (alpha)' = d_a alpha - mu_a
    (mu_b)'  = d_a mu_b + g_ab tau + P_ab alpha   (plus Levi-Civita on b)
    (tau)'   = d_a tau - P_a^c mu_c

while a density trivialized in the resident scale differentiates
componentwise.  Everything here lives at a single chart point to a finite
jet order; derived objects lose derivative orders exactly as consumed
(Christoffel one, curvature two, Cotton three, Bach four), and requesting
more order than was provisioned is an error, never an approximation.
"""

import itertools
import numbers
from fractions import Fraction

from .exprdsl import (Mul, Pow, derivative, eval_jet, parse_expr,
                      r2_expansion, substitute)
from .jets import JetScalar, add_into, mul_into, zero_jet
from .rationals import Q

TENSOR_UP, TENSOR_DOWN, TRACTOR_UP, TRACTOR_DOWN = "u", "d", "U", "D"
_TENSOR = (TENSOR_UP, TENSOR_DOWN)
_TRACTOR = (TRACTOR_UP, TRACTOR_DOWN)


class GeometryError(ValueError):
    pass


def _qnum(w):
    """int or Fraction as an exact backend scalar."""
    if isinstance(w, Fraction):
        return Q(w.numerator) / Q(w.denominator)
    return Q(w)


class FieldJet:
    """A tensor/tractor field germ at the geometry's base point.

    comps is a flat C-order list of JetScalars, one per index combination;
    slots is a string over {u, d, U, D}; weight is the conformal weight of
    the trivialized components.  Binary operations align both operands to
    the coarser jet order first (truncation is exact), so a residual of two
    differently provisioned routes is compared on the orders both reach.
    """

    __slots__ = ("geom", "slots", "weight", "order", "comps", "_nb")

    def __init__(self, geom, slots, weight, order, comps):
        self.geom = geom
        self.slots = slots
        self.weight = Fraction(weight)
        self.order = order
        self.comps = comps
        self._nb = None

    # -- shape bookkeeping --

    def extent(self, s):
        return self.geom.n if self.slots[s] in _TENSOR else self.geom.n + 2

    @property
    def shape(self):
        return tuple(self.extent(s) for s in range(len(self.slots)))

    def strides(self):
        shape = self.shape
        st = [1] * len(shape)
        for i in range(len(shape) - 2, -1, -1):
            st[i] = st[i + 1] * shape[i + 1]
        return st

    def component(self, *idx):
        flat = 0
        for i, st in zip(idx, self.strides()):
            flat += i * st
        return self.comps[flat]

    def is_zero(self):
        return all(c.is_zero() for c in self.comps)

    def nonzero_count(self):
        return sum(1 for c in self.comps if not c.is_zero())

    def _zero(self, order=None):
        return zero_jet(self.geom.n, self.order if order is None else order)

    def __repr__(self):
        return "FieldJet(slots=%r, weight=%s, order=%d, nonzero=%d/%d)" % (
            self.slots, self.weight, self.order,
            self.nonzero_count(), len(self.comps),
        )

    # -- linear structure --

    def truncated(self, order):
        if order == self.order:
            return self
        return FieldJet(self.geom, self.slots, self.weight, order,
                        [c.truncated(order) for c in self.comps])

    def _aligned(self, other):
        if self.geom is not other.geom:
            raise GeometryError("fields live on different geometries")
        if self.slots != other.slots:
            raise GeometryError("slot mismatch: %r vs %r" % (self.slots, other.slots))
        if self.weight != other.weight:
            raise GeometryError(
                "weight mismatch: %s vs %s" % (self.weight, other.weight))
        k = min(self.order, other.order)
        return self.truncated(k), other.truncated(k)

    def __add__(self, other):
        a, b = self._aligned(other)
        return FieldJet(a.geom, a.slots, a.weight, a.order,
                        [x + y for x, y in zip(a.comps, b.comps)])

    def __sub__(self, other):
        a, b = self._aligned(other)
        return FieldJet(a.geom, a.slots, a.weight, a.order,
                        [x - y for x, y in zip(a.comps, b.comps)])

    def __neg__(self):
        return FieldJet(self.geom, self.slots, self.weight, self.order,
                        [-c for c in self.comps])

    def scaled(self, q):
        """Multiply by an exact rational scalar (int, Fraction, or backend)."""
        qq = _qnum(q) if isinstance(q, (int, Fraction)) else q
        if not qq:
            z = self._zero()
            return FieldJet(self.geom, self.slots, self.weight, self.order,
                            [z] * len(self.comps))
        return FieldJet(self.geom, self.slots, self.weight, self.order,
                        [c * qq for c in self.comps])

    def with_weight(self, weight):
        """Relabel the weight.  Only for scale-specific comparisons, where
        both sides are honest jets in one scale but carry different labels
        (the unit-sphere curvature against g wedge g, say)."""
        return FieldJet(self.geom, self.slots, Fraction(weight), self.order,
                        list(self.comps))

    def jet_scaled(self, jet, weight_shift=0):
        """Multiply every component by a scalar germ.

        weight_shift is the conformal weight the multiplier carries (for
        example -2 when multiplying by J), keeping the product's label honest.
        """
        k = min(self.order, jet.order)
        j = jet.truncated(k)
        t = self.truncated(k)
        return FieldJet(t.geom, t.slots, t.weight + Fraction(weight_shift), k,
                        [c * j for c in t.comps])

    # -- multilinear algebra --

    def otimes(self, other):
        if self.geom is not other.geom:
            raise GeometryError("fields live on different geometries")
        k = min(self.order, other.order)
        a = self.truncated(k)
        b = other.truncated(k)
        z = zero_jet(self.geom.n, k)
        comps = []
        for ca in a.comps:
            if ca.is_zero():
                comps.extend([z] * len(b.comps))
            else:
                comps.extend(ca * cb for cb in b.comps)
        return FieldJet(a.geom, a.slots + b.slots, a.weight + b.weight, k, comps)

    def transpose(self, perm):
        """new[i_0..] = old with slot perm[k] carrying index i_k."""
        if sorted(perm) != list(range(len(self.slots))):
            raise GeometryError("bad permutation %r" % (perm,))
        slots = "".join(self.slots[p] for p in perm)
        old = self.strides()
        new_shape = [self.shape[p] for p in perm]
        comps = []
        for idx in itertools.product(*[range(e) for e in new_shape]):
            flat = 0
            for k, p in enumerate(perm):
                flat += idx[k] * old[p]
            comps.append(self.comps[flat])
        return FieldJet(self.geom, slots, self.weight, self.order, comps)

    def _survivors(self, dropped):
        """Base offsets with the dropped slots pinned at index 0, iterated
        in C order of the surviving slots."""
        keep = [s for s in range(len(self.slots)) if s not in dropped]
        strides = self.strides()
        shape = self.shape
        if not keep:
            yield 0
            return
        for idx in itertools.product(*[range(shape[s]) for s in keep]):
            base = 0
            for k, s in enumerate(keep):
                base += idx[k] * strides[s]
            yield base

    def contract(self, i, j):
        """Contract slot i against slot j.

        A (u, d) pair sums directly.  Any tractor pair goes through the
        tractor metric, which in stored components is the same formula for
        every variance combination:

            alpha tau' + tau alpha' + g^ab mu_a mu'_b

        Same-variance tensor pairs must use trace() instead.
        """
        ki, kj = self.slots[i], self.slots[j]
        keep_slots = "".join(
            self.slots[s] for s in range(len(self.slots)) if s not in (i, j))
        strides = self.strides()
        si, sj = strides[i], strides[j]
        n = self.geom.n
        z = self._zero()
        comps = []
        if ki in _TENSOR and kj in _TENSOR:
            if ki == kj:
                raise GeometryError(
                    "tensor slots %d, %d have equal variance; use trace()" % (i, j))
            for base in self._survivors((i, j)):
                acc = z
                for a in range(n):
                    c = self.comps[base + a * (si + sj)]
                    if not c.is_zero():
                        acc = acc + c
                comps.append(acc)
        elif ki in _TRACTOR and kj in _TRACTOR:
            gi = self.geom.gi(self.order)
            tau = n + 1
            for base in self._survivors((i, j)):
                acc = z
                c = self.comps[base + tau * sj]          # alpha_i tau_j
                if not c.is_zero():
                    acc = acc + c
                c = self.comps[base + tau * si]          # tau_i alpha_j
                if not c.is_zero():
                    acc = acc + c
                for a in range(n):
                    for b in range(n):
                        g_ab = gi[a][b]
                        if g_ab.is_zero():
                            continue
                        c = self.comps[base + (1 + a) * si + (1 + b) * sj]
                        if not c.is_zero():
                            acc = acc + g_ab * c
                comps.append(acc)
        else:
            raise GeometryError(
                "cannot contract slot kinds %r and %r" % (ki, kj))
        return FieldJet(self.geom, keep_slots, self.weight, self.order, comps)

    def trace(self, i, j):
        """Metric trace of two equal-variance tensor slots: g^ab for a (d, d)
        pair (weight -2), g_ab for a (u, u) pair (weight +2)."""
        ki, kj = self.slots[i], self.slots[j]
        if not (ki in _TENSOR and ki == kj):
            raise GeometryError("trace needs two tensor slots of one variance")
        n = self.geom.n
        if ki == TENSOR_DOWN:
            met = self.geom.gi(self.order)
            shift = Fraction(-2)
        else:
            met = self.geom.gm(self.order)
            shift = Fraction(2)
        keep_slots = "".join(
            self.slots[s] for s in range(len(self.slots)) if s not in (i, j))
        strides = self.strides()
        si, sj = strides[i], strides[j]
        z = self._zero()
        comps = []
        for base in self._survivors((i, j)):
            acc = z
            for a in range(n):
                for b in range(n):
                    m = met[a][b]
                    if m.is_zero():
                        continue
                    c = self.comps[base + a * si + b * sj]
                    if c.is_zero():
                        continue
                    acc = acc + m * c
            comps.append(acc)
        return FieldJet(self.geom, keep_slots, self.weight + shift,
                        self.order, comps)

    def raise_slot(self, s):
        """Tensor slot: contract with the inverse metric (weight -2).
        Tractor slot: relabel only, stored components already look raised."""
        kind = self.slots[s]
        if kind == TRACTOR_DOWN:
            return FieldJet(self.geom,
                            self.slots[:s] + TRACTOR_UP + self.slots[s + 1:],
                            self.weight, self.order, list(self.comps))
        if kind != TENSOR_DOWN:
            raise GeometryError("slot %d is not a down slot" % s)
        return self._move_tensor_slot(s, self.geom.gi(self.order),
                                      TENSOR_UP, Fraction(-2))

    def lower_slot(self, s):
        kind = self.slots[s]
        if kind == TRACTOR_UP:
            return FieldJet(self.geom,
                            self.slots[:s] + TRACTOR_DOWN + self.slots[s + 1:],
                            self.weight, self.order, list(self.comps))
        if kind != TENSOR_UP:
            raise GeometryError("slot %d is not an up slot" % s)
        return self._move_tensor_slot(s, self.geom.gm(self.order),
                                      TENSOR_DOWN, Fraction(2))

    def _move_tensor_slot(self, s, met, new_kind, shift):
        n = self.geom.n
        st = self.strides()[s]
        z = self._zero()
        comps = [z] * len(self.comps)
        for base in self._survivors((s,)):
            vals = [self.comps[base + b * st] for b in range(n)]
            for a in range(n):
                acc = z
                for b in range(n):
                    m = met[a][b]
                    if m.is_zero() or vals[b].is_zero():
                        continue
                    acc = acc + m * vals[b]
                comps[base + a * st] = acc
        return FieldJet(self.geom,
                        self.slots[:s] + new_kind + self.slots[s + 1:],
                        self.weight + shift, self.order, comps)

    def _symmetrize(self, positions, signed):
        kinds = {self.slots[p] for p in positions}
        if len(kinds) != 1:
            raise GeometryError("cannot (anti)symmetrize mixed slot kinds")
        npos = len(positions)
        total = None
        count = 0
        for perm in itertools.permutations(range(npos)):
            full = list(range(len(self.slots)))
            for k, p in enumerate(perm):
                full[positions[k]] = positions[p]
            term = self.transpose(full)
            if signed:
                sgn = _perm_sign(perm)
                if sgn < 0:
                    term = -term
            total = term if total is None else total + term
            count += 1
        return total.scaled(Fraction(1, count))

    def sym(self, positions):
        return self._symmetrize(tuple(positions), signed=False)

    def antisym(self, positions):
        return self._symmetrize(tuple(positions), signed=True)

    # -- differentiation --

    def nabla(self):
        """Covariant derivative; the new lower slot comes first.  Output jet
        order drops by one.  Cached: fields are immutable and box() reuses
        the first derivative."""
        if self._nb is None:
            self._nb = self._nabla_impl()
        return self._nb

    def _nabla_impl(self):
        g = self.geom
        n = g.n
        k = self.order - 1
        if k < 0:
            raise GeometryError("no derivative order left on this field")
        has_slots = bool(self.slots)
        gamma = g.gamma(k) if has_slots else None
        has_tractor = any(c in _TRACTOR for c in self.slots)
        if has_tractor:
            gm = g.gm(k)
            P = g.schouten(k)
            pmix = g.pmix(k)
        T = self.truncated(k)
        strides = self.strides() if has_slots else []
        z = zero_jet(n, k)
        N = len(self.comps)
        out = [z] * (n * N)
        shape = self.shape
        all_idx = (list(itertools.product(*[range(e) for e in shape]))
                   if has_slots else [()])
        zc = z.coeffs
        # acc is a raw coefficient list, materialized lazily; every
        # correction term fuses multiply-accumulate into it rather than
        # allocating an intermediate jet.  This loop dominates everything
        # built on repeated derivatives, so it stays allocation-free.
        for flat, idx in enumerate(all_idx):
            comp = self.comps[flat]
            comp_zero = comp.is_zero()
            for a in range(n):
                acc = None if comp_zero else list(comp.partial(a).coeffs)
                for s, kind in enumerate(self.slots):
                    st = strides[s]
                    i_s = idx[s]
                    rebase = flat - i_s * st
                    if kind == TENSOR_UP:
                        grow = gamma[i_s][a]
                        for m in range(n):
                            gcf = grow[m]
                            if gcf.is_zero():
                                continue
                            c = T.comps[rebase + m * st]
                            if not c.is_zero():
                                if acc is None:
                                    acc = list(zc)
                                mul_into(acc, gcf, c)
                    elif kind == TENSOR_DOWN:
                        for m in range(n):
                            gcf = gamma[m][a][i_s]
                            if gcf.is_zero():
                                continue
                            c = T.comps[rebase + m * st]
                            if not c.is_zero():
                                if acc is None:
                                    acc = list(zc)
                                mul_into(acc, gcf, c, negate=True)
                    elif i_s == 0:
                        c = T.comps[rebase + (1 + a) * st]
                        if not c.is_zero():
                            if acc is None:
                                acc = list(zc)
                            add_into(acc, c, negate=True)
                    elif i_s <= n:
                        b = i_s - 1
                        c = T.comps[rebase + (n + 1) * st]
                        if not (gm[a][b].is_zero() or c.is_zero()):
                            if acc is None:
                                acc = list(zc)
                            mul_into(acc, gm[a][b], c)
                        c = T.comps[rebase]
                        if not (P[a][b].is_zero() or c.is_zero()):
                            if acc is None:
                                acc = list(zc)
                            mul_into(acc, P[a][b], c)
                        for m in range(n):
                            gcf = gamma[m][a][b]
                            if gcf.is_zero():
                                continue
                            c = T.comps[rebase + (1 + m) * st]
                            if not c.is_zero():
                                if acc is None:
                                    acc = list(zc)
                                mul_into(acc, gcf, c, negate=True)
                    else:
                        for cix in range(n):
                            pcf = pmix[a][cix]
                            if pcf.is_zero():
                                continue
                            c = T.comps[rebase + (1 + cix) * st]
                            if not c.is_zero():
                                if acc is None:
                                    acc = list(zc)
                                mul_into(acc, pcf, c, negate=True)
                out[a * N + flat] = (
                    z if acc is None else JetScalar(n, k, acc, None))
        return FieldJet(g, TENSOR_DOWN + self.slots, self.weight, k, out)

    def laplacian(self):
        return self.nabla().nabla().trace(0, 1)

    def box(self):
        """Conformal Laplacian-type box: Delta + (weight) J."""
        lap = self.laplacian()
        jterm = self.jet_scaled(self.geom.J(lap.order), -2).scaled(self.weight)
        return lap + jterm

    # -- tractor block access --

    def tractor_block(self, s, which):
        """Extract one block of tractor slot s.

        'alpha' and 'tau' drop the slot (weight shifts +1 and -1); 'mu'
        turns it into a lower tensor slot (weight shift +1).  These are the
        pairings with the three canonical injectors.
        """
        if self.slots[s] not in _TRACTOR:
            raise GeometryError("slot %d is not a tractor slot" % s)
        n = self.geom.n
        st = self.strides()[s]
        rest = self.slots[:s] + self.slots[s + 1:]
        if which == "alpha":
            comps = [self.comps[base] for base in self._survivors((s,))]
            return FieldJet(self.geom, rest, self.weight + 1, self.order, comps)
        if which == "tau":
            comps = [self.comps[base + (n + 1) * st]
                     for base in self._survivors((s,))]
            return FieldJet(self.geom, rest, self.weight - 1, self.order, comps)
        if which == "mu":
            slots = self.slots[:s] + TENSOR_DOWN + self.slots[s + 1:]
            comps = []
            for idx in itertools.product(
                    *[range(n) if t == s else range(self.shape[t])
                      for t in range(len(self.slots))]):
                flat = 0
                for t, stt in enumerate(self.strides()):
                    flat += (idx[t] + 1 if t == s else idx[t]) * stt
                comps.append(self.comps[flat])
            return FieldJet(self.geom, slots, self.weight + 1, self.order, comps)
        raise GeometryError("unknown block %r" % which)

    def zero_like(self, slots=None, weight=None, order=None):
        slots = self.slots if slots is None else slots
        order = self.order if order is None else order
        weight = self.weight if weight is None else weight
        size = 1
        for s in range(len(slots)):
            size *= self.geom.n if slots[s] in _TENSOR else self.geom.n + 2
        z = zero_jet(self.geom.n, order)
        return FieldJet(self.geom, slots, weight, order, [z] * size)


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def from_blocks(position, kind, alpha, mu, tau):
    """Assemble a field with a new tractor slot at `position` from its
    blocks.  alpha and tau carry the remaining slots; mu has an extra lower
    tensor slot at `position`.  The result's weight w is alpha.weight - 1,
    and the blocks must satisfy mu.weight = w + 1, tau.weight = w - 1 (the
    same bookkeeping tractor_block applies in reverse), which catches most
    assembly mistakes at the door.
    """
    geom = alpha.geom
    n = geom.n
    w = alpha.weight - 1
    if mu.weight != w + 1 or tau.weight != w - 1:
        raise GeometryError(
            "block weights (%s, %s, %s) do not fit a weight-%s tractor" %
            (alpha.weight, mu.weight, tau.weight, w))
    rest = alpha.slots
    if tau.slots != rest:
        raise GeometryError("alpha and tau block slots differ")
    if mu.slots != rest[:position] + TENSOR_DOWN + rest[position:]:
        raise GeometryError("mu block slots %r do not embed at position %d"
                            % (mu.slots, position))
    if kind not in _TRACTOR:
        raise GeometryError("kind must be a tractor letter")
    order = min(alpha.order, mu.order, tau.order)
    a = alpha.truncated(order)
    m = mu.truncated(order)
    t = tau.truncated(order)
    slots = rest[:position] + kind + rest[position:]
    shape = []
    for s in range(len(slots)):
        shape.append(n if slots[s] in _TENSOR else n + 2)
    comps = []
    for idx in itertools.product(*[range(e) for e in shape]):
        lam = idx[position]
        rest_idx = idx[:position] + idx[position + 1:]
        if lam == 0:
            comps.append(a.component(*rest_idx))
        elif lam <= n:
            mu_idx = idx[:position] + (lam - 1,) + idx[position + 1:]
            comps.append(m.component(*mu_idx))
        else:
            comps.append(t.component(*rest_idx))
    return FieldJet(geom, slots, w, order, comps)


class Geometry:
    """All curvature data of one chart metric at one rational point, to one
    jet order.  Derived objects are computed once at the deepest order they
    support and truncated on demand; every accessor takes the order the
    caller can afford and raises when the provisioned metric jets cannot
    honestly supply it.
    """

    def __init__(self, name, coordinates, metric_entries, point, order):
        self.name = name
        self.coords = tuple(coordinates)
        self.n = len(self.coords)
        self.point = tuple(_qnum(p) if isinstance(p, (int, Fraction)) else p
                           for p in point)
        if len(self.point) != self.n:
            raise GeometryError("point arity does not match the chart")
        self.order = order
        self.metric_entries = dict(metric_entries)
        self._cache = {}

    def __repr__(self):
        return "Geometry(%r, n=%d, order=%d)" % (self.name, self.n, self.order)

    @classmethod
    def from_texts(cls, name, coords, entries, point, order):
        """entries maps 'ij' digit-pair keys (i <= j) to expression strings
        over the coordinates and r2."""
        syms = tuple(coords) + ("r2",)
        r2e = r2_expansion(coords)
        met = {}
        for key, text in entries.items():
            i, j = int(key[0]), int(key[1])
            if not 1 <= i <= j <= len(coords):
                raise GeometryError("bad metric key %r" % key)
            met[(i, j)] = substitute(parse_expr(text, syms), {"r2": r2e})
        return cls(name, coords, met, point, order)

    # -- expression plumbing --

    def env(self, order):
        key = ("env", order)
        if key not in self._cache:
            self._cache[key] = {
                name: JetScalar.variable(self.n, order, v, base=self.point[v])
                for v, name in enumerate(self.coords)
            }
        return self._cache[key]

    def expr(self, text):
        """Parse a coordinate expression; r2 means the sum of squared
        coordinates and is expanded on the spot."""
        if isinstance(text, str):
            e = parse_expr(text, self.coords + ("r2",))
            return substitute(e, {"r2": r2_expansion(self.coords)})
        return text

    def jet(self, expr_or_text, order):
        return eval_jet(self.expr(expr_or_text), self.env(order))

    # -- raw curvature chain (nested lists of JetScalar) --

    def _avail(self, what, k, depth):
        if k > self.order - depth:
            raise GeometryError(
                "%s at order %d needs metric jets of order %d, "
                "but %r was provisioned at order %d"
                % (what, k, k + depth, self.name, self.order))

    def _truncate_grid(self, grid, k):
        if isinstance(grid, JetScalar):
            return grid.truncated(k)
        return [self._truncate_grid(g, k) for g in grid]

    def _at(self, key, k, depth, builder):
        self._avail(key, k, depth)
        full_key = (key, self.order - depth)
        if full_key not in self._cache:
            self._cache[full_key] = builder()
        if k == self.order - depth:
            return self._cache[full_key]
        trunc_key = (key, k)
        if trunc_key not in self._cache:
            self._cache[trunc_key] = self._truncate_grid(self._cache[full_key], k)
        return self._cache[trunc_key]

    def gm(self, k):
        return self._at("metric", k, 0, self._build_gm)

    def gi(self, k):
        return self._at("inverse metric", k, 0, self._build_gi)

    def gamma(self, k):
        return self._at("Christoffel", k, 1, self._build_gamma)

    def riem(self, k):
        return self._at("curvature", k, 2, self._build_riem)

    def ric(self, k):
        return self._at("Ricci", k, 2, self._build_ric)

    def sc(self, k):
        return self._at("scalar curvature", k, 2, self._build_sc)

    def J(self, k):
        return self._at("J", k, 2,
                        lambda: self.sc(self.order - 2) * Q(1, 2 * (self.n - 1)))

    def schouten(self, k):
        return self._at("Schouten", k, 2, self._build_schouten)

    def pmix(self, k):
        return self._at("mixed Schouten", k, 2, self._build_pmix)

    def weyl(self, k):
        return self._at("Weyl", k, 2, self._build_weyl)

    def cotton(self, k):
        return self._at("Cotton", k, 3, self._build_cotton)

    def bach(self, k):
        return self._at("Bach", k, 4, self._build_bach)

    def _build_gm(self):
        n = self.n
        K = self.order
        env = self.env(K)
        z = zero_jet(n, K)
        gm = [[z] * n for _ in range(n)]
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                e = self.metric_entries.get((i, j))
                if e is None:
                    continue
                jet = eval_jet(e, env)
                gm[i - 1][j - 1] = jet
                gm[j - 1][i - 1] = jet
        return gm

    def _build_gi(self):
        n = self.n
        K = self.order
        gm = self.gm(K)
        z = zero_jet(n, K)
        diagonal = all(gm[i][j].is_zero()
                       for i in range(n) for j in range(n) if i != j)
        if diagonal:
            gi = [[z] * n for _ in range(n)]
            for i in range(n):
                if gm[i][i].is_zero() or not gm[i][i].value():
                    raise GeometryError("metric is singular at the base point")
                gi[i][i] = gm[i][i].reciprocal()
            return gi
        # Gauss-Jordan with constant-term pivoting; exact throughout.
        one = JetScalar.constant(n, K, 1)
        A = [list(row) for row in gm]
        I = [[one if i == j else z for j in range(n)] for i in range(n)]
        for col in range(n):
            piv = None
            for r in range(col, n):
                if A[r][col].value():
                    piv = r
                    break
            if piv is None:
                raise GeometryError("metric is singular at the base point")
            if piv != col:
                A[col], A[piv] = A[piv], A[col]
                I[col], I[piv] = I[piv], I[col]
            inv = A[col][col].reciprocal()
            A[col] = [x if x.is_zero() else x * inv for x in A[col]]
            I[col] = [x if x.is_zero() else x * inv for x in I[col]]
            for r in range(n):
                if r == col:
                    continue
                f = A[r][col]
                if f.is_zero():
                    continue
                A[r] = [xr - f * xc if not xc.is_zero() else xr
                        for xr, xc in zip(A[r], A[col])]
                I[r] = [xr - f * xc if not xc.is_zero() else xr
                        for xr, xc in zip(I[r], I[col])]
        return I

    def _build_gamma(self):
        n = self.n
        k = self.order - 1
        gm = self.gm(self.order)
        gi = self.gi(k)
        z = zero_jet(n, k)
        # dg[a][i][j] = partial_a g_ij at order k
        dg = [[[gm[i][j].partial(a) if not gm[i][j].is_zero() else z
                for j in range(n)] for i in range(n)] for a in range(n)]
        half = Q(1, 2)
        gamma = [[[z] * n for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(a, n):
                # lowered symbol: (d_a g_db + d_b g_da - d_d g_ab)/2
                low = []
                for d in range(n):
                    t = dg[a][d][b] + dg[b][d][a] - dg[d][a][b]
                    low.append(t if t.is_zero() else t * half)
                for c in range(n):
                    acc = z
                    for d in range(n):
                        if gi[c][d].is_zero() or low[d].is_zero():
                            continue
                        acc = acc + gi[c][d] * low[d]
                    gamma[c][a][b] = acc
                    gamma[c][b][a] = acc
        return gamma

    def _build_riem(self):
        n = self.n
        k = self.order - 2
        gamma_full = self.gamma(self.order - 1)
        gamma = self.gamma(k)
        z = zero_jet(n, k)
        dgam = [[[[gamma_full[c][b][d].partial(a)
                   if not gamma_full[c][b][d].is_zero() else z
                   for d in range(n)] for b in range(n)]
                 for c in range(n)] for a in range(n)]
        R = [[[[z] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(n):
                    for d in range(n):
                        acc = dgam[a][c][b][d] - dgam[b][c][a][d]
                        for e in range(n):
                            t1a, t1b = gamma[c][a][e], gamma[e][b][d]
                            if not (t1a.is_zero() or t1b.is_zero()):
                                acc = acc + t1a * t1b
                            t2a, t2b = gamma[c][b][e], gamma[e][a][d]
                            if not (t2a.is_zero() or t2b.is_zero()):
                                acc = acc - t2a * t2b
                        R[a][b][c][d] = acc
                        R[b][a][c][d] = -acc
        return R

    def _build_ric(self):
        n = self.n
        k = self.order - 2
        R = self.riem(k)
        z = zero_jet(n, k)
        ric = [[z] * n for _ in range(n)]
        for b in range(n):
            for d in range(n):
                acc = z
                for c in range(n):
                    t = R[c][b][c][d]
                    if not t.is_zero():
                        acc = acc + t
                ric[b][d] = acc
        return ric

    def _build_sc(self):
        n = self.n
        k = self.order - 2
        ric = self.ric(k)
        gi = self.gi(k)
        acc = zero_jet(n, k)
        for b in range(n):
            for d in range(n):
                if gi[b][d].is_zero() or ric[b][d].is_zero():
                    continue
                acc = acc + gi[b][d] * ric[b][d]
        return acc

    def _build_schouten(self):
        n = self.n
        k = self.order - 2
        ric = self.ric(k)
        gm = self.gm(k)
        Jj = self.J(k)
        inv = Q(1, n - 2)
        out = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                t = ric[a][b]
                if not gm[a][b].is_zero():
                    t = t - Jj * gm[a][b]
                out[a][b] = t if t.is_zero() else t * inv
        return out

    def _build_pmix(self):
        n = self.n
        k = self.order - 2
        P = self.schouten(k)
        gi = self.gi(k)
        z = zero_jet(n, k)
        out = [[z] * n for _ in range(n)]
        for a in range(n):
            for c in range(n):
                acc = z
                for b in range(n):
                    if P[a][b].is_zero() or gi[b][c].is_zero():
                        continue
                    acc = acc + P[a][b] * gi[b][c]
                out[a][c] = acc
        return out

    def _build_weyl(self):
        n = self.n
        k = self.order - 2
        R = self.riem(k)
        gm = self.gm(k)
        P = self.schouten(k)
        z = zero_jet(n, k)

        def pg(x, y, u, v):
            # g_xy P_uv with zero skip
            if gm[x][y].is_zero() or P[u][v].is_zero():
                return z
            return gm[x][y] * P[u][v]

        C = [[[[z] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(n):
                    for d in range(n):
                        # lowered curvature g_ce R_ab^e_d
                        acc = z
                        for e in range(n):
                            if gm[c][e].is_zero() or R[a][b][e][d].is_zero():
                                continue
                            acc = acc + gm[c][e] * R[a][b][e][d]
                        acc = acc - pg(c, a, b, d) + pg(c, b, a, d)
                        acc = acc - pg(d, b, a, c) + pg(d, a, b, c)
                        C[a][b][c][d] = acc
                        C[b][a][c][d] = -acc
        return C

    def _build_cotton(self):
        n = self.n
        k = self.order - 3
        P_full = self.schouten(self.order - 2)
        gamma = self.gamma(k)
        z = zero_jet(n, k)
        # np_[b][c][a] = nabla_b P_ca
        np_ = [[[z] * n for _ in range(n)] for _ in range(n)]
        P = self.schouten(k)
        for b in range(n):
            for c in range(n):
                for a in range(n):
                    acc = (P_full[c][a].partial(b)
                           if not P_full[c][a].is_zero() else z)
                    for m in range(n):
                        g1 = gamma[m][b][c]
                        if not (g1.is_zero() or P[m][a].is_zero()):
                            acc = acc - g1 * P[m][a]
                        g2 = gamma[m][b][a]
                        if not (g2.is_zero() or P[c][m].is_zero()):
                            acc = acc - g2 * P[c][m]
                    np_[b][c][a] = acc
        A = [[[z] * n for _ in range(n)] for _ in range(n)]
        for a in range(n):
            for b in range(n):
                for c in range(b + 1, n):
                    t = np_[b][c][a] - np_[c][b][a]
                    A[a][b][c] = t
                    A[a][c][b] = -t
        return A

    def _build_bach(self):
        k = self.order - 4
        cot = self.cotton_field(self.order - 3)
        na = cot.nabla()
        term1 = na.trace(0, 2)
        # P^dc C_dacb: pair P's slots with the first and third Weyl slots
        pup = self.schouten_field(k).raise_slot(0).raise_slot(1)
        t2 = pup.otimes(self.weyl_field(k)).contract(0, 2).contract(0, 2)
        both = term1 + t2
        n = self.n
        return [[both.component(a, b) for b in range(n)] for a in range(n)]

    # -- FieldJet views --

    def _grid_field(self, grid, slots, weight, order):
        comps = []

        def walk(g, depth):
            if depth == len(slots):
                comps.append(g)
                return
            for x in g:
                walk(x, depth + 1)

        walk(grid, 0)
        return FieldJet(self, slots, weight, order, comps)

    def j_field(self, k):
        """Schouten trace as a rank-0 density of weight -2."""
        return FieldJet(self, "", Fraction(-2), k, [self.J(k)])

    def metric_field(self, k):
        return self._grid_field(self.gm(k), "dd", 2, k)

    def inverse_metric_field(self, k):
        return self._grid_field(self.gi(k), "uu", -2, k)

    def ricci_field(self, k):
        return self._grid_field(self.ric(k), "dd", 0, k)

    def schouten_field(self, k):
        return self._grid_field(self.schouten(k), "dd", 0, k)

    def riemann_field(self, k):
        """R_ab^c_d with the commutator convention; a plumbing object, so it
        is labeled weight 0 and lowering the third slot yields the weight-2
        lowered curvature."""
        return self._grid_field(self.riem(k), "ddud", 0, k)

    def weyl_field(self, k):
        return self._grid_field(self.weyl(k), "dddd", 2, k)

    def cotton_field(self, k):
        return self._grid_field(self.cotton(k), "ddd", 0, k)

    def bach_field(self, k):
        return self._grid_field(self.bach(k), "dd", -2, k)

    # -- field builders --

    def density(self, expr_or_text, weight, order=None):
        k = self.order if order is None else order
        if isinstance(expr_or_text, numbers.Rational):
            j = JetScalar.constant(self.n, k, _qnum(expr_or_text))
        else:
            j = self.jet(expr_or_text, k)
        return FieldJet(self, "", weight, k, [j])

    def field_from(self, slots, weight, nested, order=None):
        """Build a field from nested lists of expressions (strings, Exprs,
        or numbers), shaped like the slot extents."""
        k = self.order if order is None else order
        comps = []

        def walk(node, depth):
            if depth == len(slots):
                if isinstance(node, numbers.Rational):
                    comps.append(JetScalar.constant(self.n, k, _qnum(node)))
                else:
                    comps.append(self.jet(node, k))
                return
            want = self.n if slots[depth] in _TENSOR else self.n + 2
            if len(node) != want:
                raise GeometryError("component list has extent %d, expected %d"
                                    % (len(node), want))
            for x in node:
                walk(x, depth + 1)

        walk(nested, 0)
        return FieldJet(self, slots, weight, k, comps)

    def rescaled(self, omega_expr, name=None):
        """Geometry of the conformally rescaled metric (omega squared times
        this one), same chart, same point, same provisioned order."""
        om = self.expr(omega_expr)
        entries = {}
        for key, e in self.metric_entries.items():
            entries[key] = Mul(Pow(om, 2), e)
        return Geometry(name or (self.name + "+rescale"),
                        self.coords, entries, self.point, self.order)


def rescale_field(field, omega_expr, new_geom):
    """Transport a field to the conformally rescaled geometry.

    omega_expr is the rescaling factor (the new metric must equal omega
    squared times the old one; this is trusted, not rechecked).  Density
    components pick up omega^w; each tractor slot mixes blockwise with
    Upsilon = d(log omega), computed symbolically so no jet order is lost:

        alpha' = omega (alpha)
        mu_b'  = omega (mu_b + Upsilon_b alpha)
        tau'   = omega^-1 (tau - Upsilon^b mu_b - 1/2 |Upsilon|^2 alpha)

    Tensor slots keep their chart components.  Half-integer weights need
    omega to have an exact rational square root at the base point.
    """
    old = field.geom
    if (new_geom.coords != old.coords or tuple(new_geom.point) != tuple(old.point)):
        raise GeometryError("rescale target must share the chart and point")
    K = field.order
    n = old.n
    om_sym = old.expr(omega_expr)
    om = eval_jet(om_sym, old.env(K))
    if not om.value():
        raise GeometryError("rescale factor vanishes at the base point")
    om_inv = om.reciprocal()
    ups = []
    for v, name in enumerate(old.coords):
        dom = eval_jet(derivative(om_sym, name), old.env(K))
        ups.append(dom if dom.is_zero() else om_inv * dom)
    gi = old.gi(K)
    z = zero_jet(n, K)
    upsup = []
    for b in range(n):
        acc = z
        for c in range(n):
            if gi[b][c].is_zero() or ups[c].is_zero():
                continue
            acc = acc + gi[b][c] * ups[c]
        upsup.append(acc)
    ups2 = z
    for b in range(n):
        if not (ups[b].is_zero() or upsup[b].is_zero()):
            ups2 = ups2 + ups[b] * upsup[b]
    half_ups2 = ups2 * Q(1, 2)

    w = field.weight
    if w.denominator == 1:
        phi = om ** int(w)
    elif w.denominator == 2:
        root = om.sqrt()
        phi = root ** int(2 * w)
    else:
        raise GeometryError("weight %s is not a half-integer" % (w,))

    comps = list(field.comps)
    strides = field.strides()
    for s, kind in enumerate(field.slots):
        if kind not in _TRACTOR:
            continue
        st = strides[s]
        tau = n + 1
        survivors = FieldJet(old, field.slots, w, K, comps)._survivors((s,))
        for base in survivors:
            alpha = comps[base]
            mus = [comps[base + (1 + b) * st] for b in range(n)]
            tval = comps[base + tau * st]
            alpha_zero = alpha.is_zero()
            comps[base] = alpha if alpha_zero else om * alpha
            for b in range(n):
                t = mus[b]
                if not alpha_zero and not ups[b].is_zero():
                    t = t + ups[b] * alpha
                comps[base + (1 + b) * st] = t if t.is_zero() else om * t
            t = tval
            for b in range(n):
                if not (upsup[b].is_zero() or mus[b].is_zero()):
                    t = t - upsup[b] * mus[b]
            if not alpha_zero and not half_ups2.is_zero():
                t = t - half_ups2 * alpha
            comps[base + tau * st] = t if t.is_zero() else om_inv * t
    if not (phi.is_zero() or (phi - JetScalar.constant(n, K, 1)).is_zero()):
        comps = [c if c.is_zero() else phi * c for c in comps]
    return FieldJet(new_geom, field.slots, w, K, comps)
