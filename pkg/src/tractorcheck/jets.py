"""Truncated multivariate Taylor arithmetic over exact rationals.

A JetScalar is the Taylor expansion of a germ at a point, stored densely to
a fixed total degree `order` in `nvars` variables.  Coefficients are exact
rationals, so equality of jets is literal equality and a vanishing jet is a
proof that the germ vanishes to that order.

Storage is graded-lex: multi-indices sorted by total degree, then by tuple
order within a degree.  Degrees <= d therefore occupy a prefix of the
coefficient list, which makes truncation a slice and keeps positions stable
across orders (the position of a multi-index never depends on the order of
the jet holding it).  Index and multiplication tables are precomputed per
(nvars, order) and shared.

Dense storage is sized for order <= MAX_ORDER.  Anything deeper would want
a sparse backend behind the same interface; the tables module-level caches
are the only place such a backend would plug in.

No transcendental functions are provided on purpose: every operation here
(ring ops, reciprocal, integer powers, square root of a perfect-square
unit, partial derivatives) stays inside the rationals, which is what makes
exact-zero verification possible downstream.
"""

from .rationals import Q, ZERO, ONE, sqrt_exact

MAX_ORDER = 10


class JetMismatch(ValueError):
    """Arithmetic attempted between jets of different (nvars, order)."""


class OrderExhausted(ValueError):
    """A derivative was requested from an order-0 jet."""


# ---------------------------------------------------------------------------
# index tables

_spaces = {}


class _Space:
    """Graded-lex exponent enumeration for a fixed number of variables."""

    def __init__(self, nvars):
        self.nvars = nvars
        self.exps = []
        self.pos = {}
        self.sizes = []  # sizes[d] = count of exponents with degree <= d
        self.built = -1

    def ensure(self, order):
        if order > MAX_ORDER:
            raise ValueError(
                "jet order %d exceeds MAX_ORDER=%d (dense storage bound)"
                % (order, MAX_ORDER)
            )
        while self.built < order:
            d = self.built + 1
            batch = sorted(_exponents_of_degree(self.nvars, d))
            for e in batch:
                self.pos[e] = len(self.exps)
                self.exps.append(e)
            self.sizes.append(len(self.exps))
            self.built = d
        return self

    def size(self, order):
        self.ensure(order)
        return self.sizes[order]


def _exponents_of_degree(nvars, d):
    if nvars == 1:
        yield (d,)
        return
    for head in range(d + 1):
        for tail in _exponents_of_degree(nvars - 1, d - head):
            yield (head,) + tail


def _space(nvars):
    sp = _spaces.get(nvars)
    if sp is None:
        sp = _spaces[nvars] = _Space(nvars)
    return sp


_mul_tables = {}


def _mul_rows(nvars, order):
    key = (nvars, order)
    rows = _mul_tables.get(key)
    if rows is None:
        sp = _space(nvars).ensure(order)
        exps = sp.exps
        pos = sp.pos
        sizes = sp.sizes
        rows = []
        for i in range(sizes[order]):
            ei = exps[i]
            di = sum(ei)
            jmax = sizes[order - di]
            row = []
            for j in range(jmax):
                ej = exps[j]
                row.append(pos[tuple(a + b for a, b in zip(ei, ej))])
            rows.append(row)
        _mul_tables[key] = rows
    return rows


def coeff_size(nvars, order):
    return _space(nvars).size(order)


def mul_into(out, a, b, negate=False):
    """out += a*b coefficientwise (or -= with negate), where out is a raw
    coefficient list at the same (nvars, order) as both factors.  The
    accumulation kernel behind the hot tensor loops: one list stays live
    across many fused multiply-adds instead of allocating per term."""
    if a._z or b._z:
        return
    rows = _mul_rows(a.nvars, a.order)
    bc = b.coeffs
    for i, ai in enumerate(a.coeffs):
        if not ai:
            continue
        row = rows[i]
        lim = len(row)
        if negate:
            ai = -ai
        for j in range(lim):
            bj = bc[j]
            if bj:
                t = row[j]
                out[t] = out[t] + ai * bj


def add_into(out, a, negate=False):
    """out += a coefficientwise (or -=); same contract as mul_into."""
    if a._z:
        return
    if negate:
        for i, c in enumerate(a.coeffs):
            if c:
                out[i] = out[i] - c
    else:
        for i, c in enumerate(a.coeffs):
            if c:
                out[i] = out[i] + c


_diff_tables = {}


def _diff_map(nvars, order, v):
    key = (nvars, order, v)
    mp = _diff_tables.get(key)
    if mp is None:
        sp = _space(nvars).ensure(order)
        mp = []
        for src in range(sp.sizes[order]):
            e = sp.exps[src]
            if e[v]:
                shifted = e[:v] + (e[v] - 1,) + e[v + 1 :]
                mp.append((src, sp.pos[shifted], Q(e[v])))
        _diff_tables[key] = mp
    return mp


_zero_jets = {}


def zero_jet(nvars, order):
    key = (nvars, order)
    z = _zero_jets.get(key)
    if z is None:
        n = _space(nvars).size(order)
        z = JetScalar(nvars, order, [ZERO] * n, True)
        _zero_jets[key] = z
    return z


# ---------------------------------------------------------------------------
# the scalar


class JetScalar:
    __slots__ = ("nvars", "order", "coeffs", "_z")

    def __init__(self, nvars, order, coeffs, zero=None):
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs
        self._z = (not any(coeffs)) if zero is None else zero

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, nvars, order, value):
        q = Q(value)
        n = _space(nvars).size(order)
        if not q:
            return zero_jet(nvars, order)
        c = [ZERO] * n
        c[0] = q
        return cls(nvars, order, c, False)

    @classmethod
    def variable(cls, nvars, order, v, base=0):
        """Jet of the coordinate function x_v at a point where it equals base."""
        sp = _space(nvars).ensure(order)
        c = [ZERO] * sp.sizes[order]
        c[0] = Q(base)
        if order >= 1:
            unit = tuple(1 if k == v else 0 for k in range(nvars))
            c[sp.pos[unit]] = ONE
        return cls(nvars, order, c, None)

    @classmethod
    def from_terms(cls, nvars, order, terms):
        """Build from {exponent tuple: coefficient}; test helper."""
        sp = _space(nvars).ensure(order)
        c = [ZERO] * sp.sizes[order]
        for e, q in terms.items():
            if sum(e) > order:
                raise ValueError("term degree exceeds jet order: %r" % (e,))
            c[sp.pos[e]] = Q(q)
        return cls(nvars, order, c, None)

    # -- bookkeeping ---------------------------------------------------------

    def is_zero(self):
        return self._z

    def value(self):
        """Constant term, i.e. the germ's value at the base point."""
        return self.coeffs[0]

    def coefficient(self, e):
        sp = _space(self.nvars)
        return self.coeffs[sp.pos[tuple(e)]]

    def truncated(self, order):
        if order == self.order:
            return self
        if order > self.order:
            raise JetMismatch(
                "cannot extend a jet from order %d to %d" % (self.order, order)
            )
        n = _space(self.nvars).sizes[order]
        return JetScalar(self.nvars, order, self.coeffs[:n], None)

    def _extended(self, order):
        # zero-padding is only sound where the caller controls higher terms
        # (Newton iterations below); not part of the public surface.
        if order == self.order:
            return self
        n = _space(self.nvars).size(order)
        c = list(self.coeffs) + [ZERO] * (n - len(self.coeffs))
        return JetScalar(self.nvars, order, c, self._z)

    def _check(self, other):
        if self.nvars != other.nvars or self.order != other.order:
            raise JetMismatch(
                "jet mismatch: (%d vars, order %d) vs (%d vars, order %d)"
                % (self.nvars, self.order, other.nvars, other.order)
            )

    def __eq__(self, other):
        if isinstance(other, JetScalar):
            return (
                self.nvars == other.nvars
                and self.order == other.order
                and self.coeffs == other.coeffs
            )
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        nz = sum(1 for c in self.coeffs if c)
        return "JetScalar(nvars=%d, order=%d, value=%s, nonzero=%d)" % (
            self.nvars,
            self.order,
            self.coeffs[0],
            nz,
        )

    # -- ring operations ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, JetScalar):
            self._check(other)
            if self._z:
                return other
            if other._z:
                return self
            return JetScalar(
                self.nvars,
                self.order,
                [a + b for a, b in zip(self.coeffs, other.coeffs)],
                None,
            )
        q = Q(other)
        if not q:
            return self
        c = list(self.coeffs)
        c[0] = c[0] + q
        return JetScalar(self.nvars, self.order, c, None)

    __radd__ = __add__

    def __neg__(self):
        if self._z:
            return self
        return JetScalar(self.nvars, self.order, [-a for a in self.coeffs], False)

    def __sub__(self, other):
        if isinstance(other, JetScalar):
            self._check(other)
            if other._z:
                return self
            if self._z:
                return -other
            return JetScalar(
                self.nvars,
                self.order,
                [a - b for a, b in zip(self.coeffs, other.coeffs)],
                None,
            )
        return self.__add__(-Q(other))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if not isinstance(other, JetScalar):
            q = Q(other)
            if self._z or not q:
                return zero_jet(self.nvars, self.order)
            return JetScalar(
                self.nvars, self.order, [a * q for a in self.coeffs], False
            )
        self._check(other)
        if self._z or other._z:
            return zero_jet(self.nvars, self.order)
        rows = _mul_rows(self.nvars, self.order)
        anz = [(i, c) for i, c in enumerate(self.coeffs) if c]
        bnz = [(j, c) for j, c in enumerate(other.coeffs) if c]
        if len(bnz) < len(anz):
            anz, bnz = bnz, anz
        out = [ZERO] * len(self.coeffs)
        for i, ai in anz:
            row = rows[i]
            lim = len(row)
            for j, bj in bnz:
                if j >= lim:
                    break
                t = row[j]
                out[t] = out[t] + ai * bj
        return JetScalar(self.nvars, self.order, out, None)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, JetScalar):
            return self * other.reciprocal()
        q = Q(other)
        if not q:
            raise ZeroDivisionError("jet divided by zero rational")
        return self * (ONE / q)

    def __rtruediv__(self, other):
        return self.reciprocal() * Q(other)

    def __pow__(self, e):
        if not isinstance(e, int):
            raise TypeError("jet power wants an integer exponent")
        if e < 0:
            return self.reciprocal() ** (-e)
        result = JetScalar.constant(self.nvars, self.order, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    # -- series inverses ------------------------------------------------------

    def reciprocal(self):
        a0 = self.coeffs[0]
        if not a0:
            raise ZeroDivisionError("jet reciprocal needs a nonzero constant term")
        x = JetScalar.constant(self.nvars, 0, ONE / a0)
        m = 0
        while m < self.order:
            m = min(2 * m + 1, self.order)
            x = x._extended(m)
            ax = self.truncated(m) * x
            x = x * (2 - ax)
        return x

    def sqrt(self):
        """Square root when the constant term is a nonzero perfect square.

        Computed as a0^(1/2) * binomial series in the nilpotent part; stays
        rational exactly when sqrt(a0) is rational, which the caller must
        arrange (raises otherwise).
        """
        a0 = self.coeffs[0]
        s = sqrt_exact(a0) if a0 else None
        if not s:
            raise ValueError("jet sqrt wants a nonzero perfect-square constant term")
        u = self * (ONE / a0) - 1
        acc = JetScalar.constant(self.nvars, self.order, 1)
        upow = JetScalar.constant(self.nvars, self.order, 1)
        coeff = ONE
        for m in range(1, self.order + 1):
            upow = upow * u
            if upow.is_zero():
                break
            coeff = coeff * (Q(3, 2) - m) / m  # binom(1/2, m) recurrence
            acc = acc + upow * coeff
        return acc * s

    # -- differentiation -----------------------------------------------------

    def partial(self, v):
        if self.order == 0:
            raise OrderExhausted(
                "derivative budget exhausted (order-0 jet differentiated)"
            )
        n = _space(self.nvars).sizes[self.order - 1]
        out = [ZERO] * n
        if not self._z:
            for src, dst, mult in _diff_map(self.nvars, self.order, v):
                c = self.coeffs[src]
                if c:
                    out[dst] = c * mult
        return JetScalar(self.nvars, self.order - 1, out, None)
