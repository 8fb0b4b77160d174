"""Rational expression language and the scene file format.

Metric entries, conformal scale factors and seeded densities are all written
in a tiny expression language over exact rationals:

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' int)?
    atom   := int | int '/' int | ident | '(' expr ')'

'^' binds tighter than unary minus, so -x^2 is -(x^2).  A '/' directly
between two integers is a rational literal unless a '^' follows (so 1/2^3
keeps the grammar's precedence and means 1/8).  There are deliberately no
transcendental functions: evaluation lands in JetScalar arithmetic and must
stay exactly rational.

The identifier r2 abbreviates the sum of squares of all coordinates and is
expanded at scene load, never kept in a parsed tree handed to evaluation.

Scene files are sectioned key-value text (see parse_scene) describing a
chart metric, optional conformal scale factors claimed to be Einstein, and
rational sample points.
"""

import configparser
import io
import re
from dataclasses import dataclass

from .jets import JetScalar
from .rationals import Q, parse_rational


class ExprError(ValueError):
    pass


class SceneError(ValueError):
    pass


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    value: object  # exact rational


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class Add:
    left: object
    right: object


@dataclass(frozen=True)
class Sub:
    left: object
    right: object


@dataclass(frozen=True)
class Mul:
    left: object
    right: object


@dataclass(frozen=True)
class Div:
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([-+*/^()]))")


def _tokenize(text):
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            rest = text[i:].strip()
            if not rest:
                break
            raise ExprError("bad character %r in expression %r" % (rest[0], text))
        if m.group(1) is not None:
            out.append(("int", m.group(1)))
        elif m.group(2) is not None:
            out.append(("ident", m.group(2)))
        else:
            out.append(("op", m.group(3)))
        i = m.end()
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, text, symbols):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.symbols = symbols

    def peek(self, ahead=0):
        k = min(self.i + ahead, len(self.toks) - 1)
        return self.toks[k]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg):
        raise ExprError("%s (in %r)" % (msg, self.text))

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self):
        if self.peek() == ("op", "-"):
            self.take()
            return Neg(self.factor())
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "int":
                self.fail("exponent must be an integer")
            return Pow(node, int(val))
        return node

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            # int '/' int is a rational literal unless '^' comes after,
            # in which case the grammar's precedence ('^' over '/') wins
            if (
                self.peek() == ("op", "/")
                and self.peek(1)[0] == "int"
                and self.peek(2) != ("op", "^")
            ):
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    self.fail("rational literal with zero denominator")
                return Lit(Q(int(val), den))
            return Lit(Q(int(val)))
        if kind == "ident":
            if val not in self.symbols:
                self.fail("unknown identifier %r" % val)
            return Var(val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            if self.take() != ("op", ")"):
                self.fail("missing closing parenthesis")
            return node
        self.fail("unexpected token %r" % val)


def parse_expr(text, symbols):
    p = _Parser(text, frozenset(symbols))
    node = p.expr()
    if p.peek() != ("end", ""):
        p.fail("trailing input after expression")
    return node


# ---------------------------------------------------------------------------
# printing (structure preserving: parse(to_string(e)) == e for parser output)

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e):
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Lit):
        if e.value < 0:
            return _PREC_NEG
        if e.value.denominator != 1:
            return _PREC_MUL  # prints as p/q, binds like division
        return _PREC_ATOM
    return _PREC_ATOM


def _wrap(child, parent_prec, is_right=False):
    s = to_string(child)
    cp = _prec(child)
    if cp < parent_prec or (cp == parent_prec and is_right and parent_prec in (1, 2)):
        return "(" + s + ")"
    return s


def to_string(e):
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_NEG)
    if isinstance(e, Add):
        return _wrap(e.left, _PREC_ADD) + " + " + _wrap(e.right, _PREC_ADD, True)
    if isinstance(e, Sub):
        return _wrap(e.left, _PREC_ADD) + " - " + _wrap(e.right, _PREC_ADD, True)
    if isinstance(e, Mul):
        return _wrap(e.left, _PREC_MUL) + "*" + _wrap(e.right, _PREC_MUL, True)
    if isinstance(e, Div):
        return _wrap(e.left, _PREC_MUL) + "/" + _wrap(e.right, _PREC_MUL, True)
    if isinstance(e, Pow):
        base = to_string(e.base)
        if _prec(e.base) < _PREC_ATOM:
            base = "(" + base + ")"
        return base + "^" + str(e.exponent)
    raise TypeError("not an expression node: %r" % (e,))


# ---------------------------------------------------------------------------
# evaluation, differentiation, substitution


def eval_jet(e, env):
    """Evaluate into the jet ring.  env maps variable names to JetScalars."""
    if isinstance(e, Lit):
        probe = next(iter(env.values()))
        return JetScalar.constant(probe.nvars, probe.order, e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return -eval_jet(e.arg, env)
    if isinstance(e, Add):
        return eval_jet(e.left, env) + eval_jet(e.right, env)
    if isinstance(e, Sub):
        return eval_jet(e.left, env) - eval_jet(e.right, env)
    if isinstance(e, Mul):
        return eval_jet(e.left, env) * eval_jet(e.right, env)
    if isinstance(e, Div):
        num = eval_jet(e.left, env)
        den = eval_jet(e.right, env)
        if den.value() == 0:
            raise ZeroDivisionError(
                "division by an expression vanishing at the base point: %s"
                % to_string(e.right)
            )
        return num / den
    if isinstance(e, Pow):
        base = eval_jet(e.base, env)
        if e.exponent < 0 and base.value() == 0:
            raise ZeroDivisionError(
                "negative power of an expression vanishing at the base point"
            )
        return base**e.exponent
    raise TypeError("not an expression node: %r" % (e,))


_ZERO_LIT = Lit(Q(0))
_ONE_LIT = Lit(Q(1))


def _add(a, b):
    if a == _ZERO_LIT:
        return b
    if b == _ZERO_LIT:
        return a
    return Add(a, b)


def _mul(a, b):
    if a == _ZERO_LIT or b == _ZERO_LIT:
        return _ZERO_LIT
    if a == _ONE_LIT:
        return b
    if b == _ONE_LIT:
        return a
    return Mul(a, b)


def derivative(e, name):
    """Symbolic d/d(name).  Used where an exact derivative of an input
    expression is needed at full jet order (log-derivatives of scale factors)
    and as the reference in parser/evaluator consistency tests."""
    if isinstance(e, Lit):
        return _ZERO_LIT
    if isinstance(e, Var):
        return _ONE_LIT if e.name == name else _ZERO_LIT
    if isinstance(e, Neg):
        d = derivative(e.arg, name)
        return _ZERO_LIT if d == _ZERO_LIT else Neg(d)
    if isinstance(e, Add):
        return _add(derivative(e.left, name), derivative(e.right, name))
    if isinstance(e, Sub):
        dl = derivative(e.left, name)
        dr = derivative(e.right, name)
        if dr == _ZERO_LIT:
            return dl
        return Sub(dl, dr)
    if isinstance(e, Mul):
        return _add(
            _mul(derivative(e.left, name), e.right),
            _mul(e.left, derivative(e.right, name)),
        )
    if isinstance(e, Div):
        num = Sub(
            _mul(derivative(e.left, name), e.right),
            _mul(e.left, derivative(e.right, name)),
        )
        return Div(num, Pow(e.right, 2))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return _ZERO_LIT
        db = derivative(e.base, name)
        inner = _mul(Lit(Q(e.exponent)), db)
        if e.exponent == 1:
            return inner
        return _mul(inner, Pow(e.base, e.exponent - 1))
    raise TypeError("not an expression node: %r" % (e,))


def substitute(e, mapping):
    if isinstance(e, Lit):
        return e
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, mapping))
    if isinstance(e, (Add, Sub, Mul, Div)):
        cls = type(e)
        return cls(substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, mapping), e.exponent)
    raise TypeError("not an expression node: %r" % (e,))


# ---------------------------------------------------------------------------
# scene files


@dataclass(frozen=True)
class SceneSpec:
    name: str
    dimension: int
    signature: tuple  # (negative directions, positive directions)
    coordinates: tuple
    metric: object  # dict {(i, j): Expr} for 1 <= i <= j <= n, missing = 0
    einstein_scales: tuple
    sample_points: tuple
    seed: object = None
    count: object = None
    notes: str = ""

    def metric_entry(self, i, j):
        if i > j:
            i, j = j, i
        return self.metric.get((i, j), _ZERO_LIT)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _unquote(s):
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1]
    return s


def r2_expansion(coordinates):
    acc = None
    for c in coordinates:
        sq = Pow(Var(c), 2)
        acc = sq if acc is None else Add(acc, sq)
    return acc


def parse_scene(text, name_hint=None):
    cp = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), strict=True, interpolation=None
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SceneError("malformed scene file: %s" % exc) from exc

    if "scene" not in cp:
        raise SceneError("missing [scene] section")
    sc = cp["scene"]
    name = sc.get("name", name_hint or "unnamed").strip()
    try:
        n = int(sc["dimension"])
    except (KeyError, ValueError):
        raise SceneError("scene %r: missing or non-integer dimension" % name)
    if n < 3:
        raise SceneError(
            "scene %r: dimension %d rejected, the machinery needs n >= 3" % (name, n)
        )

    coords = tuple(c.strip() for c in sc.get("coordinates", "").split(",") if c.strip())
    if len(coords) != n:
        raise SceneError(
            "scene %r: %d coordinates for dimension %d" % (name, len(coords), n)
        )
    for c in coords:
        if not _IDENT.match(c) or c == "r2":
            raise SceneError("scene %r: bad coordinate name %r" % (name, c))
    if len(set(coords)) != n:
        raise SceneError("scene %r: duplicate coordinate names" % name)

    sig_text = sc.get("signature", "riemannian").strip().lower()
    if sig_text == "riemannian":
        signature = (0, n)
    else:
        try:
            p, q = (int(x) for x in sig_text.split(","))
        except ValueError:
            raise SceneError("scene %r: bad signature %r" % (name, sig_text))
        if p < 0 or q < 0 or p + q != n:
            raise SceneError("scene %r: signature %r does not sum to n" % (name, sig_text))
        signature = (p, q)

    symbols = set(coords) | {"r2"}
    r2 = {"r2": r2_expansion(coords)}

    def read_expr(raw, where):
        try:
            e = parse_expr(_unquote(raw), symbols)
        except ExprError as exc:
            raise SceneError("scene %r, %s: %s" % (name, where, exc)) from exc
        return substitute(e, r2)

    metric = {}
    if "metric" not in cp:
        raise SceneError("scene %r: missing [metric] section" % name)
    for key, raw in cp["metric"].items():
        m = re.match(r"g_(\d)(\d)$", key)
        if not m:
            raise SceneError("scene %r: bad metric key %r (want g_ij)" % (name, key))
        i, j = int(m.group(1)), int(m.group(2))
        if not (1 <= i <= j <= n):
            raise SceneError(
                "scene %r: metric key %r out of range or not upper-triangular" % (name, key)
            )
        metric[(i, j)] = read_expr(raw, key)

    scales = []
    if "einstein_scales" in cp:
        items = sorted(cp["einstein_scales"].items())
        for key, raw in items:
            scales.append(read_expr(raw, key))

    points = []
    seed = count = None
    if "samples" in cp:
        for key, raw in sorted(cp["samples"].items()):
            if key == "seed":
                seed = int(raw)
            elif key == "count":
                count = int(raw)
            elif key.startswith("point_"):
                vals = tuple(parse_rational(v) for v in raw.split(","))
                if len(vals) != n:
                    raise SceneError(
                        "scene %r: sample %r has %d coordinates, want %d"
                        % (name, key, len(vals), n)
                    )
                points.append(vals)
            else:
                raise SceneError("scene %r: unknown samples key %r" % (name, key))

    notes = ""
    if "notes" in cp:
        notes = "\n".join(v for _, v in cp["notes"].items())

    spec = SceneSpec(
        name=name,
        dimension=n,
        signature=signature,
        coordinates=coords,
        metric=metric,
        einstein_scales=tuple(scales),
        sample_points=tuple(points),
        seed=seed,
        count=count,
        notes=notes,
    )
    for idx, pt in enumerate(spec.sample_points):
        _validate_point(spec, pt, "point_%d" % (idx + 1))
    return spec


def _order0_env(spec, point):
    return {
        c: JetScalar.constant(spec.dimension, 0, v)
        for c, v in zip(spec.coordinates, point)
    }


def _validate_point(spec, point, label):
    env = _order0_env(spec, point)
    n = spec.dimension
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            try:
                row.append(eval_jet(spec.metric_entry(i, j), env).value())
            except ZeroDivisionError as exc:
                raise SceneError(
                    "scene %r: metric entry g_%d%d not evaluable at %s: %s"
                    % (spec.name, i, j, label, exc)
                ) from exc
        rows.append(row)
    if _rational_det(rows) == 0:
        raise SceneError(
            "scene %r: metric degenerate (det = 0) at %s = %s"
            % (spec.name, label, tuple(str(v) for v in point))
        )
    for k, s in enumerate(spec.einstein_scales):
        try:
            val = eval_jet(s, env).value()
        except ZeroDivisionError as exc:
            raise SceneError(
                "scene %r: scale %d not evaluable at %s" % (spec.name, k + 1, label)
            ) from exc
        if val <= 0:
            raise SceneError(
                "scene %r: scale %d not positive at %s" % (spec.name, k + 1, label)
            )


def point_is_valid(spec, point):
    try:
        _validate_point(spec, point, "candidate")
    except SceneError:
        return False
    return True


def _rational_det(rows):
    n = len(rows)
    m = [list(r) for r in rows]
    det = Q(1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return Q(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = det * m[col][col]
        inv = Q(1) / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return det


def serialize_scene(spec):
    out = io.StringIO()
    w = out.write
    w("[scene]\n")
    w("name = %s\n" % spec.name)
    w("dimension = %d\n" % spec.dimension)
    if spec.signature == (0, spec.dimension):
        w("signature = riemannian\n")
    else:
        w("signature = %d,%d\n" % spec.signature)
    w("coordinates = %s\n" % ", ".join(spec.coordinates))
    w("\n[metric]\n")
    for (i, j), e in sorted(spec.metric.items()):
        w('g_%d%d = "%s"\n' % (i, j, to_string(e)))
    if spec.einstein_scales:
        w("\n[einstein_scales]\n")
        for k, e in enumerate(spec.einstein_scales, 1):
            w('scale_%d = "%s"\n' % (k, to_string(e)))
    w("\n[samples]\n")
    for k, pt in enumerate(spec.sample_points, 1):
        w("point_%d = %s\n" % (k, ", ".join(str(v) for v in pt)))
    if spec.seed is not None:
        w("seed = %d\n" % spec.seed)
    if spec.count is not None:
        w("count = %d\n" % spec.count)
    if spec.notes:
        w("\n[notes]\n")
        for k, line in enumerate(spec.notes.splitlines(), 1):
            w("line_%d = %s\n" % (k, line))
    return out.getvalue()
