"""Built-in scene catalog and deterministic sample points.

A scene is a chart with exact rational metric entries, optional Einstein
scales, and a sampling rule.  The catalog entries below are stored as
scene-file text in the same format the --scene flag loads from disk, and
nothing in them is trusted: at first load every expected fact (Einstein
or not, the scalar curvature value, conformal flatness, parallelism of
each declared scale) is recomputed from the metric, and a mismatch is a
hard failure.

Sample points are drawn deterministically from sha256 of
"seed:scene:index:coordinate", as small rational offsets of the embedded
base point, and every candidate must pass the scene's region predicate
(inside the hyperbolic ball, outside the Schwarzschild horizon) plus
nondegeneracy and scale-positivity checks before it counts.
"""

import hashlib

from .einstein import EinsteinScale
from .exprdsl import SceneError, parse_scene, point_is_valid
from .jets import JetScalar
from .rationals import Q
from .riemann import Geometry

DEFAULT_SEED = 1
DEFAULT_COUNT = 3


def _scene_text(name, n, coords, entries, point, scales=(), signature=None,
                notes=()):
    lines = ["[scene]", "name = %s" % name, "dimension = %d" % n]
    if signature:
        lines.append("signature = %s" % signature)
    lines.append("coordinates = %s" % ", ".join(coords))
    lines.append("")
    lines.append("[metric]")
    for key in sorted(entries):
        lines.append('g_%s = "%s"' % (key, entries[key]))
    if scales:
        lines.append("")
        lines.append("[einstein_scales]")
        for i, s in enumerate(scales, 1):
            lines.append('scale_%d = "%s"' % (i, s))
    lines.append("")
    lines.append("[samples]")
    lines.append("point_1 = %s" % ", ".join(str(v) for v in point))
    lines.append("seed = %d" % DEFAULT_SEED)
    lines.append("count = %d" % DEFAULT_COUNT)
    if notes:
        lines.append("")
        lines.append("[notes]")
        for i, line in enumerate(notes, 1):
            lines.append("line_%d = %s" % (i, line))
    return "\n".join(lines) + "\n"


def _coords(n):
    return tuple("x%d" % i for i in range(1, n + 1))


def _diag(n, text):
    return {"%d%d" % (i, i): text for i in range(1, n + 1)}


_PT = {
    4: (Q(1, 2), Q(1, 3), Q(1, 5), Q(1, 7)),
    5: (Q(1, 2), Q(1, 3), Q(1, 5), Q(1, 7), Q(1, 11)),
    6: (Q(1, 2), Q(1, 3), Q(1, 5), Q(1, 7), Q(1, 11), Q(1, 13)),
}

_CLASS_SCALES = ("1", "(1+r2)/2", "(1-r2)/2")

_PERT5 = {
    "11": "1 + 1/10*x2^2", "12": "1/10*x1*x3", "22": "1 + 1/10*x5^2",
    "23": "1/10*x2*x4", "33": "1 + 1/10*x4^2", "44": "1 + 1/10*x3^2",
    "45": "1/10*x5*x1", "55": "1 + 1/10*x1^2",
}

_PERT6 = {
    "11": "1 + 1/10*x2^2", "12": "1/10*x1*x3", "22": "1 + 1/10*x5^2",
    "23": "1/10*x2*x4", "33": "1 + 1/10*x4^2", "44": "1 + 1/10*x3^2",
    "45": "1/10*x5*x1", "55": "1 + 1/10*x1^2", "56": "1/10*x6*x2",
    "66": "1 + 1/10*x6^2",
}

_FS = {
    "11": "(1 + r2 - x1^2 - x2^2)/(1+r2)^2",
    "13": "(0 - x1*x3 - x2*x4)/(1+r2)^2",
    "14": "(x2*x3 - x1*x4)/(1+r2)^2",
    "22": "(1 + r2 - x1^2 - x2^2)/(1+r2)^2",
    "23": "(x1*x4 - x2*x3)/(1+r2)^2",
    "24": "(0 - x1*x3 - x2*x4)/(1+r2)^2",
    "33": "(1 + r2 - x3^2 - x4^2)/(1+r2)^2",
    "44": "(1 + r2 - x3^2 - x4^2)/(1+r2)^2",
}

_S2S2 = {
    "11": "4/(1+x1^2+x2^2)^2", "22": "4/(1+x1^2+x2^2)^2",
    "33": "4/(1+x3^2+x4^2)^2", "44": "4/(1+x3^2+x4^2)^2",
}

_S2S3 = {
    "11": "2/(1+x1^2+x2^2)^2", "22": "2/(1+x1^2+x2^2)^2",
    "33": "4/(1+x3^2+x4^2+x5^2)^2", "44": "4/(1+x3^2+x4^2+x5^2)^2",
    "55": "4/(1+x3^2+x4^2+x5^2)^2",
}

_SCHW = {
    "11": "0 - (r-2)/r",
    "22": "r/(r-2)",
    "33": "4*r^2/(1+u^2+v^2)^2",
    "44": "4*r^2/(1+u^2+v^2)^2",
}


def _build_catalog():
    cat = {}
    for n in (4, 5, 6):
        cat["flat_%d" % n] = _scene_text(
            "flat_%d" % n, n, _coords(n), _diag(n, "1"), _PT[n],
            scales=("1",))
        cat["sphere_%d" % n] = _scene_text(
            "sphere_%d" % n, n, _coords(n), _diag(n, "4/(1+r2)^2"), _PT[n],
            scales=("1",),
            notes=("round unit sphere, stereographic chart",))
    for n in (4, 6):
        cat["flatclass_%d" % n] = _scene_text(
            "flatclass_%d" % n, n, _coords(n), _diag(n, "1"), _PT[n],
            scales=_CLASS_SCALES,
            notes=("flat chart carrying the flat, round, and hyperbolic "
                   "scales of its conformal class",))
    cat["hyperbolic_4"] = _scene_text(
        "hyperbolic_4", 4, _coords(4), _diag(4, "4/(1-r2)^2"), _PT[4],
        scales=("1",),
        notes=("Poincare ball; sample points stay inside r2 < 3/4",))
    cat["perturbed_flat_5"] = _scene_text(
        "perturbed_flat_5", 5, _coords(5), _PERT5, _PT[5],
        notes=("generic polynomial bump, nothing special true here",))
    cat["perturbed_flat_6"] = _scene_text(
        "perturbed_flat_6", 6, _coords(6), _PERT6, _PT[6],
        notes=("generic polynomial bump, nothing special true here",))
    cat["schwarzschild"] = _scene_text(
        "schwarzschild", 4, ("t", "r", "u", "v"), _SCHW,
        (Q(1, 2), Q(3), Q(1, 5), Q(1, 7)),
        scales=("1",), signature="1,3",
        notes=("exterior chart, mass 1, angular part in stereographic "
               "coordinates; samples keep r > 9/4",))
    cat["fubini_study"] = _scene_text(
        "fubini_study", 4, _coords(4), _FS, _PT[4],
        scales=("1",),
        notes=("complex projective plane in an affine chart",))
    cat["s2xs2"] = _scene_text(
        "s2xs2", 4, _coords(4), _S2S2, _PT[4],
        scales=("1",),
        notes=("product of two round 2-spheres of equal Einstein constant",))
    cat["s2xs3"] = _scene_text(
        "s2xs3", 5, _coords(5), _S2S3, _PT[5],
        scales=("1",),
        notes=("S2(1/sqrt2) x S3(1), Einstein and not conformally flat",))
    return cat


CATALOG = _build_catalog()

# facts re-derived at load time; a catalog edit that breaks one is caught
# before any suite runs
EXPECTED = {
    "flat_4": {"einstein": True, "sc": Q(0), "conformally_flat": True},
    "flat_5": {"einstein": True, "sc": Q(0), "conformally_flat": True},
    "flat_6": {"einstein": True, "sc": Q(0), "conformally_flat": True},
    "flatclass_4": {"einstein": True, "sc": Q(0), "conformally_flat": True},
    "flatclass_6": {"einstein": True, "sc": Q(0), "conformally_flat": True},
    "sphere_4": {"einstein": True, "sc": Q(12), "conformally_flat": True},
    "sphere_5": {"einstein": True, "sc": Q(20), "conformally_flat": True},
    "sphere_6": {"einstein": True, "sc": Q(30), "conformally_flat": True},
    "hyperbolic_4": {"einstein": True, "sc": Q(-12), "conformally_flat": True},
    "perturbed_flat_5": {"einstein": False, "conformally_flat": False},
    "perturbed_flat_6": {"einstein": False, "conformally_flat": False},
    "schwarzschild": {"einstein": True, "sc": Q(0), "conformally_flat": False},
    "fubini_study": {"einstein": True, "sc": Q(24), "conformally_flat": False},
    "s2xs2": {"einstein": True, "sc": Q(4), "conformally_flat": False},
    "s2xs3": {"einstein": True, "sc": Q(10), "conformally_flat": False},
}

_REGION = {
    "hyperbolic_4": lambda pt: sum(v * v for v in pt) < Q(3, 4),
    "schwarzschild": lambda pt: pt[1] > Q(9, 4),
}

_SPECS = {}
_GEOMETRIES = {}


def catalog_names():
    return sorted(CATALOG)


def region_ok(name, point):
    pred = _REGION.get(name)
    return pred(point) if pred else True


def load_scene(name):
    """Catalog scene by name, facts verified on first use."""
    if name not in _SPECS:
        if name not in CATALOG:
            raise SceneError("unknown scene %r; catalog: %s"
                             % (name, ", ".join(catalog_names())))
        spec = parse_scene(CATALOG[name], name)
        verify_facts(spec, EXPECTED[name])
        _SPECS[name] = spec
    return _SPECS[name]


def load_scene_file(path):
    """Scene from a user file.  Structural validation only; user scenes
    make no catalog claims to verify."""
    with open(path) as fh:
        text = fh.read()
    return parse_scene(text, name_hint=path)


def scene_geometry(spec, point, order):
    """Geometry for one (scene, point, order), memoized; the curvature
    chain caches inside the Geometry, so sharing these is what keeps
    repeated suite checks affordable."""
    key = (spec.name, tuple(point), order)
    if key not in _GEOMETRIES:
        if not region_ok(spec.name, point):
            raise SceneError("scene %r: point outside the valid region"
                             % spec.name)
        _GEOMETRIES[key] = Geometry(spec.name, spec.coordinates,
                                    dict(spec.metric), tuple(point), order)
    return _GEOMETRIES[key]


def release_geometries():
    """Drop memoized geometries (and their curvature caches).  Long runs
    over many scenes call this between phases to cap memory."""
    _GEOMETRIES.clear()


def verify_facts(spec, facts, order=4):
    """Recompute what the catalog claims: trace-free Ricci (Einstein or
    not), the constant scalar curvature value, Weyl flatness, and the
    parallelism of every declared scale."""
    g = scene_geometry(spec, spec.sample_points[0], order)
    n = g.n
    k = order - 2
    tf = g.ricci_field(k) - g.metric_field(k).jet_scaled(
        g.sc(k), -2).scaled(Q(1, n))
    if facts.get("einstein") and not tf.is_zero():
        raise SceneError("scene %r claims Einstein, trace-free Ricci is not "
                         "zero" % spec.name)
    if not facts.get("einstein") and tf.is_zero():
        raise SceneError("scene %r claims non-Einstein, but trace-free Ricci "
                         "vanishes" % spec.name)
    if "sc" in facts:
        sc = g.sc(k)
        want = JetScalar.constant(n, k, facts["sc"])
        if not (sc - want).is_zero():
            raise SceneError(
                "scene %r: scalar curvature is %s at the base point, catalog "
                "says %s" % (spec.name, sc.value(), facts["sc"]))
    wz = g.weyl_field(k).is_zero()
    if facts.get("conformally_flat") != wz:
        raise SceneError("scene %r: Weyl %s zero, catalog says %s"
                         % (spec.name, "is" if wz else "is not",
                            facts.get("conformally_flat")))
    for expr in spec.einstein_scales:
        es = EinsteinScale(g, expr)
        if not es.parallel:
            raise SceneError("scene %r: declared scale %r is not Einstein"
                             % (spec.name, expr))


_DENS = (4, 5, 6, 7, 8, 9, 11, 13)


def _draw(spec, base, seed, idx):
    vals = []
    for c, b in zip(spec.coordinates, base):
        h = hashlib.sha256(
            ("%s:%s:%d:%s" % (seed, spec.name, idx, c)).encode()).digest()
        den = _DENS[h[0] % len(_DENS)]
        num = h[1] % (2 * den + 1) - den
        vals.append(b + Q(num, 4 * den))
    return tuple(vals)


def sample_points(spec, seed=None, count=None):
    """Embedded points first, then deterministic draws near the base
    point.  Candidates outside the region, on a degenerate locus, or on a
    zero of a declared scale are skipped, never repaired."""
    seed = (spec.seed if spec.seed is not None else DEFAULT_SEED) \
        if seed is None else seed
    count = (spec.count if spec.count is not None else DEFAULT_COUNT) \
        if count is None else count
    pts = list(spec.sample_points[:count])
    if not pts:
        raise SceneError("scene %r embeds no sample points" % spec.name)
    base = pts[0]
    idx = 0
    while len(pts) < count:
        cand = _draw(spec, base, seed, idx)
        idx += 1
        if idx > 200 + 20 * count:
            raise SceneError("scene %r: sampling failed to find %d valid "
                             "points" % (spec.name, count))
        if cand in pts or not region_ok(spec.name, cand):
            continue
        if not point_is_valid(spec, cand):
            continue
        pts.append(cand)
    return pts
