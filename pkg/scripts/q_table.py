#!/usr/bin/env python3
"""Tabulate Q-curvature across the Einstein scenes of the catalog.

For each even-dimensional Einstein scene: the closed-form constant, the
product-route value computed from jets, and whether the full jet is
exactly that constant.  Odd-dimensional Einstein scenes get the
noncritical Q_k values for k = 1, 2 instead.

    python3 scripts/q_table.py [--order N]
"""

import argparse
import sys

from tractorcheck import operators as op
from tractorcheck.rationals import qstr
from tractorcheck.scenes import (catalog_names, load_scene,
                                 release_geometries, sample_points,
                                 scene_geometry)


def einstein_scenes():
    for name in catalog_names():
        spec = load_scene(name)
        if spec.einstein_scales:
            yield spec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=None,
                    help="jet order override (default: the dimension)")
    args = ap.parse_args()

    bad = 0
    for spec in einstein_scenes():
        n = spec.dimension
        pt = sample_points(spec, 1, 1)[0]
        if n % 2 == 0:
            g = scene_geometry(spec, pt, args.order or n)
            qf = op.q_product_route(g)
            want = op.q_einstein_value(g)
            exact = (qf - g.density(want, qf.weight, order=qf.order)).is_zero()
            bad += not exact
            print("%-16s n=%d  Q = %-8s product route %s" %
                  (spec.name, n, qstr(want),
                   "matches exactly" if exact else "DISAGREES"))
        else:
            g = scene_geometry(spec, pt, args.order or 4)
            vals = []
            for k in (1, 2):
                qk = op.noncritical_q(g, k)
                flat = qk.component().coeffs
                const = all(not c for c in flat[1:])
                bad += not const
                vals.append("Q_%d = %s%s" % (k, qstr(flat[0]),
                                             "" if const else " (nonconstant!)"))
            print("%-16s n=%d  %s" % (spec.name, n, "  ".join(vals)))
        release_geometries()
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
