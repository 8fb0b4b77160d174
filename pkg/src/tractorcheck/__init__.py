"""Exact-arithmetic verification of conformal tractor calculus.

Everything reduces to truncated Taylor jets over the rationals at
explicitly chosen sample points, so every identity check in here is a
literal zero test: no floats, no tolerances, no symbolic simplifier to
trust.  The main entry points are the scene catalog (`load_scene`,
`scene_geometry`), the geometry layer (`Geometry`, `FieldJet`), Einstein
scales (`EinsteinScale`), and the operator family in
`tractorcheck.operators`.
"""

from .einstein import EinsteinScale
from .jets import JetScalar
from .riemann import FieldJet, Geometry, GeometryError, rescale_field
from .scenes import (catalog_names, load_scene, load_scene_file,
                     sample_points, scene_geometry)

__version__ = "0.1.0"

__all__ = [
    "EinsteinScale",
    "FieldJet",
    "Geometry",
    "GeometryError",
    "JetScalar",
    "catalog_names",
    "load_scene",
    "load_scene_file",
    "rescale_field",
    "sample_points",
    "scene_geometry",
    "__version__",
]
