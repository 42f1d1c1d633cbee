"""Numerical laboratory for doubly warped spheres with Ric >= n - 1.

Builds the round sphere and a family of metrics whose circle factor
collapses, then computes their curvature, Laplace spectrum, volumes,
geodesic distances and the eigenfunction map into the round sphere.
"""

from .curvature import check_lower_bound, ricci_frame, ricci_min
from .geometry import (
    DistanceCosineTest,
    ReducedPoint,
    diameter_radius,
    distance,
    gh_distortion,
    half_sphere_distance,
    sample_space,
)
from .spectrum import (
    RadialMode,
    bochner_defect,
    merged_spectrum,
    mode_multiplicity,
    radial_problem,
    rayleigh_quotient,
    solve_radial,
)
from .sphere_map import build_phi, degree_estimate, h_deviation, lipschitz_floor_check, map_distortion
from .warped import (
    WarpedSphereMetric,
    make_pinch_family,
    make_round_sphere,
    pinch_constants,
    validate_closure,
    volume,
)

__version__ = "0.1.0"

__all__ = [
    "DistanceCosineTest",
    "RadialMode",
    "ReducedPoint",
    "WarpedSphereMetric",
    "bochner_defect",
    "build_phi",
    "check_lower_bound",
    "degree_estimate",
    "diameter_radius",
    "distance",
    "gh_distortion",
    "h_deviation",
    "half_sphere_distance",
    "lipschitz_floor_check",
    "make_pinch_family",
    "make_round_sphere",
    "map_distortion",
    "merged_spectrum",
    "mode_multiplicity",
    "pinch_constants",
    "radial_problem",
    "rayleigh_quotient",
    "ricci_frame",
    "ricci_min",
    "sample_space",
    "solve_radial",
    "validate_closure",
    "volume",
]
