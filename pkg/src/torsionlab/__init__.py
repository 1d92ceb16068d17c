"""Numerical laboratory for p-torsional rigidity on convex planar domains."""

from .closed_form import (
    AnalyticShape,
    GammaBound,
    ball_normalized_rigidity,
    ball_torsion_integral,
    ball_torsion_value,
    corridor_endpoints,
    ellipse_rigidity_p2,
    family_gamma_bound,
    prefactor,
    unit_ball_volume,
)
from .errors import (
    ConvergenceError,
    InvalidDomainError,
    MeshResourceError,
    SamplingError,
    TorsionLabError,
)
from .geometry import (
    ConvexPolygon,
    ShapeSpec,
    average_distance,
    erode,
    make_ellipse_polygon,
    make_rectangle,
    make_regular_ngon,
    make_triangle,
    random_convex_polygon,
    scale,
    shape_from_json,
    translate,
)
from .ptorsion import (
    Mesh,
    RigidityEstimate,
    SolverOptions,
    TorsionSolution,
    prolong,
    refine,
    rigidity_with_refinement,
    solve_p_torsion,
    triangulate,
)
from .functionals import (
    ShapeReport,
    Verdict,
    build_shape_report,
    corridor_verdicts,
    lambda_p1,
    normalized_rigidity,
    q_functional,
    qbar_functional,
    saint_venant_gap,
)
from .cheeger import CheegerResult, cheeger_constant, p_to_one_trend

__version__ = "0.1.0"

__all__ = [
    "AnalyticShape",
    "CheegerResult",
    "ConvergenceError",
    "ConvexPolygon",
    "GammaBound",
    "InvalidDomainError",
    "Mesh",
    "MeshResourceError",
    "RigidityEstimate",
    "SamplingError",
    "ShapeReport",
    "ShapeSpec",
    "SolverOptions",
    "TorsionLabError",
    "TorsionSolution",
    "Verdict",
    "average_distance",
    "ball_normalized_rigidity",
    "ball_torsion_integral",
    "ball_torsion_value",
    "build_shape_report",
    "cheeger_constant",
    "corridor_endpoints",
    "corridor_verdicts",
    "ellipse_rigidity_p2",
    "erode",
    "family_gamma_bound",
    "lambda_p1",
    "make_ellipse_polygon",
    "make_rectangle",
    "make_regular_ngon",
    "make_triangle",
    "normalized_rigidity",
    "p_to_one_trend",
    "prefactor",
    "prolong",
    "q_functional",
    "qbar_functional",
    "random_convex_polygon",
    "refine",
    "rigidity_with_refinement",
    "saint_venant_gap",
    "scale",
    "shape_from_json",
    "solve_p_torsion",
    "translate",
    "triangulate",
    "unit_ball_volume",
]
