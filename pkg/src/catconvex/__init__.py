"""Desk-scale convexity certification in constant-curvature model spaces."""

from .errors import (
    DisconnectedSceneError,
    GeometryError,
    HypothesisError,
    InvalidPointError,
    NumericalDomainError,
    SceneError,
    SceneFormatError,
    TriangleError,
    UniquenessRegimeError,
)
from .model_spaces import GeodesicSegment, ModelSpace, diameter_bound
from .spherical_trig import (
    SphericalTriangleData,
    contraction_constant,
    equal_sides_half_midpoint,
    half_midpoint_distance,
    max_midpoint_ratio,
)
from .convex_scenes import (
    ConvexCell,
    HalfSpace,
    LengthPath,
    Scene,
    SceneGraph,
    contains,
    intrinsic_diameter,
    length_metric,
    local_convexity_check,
    scene_from_dict,
    scene_to_dict,
    select_eps,
    validate_scene,
)
from .local_global import (
    ConnectCertificate,
    EpsilonSchedule,
    IterationTrace,
    ScheduleLevel,
    build_schedule,
    cat_check_intrinsic,
    connect,
    contraction_for,
    convexity_verdict,
    curve_shortening,
    midpoint_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "ModelSpace",
    "GeodesicSegment",
    "diameter_bound",
    "SphericalTriangleData",
    "half_midpoint_distance",
    "equal_sides_half_midpoint",
    "contraction_constant",
    "max_midpoint_ratio",
    "HalfSpace",
    "ConvexCell",
    "Scene",
    "SceneGraph",
    "LengthPath",
    "contains",
    "validate_scene",
    "local_convexity_check",
    "select_eps",
    "length_metric",
    "intrinsic_diameter",
    "scene_from_dict",
    "scene_to_dict",
    "ScheduleLevel",
    "EpsilonSchedule",
    "IterationTrace",
    "ConnectCertificate",
    "build_schedule",
    "contraction_for",
    "midpoint_iteration",
    "connect",
    "convexity_verdict",
    "cat_check_intrinsic",
    "curve_shortening",
    "GeometryError",
    "InvalidPointError",
    "UniquenessRegimeError",
    "TriangleError",
    "NumericalDomainError",
    "HypothesisError",
    "SceneError",
    "SceneFormatError",
    "DisconnectedSceneError",
]
