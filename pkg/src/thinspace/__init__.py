"""Thin metric spaces: certification, skeletons, Urysohn maps and curvature probes."""

from .errors import ThinspaceError
from .metric import FiniteGeodesicSpace, build_space, shortest_segment
from .skeleton import Skeleton, extract_skeleton
from .thinness import ThinnessReport, thin_check, thinness_profile
from .urysohn import UrysohnMap, build_urysohn_map, fiber_diameters

__version__ = "0.1.0"

__all__ = [
    "FiniteGeodesicSpace",
    "Skeleton",
    "ThinnessReport",
    "ThinspaceError",
    "UrysohnMap",
    "build_space",
    "build_urysohn_map",
    "extract_skeleton",
    "fiber_diameters",
    "shortest_segment",
    "thin_check",
    "thinness_profile",
]
