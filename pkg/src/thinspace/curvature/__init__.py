"""Curvature probes on closed-form manifold families."""

from .integrals import (
    HypothesisScan,
    IntegralEstimate,
    Integrand,
    ball_integral,
    tangent_hypothesis_scan,
)
from .manifolds import (
    AnalyticManifold,
    capped_cylinder,
    flat,
    paraboloid,
    product_sphere_flat,
    r_k,
    ricci_eigenvalues,
    sphere,
)

__all__ = [
    "AnalyticManifold",
    "HypothesisScan",
    "IntegralEstimate",
    "Integrand",
    "ball_integral",
    "capped_cylinder",
    "flat",
    "paraboloid",
    "product_sphere_flat",
    "r_k",
    "ricci_eigenvalues",
    "sphere",
    "tangent_hypothesis_scan",
]
