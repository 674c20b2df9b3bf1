"""Numerical laboratory for the planar affine normal flow on support functions."""

from .body import (ConvexBody, LinearMap, NonConvexError, OriginNotInteriorError, SupportFunction, affine_iso_ratio,
                   affine_support, apply_linear_map, area, make_disk, make_ellipse, make_random_body,
                   p_affine_perimeter, polar_area, polygon_oracle, radius_of_curvature)
from .flow import FlowState, FunctionalRecord, StepController, flow_rhs, normalized_view, run, step

__all__ = [
    "ConvexBody", "LinearMap", "NonConvexError", "OriginNotInteriorError", "SupportFunction", "affine_iso_ratio",
    "affine_support", "apply_linear_map", "area", "make_disk", "make_ellipse", "make_random_body",
    "p_affine_perimeter", "polar_area", "polygon_oracle", "radius_of_curvature",
    "FlowState", "FunctionalRecord", "StepController", "flow_rhs", "normalized_view", "run", "step",
]
