"""Truncated and soft packing densities for centrally symmetric convex
bodies in normed planes, congruent disks in constant-curvature planes, and
unit balls in 3-space."""

__version__ = "0.1.0"

from .bodies import ConvexBody
from .regions import ArcChainRegion, ConvexClipper, clip_region, monte_carlo_area, signed_area
from .bisectors import (BisectorCurve, BNGon, build_bngon, trace_bisector,
                        tripoint, truncated_area)
from .dowker import (Arc, DowkerEngine, DowkerTable, arc_functional,
                     check_quadrangle, dowker_table, minimize_truncated_area)
from .lattice import (DensityReport, LatticePacking, OptimizeResult,
                      disk_closed_form, optimize_lattice,
                      truncated_lattice_density, voronoi_cell)
from .curved import (CurvedPoint, CurvedTriangle, SoftDiskConfig,
                     circumradius_regular_triangle, regular_triangle_bounds,
                     region_area_curved, rho_functionals, theorem_bound_check)
from .ball3d import (DodecConstants, Polytope3Cell, ball_density_bound,
                     ball_density_bound_coarse, cap_volume, cap_sum_bound,
                     indirect_estimate_check, truncated_cell_density,
                     weighted_neighbor_count)

__all__ = [
    "ConvexBody", "ArcChainRegion", "ConvexClipper", "clip_region",
    "monte_carlo_area", "signed_area", "BisectorCurve", "BNGon", "build_bngon",
    "trace_bisector", "tripoint", "truncated_area", "Arc", "DowkerEngine",
    "DowkerTable", "arc_functional", "check_quadrangle", "dowker_table",
    "minimize_truncated_area", "DensityReport", "LatticePacking",
    "OptimizeResult", "disk_closed_form", "optimize_lattice",
    "truncated_lattice_density", "voronoi_cell", "CurvedPoint",
    "CurvedTriangle", "SoftDiskConfig", "circumradius_regular_triangle",
    "regular_triangle_bounds", "region_area_curved", "rho_functionals",
    "theorem_bound_check", "DodecConstants", "Polytope3Cell",
    "ball_density_bound", "ball_density_bound_coarse", "cap_volume",
    "cap_sum_bound", "indirect_estimate_check", "truncated_cell_density",
    "weighted_neighbor_count",
]
