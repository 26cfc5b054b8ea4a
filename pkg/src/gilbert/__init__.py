"""Planar Gilbert (crack) tessellations: exact simulation, certified
whole-plane branch-length functionals, and Monte Carlo limit-law checks.
"""

from .engine import (BranchSegment, CollisionEvent, MarkedConfig,
                     Tessellation, branch_history, branch_length, build,
                     partial_tessellation)
from .functionals import (EmpiricalMeasure, IntegralResult, Phi,
                          TestFunction, TEST_FUNCTIONS, default_padding,
                          empirical_measure, integrate,
                          measure_from_tessellation, phi_eval, phi_eval_many,
                          test_function, unit_square_integral)
from .geom import (Ball, DegenerateConfiguration, EPS_GEOM, MarkedPoint, Ray,
                   Rect, Window, mark_to_direction, ray_intersection)
from .oracle import build_fixedpoint, build_timestep
from .pointproc import ProcessParams, add_point, sample_annulus, sample_poisson
from .render import render_svg, svg_document
from .reports import export_report, read_csv, read_json, write_csv, write_json
from .stabilize import (PairStabilizationResult, StabTailResult,
                        StabilizationResult, TripleStabilizationResult,
                        certify_point, stab_tail, whole_plane_xi,
                        whole_plane_xi_pair, whole_plane_xi_triple)
from .stats import (CltReport, EstimatorReport, ExperimentRow, ScalingReport,
                    ScalingRow, clt_experiment, estimate_E, estimate_V,
                    estimate_c0, estimate_cxy, ks_statistic, lln_experiment,
                    scaling_check, var_experiment)

__version__ = "0.1.0"

__all__ = [
    "Ball", "BranchSegment", "CltReport", "CollisionEvent",
    "DegenerateConfiguration", "EPS_GEOM", "EmpiricalMeasure",
    "EstimatorReport", "ExperimentRow", "IntegralResult", "MarkedConfig",
    "MarkedPoint", "PairStabilizationResult", "Phi", "ProcessParams", "Ray",
    "Rect", "ScalingReport", "ScalingRow", "StabTailResult",
    "StabilizationResult", "Tessellation", "TestFunction", "TEST_FUNCTIONS",
    "TripleStabilizationResult", "Window", "add_point", "branch_history",
    "branch_length", "build", "build_fixedpoint", "build_timestep",
    "certify_point", "clt_experiment", "default_padding", "empirical_measure",
    "estimate_E", "export_report", "estimate_V", "estimate_c0", "estimate_cxy", "integrate",
    "ks_statistic", "lln_experiment", "mark_to_direction",
    "measure_from_tessellation", "partial_tessellation", "phi_eval",
    "phi_eval_many", "ray_intersection", "render_svg", "sample_annulus",
    "sample_poisson", "scaling_check", "stab_tail", "svg_document",
    "test_function", "unit_square_integral", "var_experiment",
    "whole_plane_xi", "whole_plane_xi_pair", "whole_plane_xi_triple",
]
