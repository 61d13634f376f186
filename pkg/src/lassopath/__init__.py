"""Exact Lasso regularization paths, worst-case instances, and smoothed-complexity diagnostics."""

from .bounds import (BoundReport, estimate_gamma_s, instance_bound_report, theorem1_bound,
                     theorem2_bound)
from .homotopy import (KktReport, PathSegment, RegularizationPath, eval_path, kkt_check, lambda_max,
                       path_slopes, solve_path)
from .instances import SmoothingSpec, VarianceMode, gen_adversarial, gen_gaussian, normalize, smooth
from .oracle import enumerate_sign_patterns, grid_solve
from .precision import (ActiveSetFactor, Precision, extremal_singular_values, least_squares_residual,
                        solve_spd)
from .problem import ProblemInstance

__version__ = "0.1.0"
