"""Optimal smoothings of sublinear functions and convex cones.

Computes the functional core (center, height, width) of sublinear
functions, the conic core of convex cones, the six induced optimal
smoothings of each, numeric core estimation from sampled normal fans,
Hausdorff gap reports, smoothed composite minimization, and the
supporting verification suites behind the ``conesmooth`` CLI.
"""

from .sublinear_catalog import (
    RELU, EUCLIDEAN_NORM, ONE_NORM, WEIGHTED_INF_NORM, MAX, MAX_EIGEN,
    POLYTOPE, FAMILIES, SublinearFn, SupportSet, relu, euclidean_norm,
    one_norm, weighted_inf_norm, coordinate_max, max_eigen,
    polytope_support, from_descriptor, eval_sublinear, project_support,
    subgradient_at, jacobi_eigh, project_simplex, project_ball,
)
from .function_smoothing import (
    MIN_INNER, MAX_INNER, MIN_GENERAL, MAX_GENERAL, MIN_OUTER, MAX_OUTER,
    VARIANTS, FunctionalCore, SmoothingSpec, price, moreau_sublinear,
    moreau_of_price, compute_core, make_smoothing, eval_smoothing,
    grad_smoothing, scale_function, estimate_distance,
)
from .cone_smoothing import (
    ORTHANT, SECOND_ORDER, PSD, EXPONENTIAL, LIFTED, ConeModel, Orthant,
    SecondOrder, PSDCone, ExponentialCone, LiftedCone, conic_lift,
    ConicCore, cone_core, core_membership, SmoothedSet, make_smoothed_set,
    scale_set, project_smoothed, hausdorff_estimate,
)
from .numeric_core import (
    CoreEstimate, sample_normal_fan, project_halfspaces, estimate_core,
    estimate_residuals, uniqueness_probe,
)
from .composite_solver import (
    OPTIMAL_INNER, OPTIMAL_GENERAL, OPTIMAL_OUTER, LOGSUMEXP, SURROGATES,
    SmoothMap, CompositeSmoothing, smoothability_certificate,
    composite_value_grad, accelerated_minimize, power_operator_norm,
    BenchRecord, make_planted_minimax, run_minimax_bench,
)
from .verify import (
    halton, gaussian_points, sphere_points, ball_points, bisect_boundary,
    CheckReport, lipschitz_grad_estimate, quadratic_upper_check,
    sandwich_check, set_smoothness_check, run_suite,
)

__version__ = "0.1.0"
