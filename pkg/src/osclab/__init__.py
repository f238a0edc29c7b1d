"""Ball mean-oscillation statistics over centers and radii.

The package measures, for a test function f on R^d, the mean oscillation
over balls m(a, r) and the weighted measure of its superlevel sets in the
(center, radius) half-space.  The scaled quantity kappa^p * measure tends,
as the threshold kappa shrinks, to an explicit constant times the p-th
power of the gradient norm for smooth enough f, while a jump function
sends it to infinity at p = 1.  The modules estimate both regimes with
quantified error and verify the quantitative lemmas behind them.

Modules: quadrature (seeded ball averages), catalog (test functions),
oscillation (ball oscillation evaluators), weaknorm (distribution curves,
limits), verify (the lemma battery), cli (command line front end).
"""

from .catalog import (
    DEFAULT_IDS,
    TestFunction,
    default_catalog,
    dilate,
    grad_norm_p,
    make_ball_indicator,
    make_linear,
    make_plateau_bump,
    parse_function_id,
    scale_values,
    translate,
    unit_ball_volume,
)
from .oscillation import (
    UnsupportedFunctionError,
    default_r_grid,
    exact_oscillation_1d,
    maximal_gradient,
    mean_oscillation,
    pair_oscillation,
    q_oscillation,
)
from .quadrature import (
    BallSample,
    EstimatedValue,
    QuadratureError,
    QuadratureSpec,
    ball_average,
    gauss_rule,
    sample_ball_uniform,
    stream,
    unit_ball_nodes,
)
from .verify import (
    CaseResult,
    Mollifier,
    VerificationReport,
    battery_passed,
    battery_to_dict,
    check_bv_divergence,
    check_local_expansion,
    check_maximal_domination,
    check_mollification,
    check_tail_bounds,
    indicator_measure_1d,
    indicator_section_1d,
    mollify_1d,
    run_all,
)
from .weaknorm import (
    DistributionCurve,
    Domain,
    FaultSpec,
    LimitEstimate,
    RadiusInterval,
    WeakSupEstimate,
    c_d_prime,
    c_dp,
    curve_summary,
    default_domain,
    default_kappa_grid,
    distribution_curve,
    expansion_remainder_coeff,
    interval_weight,
    limit_extrapolate,
    reference_scaled_limit,
    superlevel_measure,
    superlevel_radius_set,
    weak_sup,
    write_curve_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BallSample",
    "CaseResult",
    "DEFAULT_IDS",
    "DistributionCurve",
    "Domain",
    "EstimatedValue",
    "FaultSpec",
    "LimitEstimate",
    "Mollifier",
    "QuadratureError",
    "QuadratureSpec",
    "RadiusInterval",
    "TestFunction",
    "UnsupportedFunctionError",
    "VerificationReport",
    "WeakSupEstimate",
    "ball_average",
    "battery_passed",
    "battery_to_dict",
    "c_d_prime",
    "c_dp",
    "check_bv_divergence",
    "check_local_expansion",
    "check_maximal_domination",
    "check_mollification",
    "check_tail_bounds",
    "curve_summary",
    "default_catalog",
    "default_domain",
    "default_kappa_grid",
    "default_r_grid",
    "dilate",
    "distribution_curve",
    "exact_oscillation_1d",
    "expansion_remainder_coeff",
    "gauss_rule",
    "grad_norm_p",
    "indicator_measure_1d",
    "indicator_section_1d",
    "interval_weight",
    "limit_extrapolate",
    "make_ball_indicator",
    "make_linear",
    "make_plateau_bump",
    "maximal_gradient",
    "mean_oscillation",
    "mollify_1d",
    "pair_oscillation",
    "parse_function_id",
    "q_oscillation",
    "reference_scaled_limit",
    "run_all",
    "sample_ball_uniform",
    "scale_values",
    "stream",
    "superlevel_measure",
    "superlevel_radius_set",
    "translate",
    "unit_ball_nodes",
    "unit_ball_volume",
    "weak_sup",
    "write_curve_csv",
]
