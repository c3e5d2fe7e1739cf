"""Rank-routed parallel queues in heavy traffic: event-driven simulation,
the reflected diffusion limit, closed-form stationary laws, and the
statistical machinery to compare them."""

from .ctmc import (
    EmpiricalStationary,
    GapPath,
    Trajectory,
    diffusion_scale,
    empirical_stationary,
    idle_time,
    replication_seed,
    simulate,
    thread_count,
    tie_time,
)
from .diffusion import (
    DiffusionConfig,
    LocalTimePath,
    gap_ensemble,
    simulate_atlas_ordered,
    simulate_reflected,
    simulate_reflected_from_increments,
    unstable_escape_slope,
)
from .model import (
    SchemeSpec,
    SystemParams,
    ValidationResult,
    drift_vector,
    params_from_json,
    params_to_json,
    rank_map,
    routing_probabilities,
    validate_params,
)
from .skorokhod import (
    DiscretePath,
    MClassReport,
    ModelMatrices,
    SkorokhodSolution,
    build_matrices,
    check_m_class,
    default_iteration_budget,
    r_inverse_apply,
    solve,
)
from .stationary import (
    MetricsReport,
    ProductExpLaw,
    StabilityReport,
    eta_vector,
    metrics,
    stability_check,
    stationary_law,
    unstable_gap_law,
)
from .stats import (
    CTMC_THRESHOLDS,
    DIFFUSION_THRESHOLDS,
    FitReport,
    FitThresholds,
    SampleSet,
    fit_product_exp,
    ks_distance,
    ks_two_sample,
    slope_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "CTMC_THRESHOLDS",
    "DIFFUSION_THRESHOLDS",
    "DiffusionConfig",
    "DiscretePath",
    "EmpiricalStationary",
    "FitReport",
    "FitThresholds",
    "GapPath",
    "LocalTimePath",
    "MClassReport",
    "MetricsReport",
    "ModelMatrices",
    "ProductExpLaw",
    "SampleSet",
    "SchemeSpec",
    "SkorokhodSolution",
    "StabilityReport",
    "SystemParams",
    "Trajectory",
    "ValidationResult",
    "build_matrices",
    "check_m_class",
    "default_iteration_budget",
    "diffusion_scale",
    "drift_vector",
    "empirical_stationary",
    "eta_vector",
    "fit_product_exp",
    "gap_ensemble",
    "idle_time",
    "ks_distance",
    "ks_two_sample",
    "metrics",
    "params_from_json",
    "params_to_json",
    "r_inverse_apply",
    "rank_map",
    "replication_seed",
    "routing_probabilities",
    "simulate",
    "simulate_atlas_ordered",
    "simulate_reflected",
    "simulate_reflected_from_increments",
    "slope_estimate",
    "solve",
    "stability_check",
    "stationary_law",
    "thread_count",
    "tie_time",
    "unstable_escape_slope",
    "unstable_gap_law",
    "validate_params",
]
