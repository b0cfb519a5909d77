"""Minimum-KL projections of discrete distributions onto moment inequality sets."""

from ._core import (
    Cdf,
    DiscreteMeasure,
    InputError,
    MomentFamily,
    SolverConfig,
    bregman_dykstra,
    build_partition,
    check_assumptions,
    coercivity_bound_check,
    default_schedule,
    density_from_dual,
    generate_instance,
    grid_constraints,
    kl_divergence,
    pava,
    pava_closed_form,
    project,
    result_json,
    solve_finite_program,
    verify_constraints,
)

__all__ = [
    "Cdf",
    "DiscreteMeasure",
    "InputError",
    "MomentFamily",
    "SolverConfig",
    "bregman_dykstra",
    "build_partition",
    "check_assumptions",
    "coercivity_bound_check",
    "default_schedule",
    "density_from_dual",
    "generate_instance",
    "grid_constraints",
    "kl_divergence",
    "pava",
    "pava_closed_form",
    "project",
    "result_json",
    "solve_finite_program",
    "verify_constraints",
]
