"""Distributed uplink power allocation in a single access-point network.

C++ core exposed through pybind11: exact water-filling best responses, the
averaged/sequential IWF and projected-gradient dynamics, a certified maximum-
potential oracle, seeded scenario generation and the Monte Carlo experiment
harness.
"""

from ._core import (
    NetworkInstance,
    aggregate_broadcast,
    best_response,
    br_residual,
    count_collisions,
    efficiency,
    example1_ne_hat,
    example1_ne_tilde,
    generate,
    interference_matrices,
    ipn,
    is_feasible,
    make_example1,
    potential,
    potential_gradient,
    project_simplex,
    run_aiwf,
    run_experiment_json,
    run_pgd,
    run_simultaneous_iwf,
    run_siwf,
    solve_max_potential,
    spectral_radius,
    sum_rate,
    uniform_profile,
    user_rate,
    verify_ne,
    water_fill,
)

__all__ = [
    "NetworkInstance",
    "aggregate_broadcast",
    "best_response",
    "br_residual",
    "count_collisions",
    "efficiency",
    "example1_ne_hat",
    "example1_ne_tilde",
    "generate",
    "interference_matrices",
    "ipn",
    "is_feasible",
    "make_example1",
    "potential",
    "potential_gradient",
    "project_simplex",
    "run_aiwf",
    "run_experiment_json",
    "run_pgd",
    "run_simultaneous_iwf",
    "run_siwf",
    "solve_max_potential",
    "spectral_radius",
    "sum_rate",
    "uniform_profile",
    "user_rate",
    "verify_ne",
    "water_fill",
]

__version__ = "0.1.0"
