"""Reflected multi-dimensional G-BSDEs: obstacle PDE solvers, G-expectations and path checks."""

__version__ = "0.1.0"

from .core import (CoefficientFn, GeneratorFn, GParams, Grid, GridError, ProblemError,
                   ProblemSpec, ValidationReport, ValueField, g_apply, problem_grid,
                   validate_problem)
from .gexp import CylinderFunctional, evaluate_cylinder, solve_g_heat, sup_over_scenarios
from .harness import classical_oracle, comparison_check, reconstruct_paths
from .obstacle import (PenaltySchedule, complementarity_residual, f_operator, penalty_trace,
                       refinement_study, solve_obstacle, solve_penalized)
from .picard import PicardConfig, picard_global_solve, picard_local_step
from .sde import ScenarioControl, extreme_controls, moment_diagnostics, simulate_gsde

__all__ = [
    "CoefficientFn", "GeneratorFn", "GParams", "Grid", "GridError", "ProblemError",
    "ProblemSpec", "ValidationReport", "ValueField", "g_apply", "problem_grid",
    "validate_problem", "CylinderFunctional", "evaluate_cylinder", "solve_g_heat",
    "sup_over_scenarios", "classical_oracle", "comparison_check", "reconstruct_paths",
    "PenaltySchedule", "complementarity_residual", "f_operator", "penalty_trace",
    "refinement_study", "solve_obstacle", "solve_penalized", "PicardConfig",
    "picard_global_solve", "picard_local_step", "ScenarioControl", "extreme_controls",
    "moment_diagnostics", "simulate_gsde",
]
