"""Simulation scenarios and data generators with known ground truth."""

from .generators import (
    CovariateDraw,
    GroundTruth,
    PotentialOutcomes,
    SimulatedData,
    assign_treatment,
    attach_outcomes_linear,
    attach_outcomes_nonlinear,
    draw_covariates,
    generate,
    linear_means,
    nonlinear_means,
    oracle_step1,
    selection_bias_sample,
    true_predictive_set,
    write_simulation,
)
from .scenarios import Linearity, ScenarioConfig, Structure, scenario_from_config, scenario_to_config

__all__ = [
    "CovariateDraw",
    "GroundTruth",
    "Linearity",
    "PotentialOutcomes",
    "ScenarioConfig",
    "SimulatedData",
    "Structure",
    "assign_treatment",
    "attach_outcomes_linear",
    "attach_outcomes_nonlinear",
    "draw_covariates",
    "generate",
    "linear_means",
    "nonlinear_means",
    "oracle_step1",
    "scenario_from_config",
    "scenario_to_config",
    "selection_bias_sample",
    "true_predictive_set",
    "write_simulation",
]
