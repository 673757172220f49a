"""Virtual Twins engine and permutation calibration of the step-2 penalty."""

from .calibration import CalibrationResult, calibrate_step2_penalty, null_penalty
from .engine import (
    CounterfactualPredictions,
    VtFit,
    VtSpec,
    compute_twins,
    estimated_effect,
    fit_step1,
    predict_optimal_arm,
    run_vt,
)

__all__ = [
    "CalibrationResult",
    "CounterfactualPredictions",
    "VtFit",
    "VtSpec",
    "calibrate_step2_penalty",
    "compute_twins",
    "estimated_effect",
    "fit_step1",
    "null_penalty",
    "predict_optimal_arm",
    "run_vt",
]
