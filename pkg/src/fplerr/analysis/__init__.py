"""Analysis layer: sensitivity, tuning, validation, iteration profiles, reports."""

from .analyze import AnalysisReport, analyze
from .approx import ApproxReport, approx_analysis
from .iteration import IterationCutoff, compute_cutoff, iteration_profile
from .sensitivity import SensitivityReport, sensitivity
from .tuning import TuningResult, tune
from .validation import ValidationReport, error_ratio, validate

__all__ = [
    "AnalysisReport",
    "ApproxReport",
    "IterationCutoff",
    "SensitivityReport",
    "TuningResult",
    "ValidationReport",
    "analyze",
    "approx_analysis",
    "compute_cutoff",
    "error_ratio",
    "iteration_profile",
    "sensitivity",
    "tune",
    "validate",
]
