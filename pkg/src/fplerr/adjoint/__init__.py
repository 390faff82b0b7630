"""Adjoint synthesis: activity analysis, inlining, transform, and emission."""

from .activity import ActivitySet, analyze_activity, default_activity, seed_outputs
from .emit import emit
from .inline import TransformError, inline_function
from .ir import AdjointFunction
from .transform import adjoint_name, prepare_function, transform

__all__ = [
    "ActivitySet",
    "AdjointFunction",
    "TransformError",
    "adjoint_name",
    "analyze_activity",
    "default_activity",
    "emit",
    "inline_function",
    "prepare_function",
    "seed_outputs",
    "transform",
]
