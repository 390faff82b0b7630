"""Execution runtime: precision simulation, tape, interpreter, shadow oracle."""

from ..precision import DOUBLE, EPS_M, HALF, PRECISIONS, SINGLE, ConfigError, PrecisionSpec, round_to
from .tape import Tape
from .interpreter import (
    AdjointRunner,
    ExecutionResult,
    PrimalRunner,
    RuntimeFault,
    run_adjoint,
    run_primal,
)
from .shadow import ShadowOracle, shadow_actual_error

__all__ = [
    "AdjointRunner",
    "ConfigError",
    "DOUBLE",
    "EPS_M",
    "ExecutionResult",
    "HALF",
    "PRECISIONS",
    "PrecisionSpec",
    "PrimalRunner",
    "RuntimeFault",
    "ShadowOracle",
    "SINGLE",
    "Tape",
    "round_to",
    "run_adjoint",
    "run_primal",
    "shadow_actual_error",
]
