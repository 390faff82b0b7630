"""Estimated-vs-actual validation of a precision configuration.

The estimate is the adjoint run's total error restricted to the variables
the spec demotes (estimation executes in binary64); the actual error is the
shadow oracle's output difference under the spec.  First-order estimates
are not rigorous bounds: per-row violations (estimate < actual) are counted
and logged, not raised.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from ..adjoint import transform
from ..frontend import ast
from ..models.base import ErrorModel, ShadowCastModel
from ..precision import PrecisionSpec
from ..runtime.interpreter import AdjointRunner
from ..runtime.shadow import ShadowOracle

log = logging.getLogger("fplerr.validate")


def error_ratio(estimated: float, actual: float) -> float:
    if actual == 0.0:
        return 1.0 if estimated == 0.0 else math.inf
    return estimated / actual


@dataclass
class ValidationReport:
    estimated: float  # accumulated over rows
    actual: float
    ratio: float
    rows: list[tuple[float, float]] = field(default_factory=list)
    violations: int = 0  # rows where estimated < actual
    invalid: bool = False  # non-finite terms encountered

    def to_json(self) -> dict:
        return {
            "estimated": self.estimated,
            "actual": self.actual,
            "ratio": self.ratio,
            "rows": [[e, a] for e, a in self.rows],
            "violations": self.violations,
            "invalid": self.invalid,
        }


def validate(
    fn: ast.FunctionDef,
    inputs: list[dict] | dict,
    spec: PrecisionSpec,
    model: ErrorModel | None = None,
    program: ast.Program | None = None,
) -> ValidationReport:
    rows = [inputs] if isinstance(inputs, dict) else list(inputs)
    model = model or ShadowCastModel()
    demoted = spec.demoted()

    adj = transform(fn, model, program=program)
    runner = AdjointRunner(adj, PrecisionSpec.all_double(), model, est_spec=spec)
    oracle = ShadowOracle(fn, spec, program=program)

    per_row: list[tuple[float, float]] = []
    invalid = False
    for row in rows:
        res = runner.run(row)
        est = res.registry.subtotal(demoted)
        act = oracle.actual_error(row)
        if not (math.isfinite(est) and math.isfinite(act)):
            invalid = True
        per_row.append((est, act))

    estimated = sum(e for e, _ in per_row)
    actual = sum(a for _, a in per_row)
    violations = sum(1 for e, a in per_row if e < a)
    if violations:
        log.warning(
            "estimate below measured actual on %d of %d rows (first-order estimates are not bounds)",
            violations,
            len(per_row),
        )
    return ValidationReport(
        estimated=estimated,
        actual=actual,
        ratio=error_ratio(estimated, actual),
        rows=per_row,
        violations=violations,
        invalid=invalid,
    )
