"""Approximate-function substitution analysis.

For a variable->builtin map, the adjoint run estimates each substitution's
first-order output effect |adjoint * (exact - approx)| per assignment; the
actual error reruns the kernel with the approximate implementations
substituted at the mapped call sites.  Reported statistics over the input
batch: average, maximum, and accumulated error (both estimated and actual).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..adjoint import transform
from ..frontend import ast
from ..models.base import ApproxFunctionModel
from ..precision import PrecisionSpec
from ..runtime.interpreter import AdjointRunner
from ..runtime.shadow import ShadowOracle


@dataclass
class ApproxReport:
    mapping: dict[str, str]
    rows: int
    estimated_avg: float
    estimated_max: float
    estimated_acc: float
    actual_avg: float
    actual_max: float
    actual_acc: float
    per_variable: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "map": dict(self.mapping),
            "rows": self.rows,
            "estimated": {"avg": self.estimated_avg, "max": self.estimated_max, "acc": self.estimated_acc},
            "actual": {"avg": self.actual_avg, "max": self.actual_max, "acc": self.actual_acc},
            "per_variable": dict(self.per_variable),
        }


def approx_analysis(
    fn: ast.FunctionDef,
    inputs: list[dict] | dict,
    mapping: dict[str, str],
    program: ast.Program | None = None,
) -> ApproxReport:
    rows = [inputs] if isinstance(inputs, dict) else list(inputs)
    model = ApproxFunctionModel(mapping)
    adj = transform(fn, model, program=program)
    runner = AdjointRunner(adj, PrecisionSpec.all_double(), model)
    oracle = ShadowOracle(fn, PrecisionSpec.all_double(), program=program, approx_map=mapping)

    est_rows: list[float] = []
    act_rows: list[float] = []
    per_variable: dict[str, float] = {}
    for row in rows:
        res = runner.run(row)
        est_rows.append(res.total_error)
        for name in mapping:
            per_variable[name] = per_variable.get(name, 0.0) + res.registry.subtotals.get(name, 0.0)
        act_rows.append(oracle.actual_error(row))

    n = len(rows)
    return ApproxReport(
        mapping=dict(mapping),
        rows=n,
        estimated_avg=sum(est_rows) / n if n else 0.0,
        estimated_max=max(est_rows, default=0.0),
        estimated_acc=sum(est_rows),
        actual_avg=sum(act_rows) / n if n else 0.0,
        actual_max=max(act_rows, default=0.0),
        actual_acc=sum(act_rows),
        per_variable=per_variable,
    )
