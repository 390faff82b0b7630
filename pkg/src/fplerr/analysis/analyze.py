"""Batch error analysis: gradients, per-variable subtotals, total E per row."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..adjoint import transform
from ..frontend import ast
from ..models.base import ErrorModel, TaylorModel
from ..precision import PrecisionSpec
from ..runtime.interpreter import AdjointRunner


@dataclass
class AnalysisRow:
    outputs: dict
    gradients: dict
    errors: dict[str, float]
    total_error: float
    nonfinite: bool


@dataclass
class AnalysisReport:
    rows: list[AnalysisRow]
    variables: list[str]  # hooked variable order for tabular output
    total_avg: float
    total_max: float
    total_acc: float
    seed: int | None = None

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "rows": [
                {
                    "outputs": r.outputs,
                    "gradients": r.gradients,
                    "errors": r.errors,
                    "total_error": r.total_error,
                    "nonfinite": r.nonfinite,
                }
                for r in self.rows
            ],
            "aggregate": {"avg": self.total_avg, "max": self.total_max, "acc": self.total_acc},
        }


def analyze(
    fn: ast.FunctionDef,
    inputs: list[dict] | dict,
    spec: PrecisionSpec | None = None,
    model: ErrorModel | None = None,
    program: ast.Program | None = None,
    seed: int | None = None,
) -> AnalysisReport:
    rows_in = [inputs] if isinstance(inputs, dict) else list(inputs)
    model = model or TaylorModel()
    spec = spec or PrecisionSpec.all_double()
    adj = transform(fn, model, program=program)
    runner = AdjointRunner(adj, spec, model)

    out_rows: list[AnalysisRow] = []
    seen_vars: list[str] = []
    for row in rows_in:
        res = runner.run(row)
        for name in res.registry.subtotals:
            if name not in seen_vars:
                seen_vars.append(name)
        out_rows.append(
            AnalysisRow(
                outputs=res.outputs,
                gradients=res.gradients,
                errors=dict(res.registry.subtotals),
                total_error=res.total_error,
                nonfinite=res.stats["nonfinite"],
            )
        )

    totals = [r.total_error for r in out_rows]
    n = len(totals)
    return AnalysisReport(
        rows=out_rows,
        variables=seen_vars,
        total_avg=sum(totals) / n if n else 0.0,
        total_max=max(totals, default=0.0),
        total_acc=sum(totals),
        seed=seed,
    )
