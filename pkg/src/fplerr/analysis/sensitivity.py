"""Per-variable sensitivity profiles: S = sum over assignments of |value * adjoint|."""

from __future__ import annotations

from dataclasses import dataclass

from ..adjoint import transform
from ..frontend import ast
from ..models.base import TaylorModel
from ..precision import PrecisionSpec
from ..runtime.interpreter import AdjointRunner


@dataclass
class SensitivityReport:
    """Accumulated sensitivities over an input batch.

    `per_variable` maps each hooked variable to its accumulated S (>= 0).
    `normalized` rescales so the largest entry is 1.0 (all-zero stays zero).
    `per_iteration` maps iteration index -> {variable: S} for the marked
    loop; `normalized_series` rescales each tracked variable's series to a
    max of 1.0.
    """

    per_variable: dict[str, float]
    inputs_used: int
    normalized: dict[str, float] | None = None
    per_iteration: dict[int, dict[str, float]] | None = None
    normalized_series: dict[str, list[float]] | None = None


def _normalize_flat(per_variable: dict[str, float]) -> dict[str, float]:
    peak = max(per_variable.values(), default=0.0)
    if peak == 0.0:
        return {k: 0.0 for k in per_variable}
    return {k: v / peak for k, v in per_variable.items()}


def _normalize_series(mat: dict[int, dict[str, float]], tracked: list[str]) -> dict[str, list[float]]:
    n = (max(mat) + 1) if mat else 0
    out: dict[str, list[float]] = {}
    for var in tracked:
        series = [mat.get(i, {}).get(var, 0.0) for i in range(n)]
        peak = max(series, default=0.0)
        out[var] = [s / peak for s in series] if peak > 0.0 else series
    return out


def sensitivity(
    fn: ast.FunctionDef,
    inputs: list[dict] | dict,
    spec: PrecisionSpec | None = None,
    program: ast.Program | None = None,
    normalize: bool = False,
    profile_loop: str | None = None,
    tracked: list[str] | None = None,
) -> SensitivityReport:
    """Run the adjoint over the batch and accumulate per-variable S values."""
    rows = [inputs] if isinstance(inputs, dict) else list(inputs)
    model = TaylorModel()
    adj = transform(fn, model, program=program)
    runner = AdjointRunner(
        adj,
        spec or PrecisionSpec.all_double(),
        model,
        profile_loop=profile_loop,
    )
    per_variable: dict[str, float] = {}
    mat: dict[int, dict[str, float]] = {}
    for row in rows:
        res = runner.run(row)
        for name, s in res.sensitivities.items():
            per_variable[name] = per_variable.get(name, 0.0) + s
        if res.iteration_matrix:
            for it, vars_ in res.iteration_matrix.items():
                slot = mat.setdefault(it, {})
                for name, s in vars_.items():
                    slot[name] = slot.get(name, 0.0) + s

    report = SensitivityReport(per_variable=per_variable, inputs_used=len(rows))
    if normalize:
        report.normalized = _normalize_flat(per_variable)
    if profile_loop is not None:
        report.per_iteration = mat
        names = tracked if tracked else sorted({v for row in mat.values() for v in row})
        report.normalized_series = _normalize_series(mat, list(names))
    return report
