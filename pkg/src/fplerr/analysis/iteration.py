"""Per-iteration sensitivity profiling and the precision-switch cutoff.

The cutoff for threshold t is the smallest iteration index k such that every
tracked variable's sensitivity stays below t for all iterations >= k;
raising the threshold never increases it.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..frontend import ast
from ..precision import PrecisionSpec
from .sensitivity import SensitivityReport, sensitivity


@dataclass
class IterationCutoff:
    threshold: float
    cutoff: int
    n: int  # total iterations profiled


def compute_cutoff(
    matrix: dict[int, dict[str, float]],
    tracked: list[str],
    threshold: float,
) -> IterationCutoff:
    n = (max(matrix) + 1) if matrix else 0
    cutoff = 0
    for it in range(n - 1, -1, -1):
        row = matrix.get(it, {})
        if any(row.get(v, 0.0) >= threshold for v in tracked):
            cutoff = it + 1
            break
    return IterationCutoff(threshold=threshold, cutoff=cutoff, n=n)


def iteration_profile(
    fn: ast.FunctionDef,
    inputs: list[dict] | dict,
    tracked_vars: list[str],
    threshold: float,
    loop: str,
    program: ast.Program | None = None,
    spec: PrecisionSpec | None = None,
) -> tuple[IterationCutoff, SensitivityReport]:
    """Profile S per tracked variable per iteration of the marked loop."""
    report = sensitivity(
        fn,
        inputs,
        spec=spec,
        program=program,
        profile_loop=loop,
        tracked=list(tracked_vars),
    )
    cut = compute_cutoff(report.per_iteration or {}, list(tracked_vars), threshold)
    return cut, report
