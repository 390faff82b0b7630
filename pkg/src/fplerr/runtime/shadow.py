"""Shadow-execution oracle: the measured "actual error" of a configuration.

Runs the same function under all-binary64 and under the precision spec (or
approximate-function substitution) being evaluated, and reports the largest
absolute difference over scalar outputs (elementwise for array outputs).
"""

from __future__ import annotations

from ..frontend import ast
from .interpreter import PrimalRunner
from ..precision import PrecisionSpec


def output_difference(ref: dict, other: dict) -> float:
    worst = 0.0
    for key, rv in ref.items():
        ov = other[key]
        if isinstance(rv, list):
            for a, b in zip(rv, ov):
                worst = max(worst, abs(a - b))
        else:
            worst = max(worst, abs(rv - ov))
    return worst


def shadow_actual_error(
    fn: ast.FunctionDef,
    inputs: dict,
    spec: PrecisionSpec,
    program: ast.Program | None = None,
    approx_map: dict[str, str] | None = None,
) -> float:
    """|outputs(all-double) - outputs(spec, approx_map)|, max over outputs."""
    from ..adjoint.transform import prepare_function

    inlined = prepare_function(fn, program)
    ref = PrimalRunner(inlined, PrecisionSpec.all_double()).run(inputs)
    got = PrimalRunner(inlined, spec, approx_map=approx_map).run(inputs)
    return output_difference(ref, got)


class ShadowOracle:
    """Precompiled version for batch validation over many input rows."""

    def __init__(
        self,
        fn: ast.FunctionDef,
        spec: PrecisionSpec,
        program: ast.Program | None = None,
        approx_map: dict[str, str] | None = None,
    ):
        from ..adjoint.transform import prepare_function

        inlined = prepare_function(fn, program)
        self.reference = PrimalRunner(inlined, PrecisionSpec.all_double())
        self.subject = PrimalRunner(inlined, spec, approx_map=approx_map)

    def actual_error(self, inputs: dict) -> float:
        return output_difference(self.reference.run(inputs), self.subject.run(inputs))
