import math

import pytest

from fplerr.adjoint import transform
from fplerr.frontend import parse, typecheck
from fplerr.models import TaylorModel
from fplerr.runtime import PrecisionSpec, PrimalRunner, run_adjoint
from fplerr.adjoint.transform import prepare_function


def checked(src: str):
    """Parse + typecheck; returns (program, last function)."""
    program = typecheck(parse(src))
    return program, program.functions[-1]


def central_diff(fn, program, inputs: dict, name: str, index: int | None = None) -> float:
    """Central finite difference d(return)/d(inputs[name][index]) with
    h = 1e-6 * max(1, |x|); an independent derivative oracle."""
    runner = PrimalRunner(prepare_function(fn, program), PrecisionSpec.all_double())

    def shifted(delta: float) -> dict:
        row = {k: (list(v) if isinstance(v, list) else v) for k, v in inputs.items()}
        if index is None:
            row[name] = row[name] + delta
        else:
            row[name][index] += delta
        return row

    x = inputs[name] if index is None else inputs[name][index]
    h = 1e-6 * max(1.0, abs(x))
    fp = runner.run(shifted(+h))["return"]
    fm = runner.run(shifted(-h))["return"]
    return (fp - fm) / (2.0 * h)


def assert_close_grad(got: float, want: float):
    """Gradient tolerance: relative 1e-5, absolute 1e-8 near zero."""
    if abs(want) < 1e-3:
        assert abs(got - want) <= max(1e-8, 1e-5 * abs(want)), (got, want)
    else:
        assert abs(got - want) / abs(want) <= 1e-5, (got, want)


def adjoint_of(src: str, model=None, **kwargs):
    program, fn = checked(src)
    model = model or TaylorModel()
    return program, fn, transform(fn, model, program=program, **kwargs)


@pytest.fixture(scope="session")
def corpus():
    from fplerr.corpus import KERNELS

    return KERNELS
