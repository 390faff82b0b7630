"""Greedy mixed-precision tuning under an error budget.

Candidates (the declared real variables of the analyzed function) are ranked
by ascending accumulated sensitivity, ties broken by declaration order.
Walking that ranking, each candidate's model-estimated error contribution is
accumulated; the walk stops before the running total would exceed the
threshold, and everything demoted so far forms the recommended
configuration.  Contributions accumulate as absolute values, so a superset
of demotions never estimates lower than a subset.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..adjoint import transform
from ..frontend import ast
from ..models.base import ErrorModel, ShadowCastModel
from ..precision import DOUBLE, SINGLE, PrecisionSpec
from ..runtime.interpreter import AdjointRunner
from ..runtime.shadow import ShadowOracle

log = logging.getLogger("fplerr.tune")


@dataclass
class TuningResult:
    threshold: float
    demoted: list[str]
    estimated_error: float
    actual_error: float
    accepted: bool
    spec: PrecisionSpec
    ranking: list[tuple[str, float]] = field(default_factory=list)
    contributions: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "demoted": list(self.demoted),
            "estimated_error": self.estimated_error,
            "actual_error": self.actual_error,
            "accepted": self.accepted,
            "spec": self.spec.to_json(),
            "ranking": [[n, s] for n, s in self.ranking],
            "contributions": dict(self.contributions),
        }


def tune(
    fn: ast.FunctionDef,
    inputs: list[dict] | dict,
    threshold: float,
    model: ErrorModel | None = None,
    program: ast.Program | None = None,
    demote_to: str = SINGLE,
) -> TuningResult:
    """Recommend a demotion set whose accumulated estimate fits `threshold`.

    The estimation pass executes in binary64; per-variable contributions are
    computed against the demotion target precision.  The recommended
    configuration's actual error is measured with the shadow oracle
    (accumulated over the input batch, like the estimate).
    """
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    rows = [inputs] if isinstance(inputs, dict) else list(inputs)
    model = model or ShadowCastModel()

    adj = transform(fn, model, program=program)
    est_spec = PrecisionSpec(default=demote_to) if not model.requires_double_exec else PrecisionSpec.all_double()
    runner = AdjointRunner(adj, PrecisionSpec.all_double(), model, est_spec=est_spec)

    sens: dict[str, float] = {}
    contrib: dict[str, float] = {}
    for row in rows:
        res = runner.run(row)
        for name, s in res.sensitivities.items():
            sens[name] = sens.get(name, 0.0) + s
        for name, c in res.registry.subtotals.items():
            contrib[name] = contrib.get(name, 0.0) + c

    candidates = fn.real_variables()
    ranking = sorted(
        ((name, sens.get(name, 0.0)) for name in candidates),
        key=lambda item: item[1],
    )

    demoted: list[str] = []
    total = 0.0
    for name, _ in ranking:
        c = contrib.get(name, 0.0)
        if total + c > threshold:
            break
        demoted.append(name)
        total += c

    spec = PrecisionSpec.demote(demoted, to=demote_to)
    oracle = ShadowOracle(fn, spec, program=program)
    actual = 0.0
    for row in rows:
        actual += oracle.actual_error(row)

    accepted = total <= threshold
    if actual > threshold:
        log.warning(
            "tuned configuration exceeds the budget when measured: actual %.3e > threshold %.3e",
            actual,
            threshold,
        )
    return TuningResult(
        threshold=threshold,
        demoted=demoted,
        estimated_error=total,
        actual_error=actual,
        accepted=accepted,
        spec=spec,
        ranking=ranking,
        contributions={n: contrib.get(n, 0.0) for n in candidates},
    )
