"""Error-model interface and the per-execution error registry.

A model supplies the per-assignment hook (given a variable's name, stored
value, incoming adjoint, source location and target precision) and the final
reduction of all registered contributions into the total error E.  Error
accumulation always happens in binary64, regardless of the precision under
study.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..frontend.ast import Loc
from ..precision import EPS_M, EPS_ULP1, round_single


@dataclass
class RegistryEntry:
    name: str
    loc: Loc
    value: float
    adjoint: float
    contribution: float


class ErrorRegistry:
    """Ordered per-assignment error contributions for one adjoint execution.

    `total` is the exact binary64 sum of contributions in registration order;
    per-variable subtotals use the same order restricted to each name.
    """

    __slots__ = ("entries", "subtotals", "total", "nonfinite")

    def __init__(self) -> None:
        self.entries: list[RegistryEntry] = []
        self.subtotals: dict[str, float] = {}
        self.total = 0.0
        self.nonfinite = False

    def register(self, name: str, loc: Loc, value: float, adjoint: float, contribution: float) -> None:
        self.entries.append(RegistryEntry(name, loc, value, adjoint, contribution))
        self.subtotals[name] = self.subtotals.get(name, 0.0) + contribution
        self.total += contribution
        if not math.isfinite(contribution):
            self.nonfinite = True

    def subtotal(self, names) -> float:
        return sum(self.subtotals.get(n, 0.0) for n in names)

    @property
    def max_contribution(self) -> float:
        return max((e.contribution for e in self.entries), default=0.0)

    @property
    def mean_contribution(self) -> float:
        return self.total / len(self.entries) if self.entries else 0.0


class ErrorModel:
    """Base class for per-assignment error models.

    Subclasses set `id` and implement `assign_error`.  `emits_hooks` controls
    whether the transform inserts AssignError instructions at all (the null
    model opts out); `requires_double_exec` makes the runtime reject demoted
    execution precision for analyzed variables.
    """

    id: str = "abstract"
    emits_hooks: bool = True
    requires_double_exec: bool = False

    def assign_error(self, name: str, value: float, adjoint: float, loc: Loc, prec: str) -> float:
        raise NotImplementedError

    def finalize(self, registry: ErrorRegistry) -> float:
        """Reduce registered contributions to the total error E (plain sum)."""
        return registry.total


class TaylorModel(ErrorModel):
    """First-order rounding model: eps_m(prec) * |value| * |adjoint|.

    eps_m follows the unit-roundoff convention by default; pass
    `ulp_of_one=True` for the 2^-(p-1) convention.
    """

    id = "taylor-default"

    def __init__(self, ulp_of_one: bool = False):
        self.eps = EPS_ULP1 if ulp_of_one else EPS_M

    def assign_error(self, name: str, value: float, adjoint: float, loc: Loc, prec: str) -> float:
        # Operation order matters: a user-model file with the expression
        # `eps_m * abs(value) * abs(adjoint)` must reproduce this bit-exactly.
        return self.eps[prec] * abs(value) * abs(adjoint)


class ShadowCastModel(ErrorModel):
    """Demotion-to-binary32 model: |adjoint * (value - round_single(value))|.

    Requires the analyzed function to execute in binary64; the per-assignment
    contribution measures what storing the value in single precision would
    lose, weighted by the output's sensitivity to it.
    """

    id = "shadow-cast"
    requires_double_exec = True

    def assign_error(self, name: str, value: float, adjoint: float, loc: Loc, prec: str) -> float:
        shadow_delta = value - round_single(value)
        return abs(adjoint * shadow_delta)


class ApproxFunctionModel(ErrorModel):
    """Approximate-substitution model.

    `mapping` sends a variable name to the builtin it feeds; the contribution
    of an assignment to a mapped variable is |adjoint * (exact(f, value) -
    approx(f, value))|, and 0 for unmapped variables.
    """

    id = "approx-func"

    def __init__(self, mapping: dict[str, str]):
        from ..precision import ConfigError
        from .approx_impls import APPROX_IMPLS

        for var, fname in mapping.items():
            if fname not in APPROX_IMPLS:
                raise ConfigError(
                    f"no approximate implementation for '{fname}' (mapped from '{var}'); "
                    f"available: {', '.join(sorted(APPROX_IMPLS))}"
                )
        self.mapping = dict(mapping)
        self._impls = {f: APPROX_IMPLS[f] for f in mapping.values()}

    def assign_error(self, name: str, value: float, adjoint: float, loc: Loc, prec: str) -> float:
        fname = self.mapping.get(name)
        if fname is None:
            return 0.0
        exact, approx = self._impls[fname]
        try:
            delta = exact(value) - approx(value)
        except ValueError:
            return math.nan
        return abs(adjoint * delta)


class NullModel(ErrorModel):
    """No error estimation; used as the instrumentation-overhead baseline."""

    id = "null"
    emits_hooks = False

    def assign_error(self, name: str, value: float, adjoint: float, loc: Loc, prec: str) -> float:
        return 0.0


def builtin_model(name: str, **kwargs) -> ErrorModel:
    if name == "taylor-default":
        return TaylorModel(**kwargs)
    if name == "shadow-cast":
        return ShadowCastModel()
    if name == "approx-func":
        return ApproxFunctionModel(kwargs.get("mapping", {}))
    if name == "null":
        return NullModel()
    from ..precision import ConfigError

    raise ConfigError(f"unknown error model '{name}'")
