"""Precision formats, storage rounding, and per-variable precision assignment.

All arithmetic is carried out in binary64; demotion is simulated by rounding
on every store to a demoted variable (round-to-nearest-even into the target
format, widened back to binary64).  The machine epsilon follows the unit
roundoff convention: 2^-(significand bits).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .frontend.ast import FplError

HALF = "half"
SINGLE = "single"
DOUBLE = "double"

PRECISIONS = (HALF, SINGLE, DOUBLE)

# Unit roundoff per format: half 2^-11, single 2^-24, double 2^-53.
EPS_M = {
    HALF: 2.0**-11,
    SINGLE: 2.0**-24,
    DOUBLE: 2.0**-53,
}

# Alternative ULP-of-one convention (2^-(p-1)), selectable where a model
# explicitly asks for it.
EPS_ULP1 = {k: 2.0 * v for k, v in EPS_M.items()}


class ConfigError(FplError):
    """Invalid precision/model configuration, detected before execution."""


def round_half(x: float) -> float:
    return float(np.float16(x))


def round_single(x: float) -> float:
    return float(np.float32(x))


_ROUNDERS = {HALF: round_half, SINGLE: round_single, DOUBLE: None}


def round_to(prec: str, x: float) -> float:
    """Round a binary64 value to `prec` (nearest-even), widened to binary64.

    Values overflowing the target format become +/-inf; callers that track
    flags should compare finiteness before and after.
    """
    if prec == DOUBLE:
        return x
    if prec == SINGLE:
        return float(np.float32(x))
    if prec == HALF:
        return float(np.float16(x))
    raise ConfigError(f"unknown precision '{prec}'")


def overflows(prec: str, x: float) -> bool:
    return math.isfinite(x) and not math.isfinite(round_to(prec, x))


@dataclass
class PrecisionSpec:
    """Per-variable storage precision: a default plus named overrides."""

    default: str = DOUBLE
    overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.default not in PRECISIONS:
            raise ConfigError(f"unknown precision '{self.default}'")
        for name, prec in self.overrides.items():
            if prec not in PRECISIONS:
                raise ConfigError(f"unknown precision '{prec}' for variable '{name}'")

    def precision_of(self, name: str) -> str:
        return self.overrides.get(name, self.default)

    def rounder(self, name: str):
        """Storage-rounding callable for a variable, or None for identity."""
        return _ROUNDERS[self.precision_of(name)]

    def demoted(self) -> list[str]:
        """Override names stored below binary64, in insertion order."""
        return [n for n, p in self.overrides.items() if p != DOUBLE]

    def validate(self, declared: set[str]) -> None:
        for name in self.overrides:
            if name not in declared:
                raise ConfigError(f"precision override for undeclared variable '{name}'")

    @staticmethod
    def all_double() -> "PrecisionSpec":
        return PrecisionSpec(DOUBLE, {})

    @staticmethod
    def demote(names, to: str = SINGLE) -> "PrecisionSpec":
        return PrecisionSpec(DOUBLE, {n: to for n in names})

    @staticmethod
    def parse(text: str) -> "PrecisionSpec":
        """Parse `v=single,w=half` inline syntax or a JSON file's contents."""
        text = text.strip()
        if text.startswith("{"):
            data = json.loads(text)
            return PrecisionSpec(data.get("default", DOUBLE), dict(data.get("overrides", {})))
        overrides: dict[str, str] = {}
        default = DOUBLE
        if not text:
            return PrecisionSpec()
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise ConfigError(f"bad precision entry '{item}' (expected name=precision)")
            name, prec = (s.strip() for s in item.split("=", 1))
            if name == "default":
                default = prec
            else:
                overrides[name] = prec
        return PrecisionSpec(default, overrides)

    @staticmethod
    def load(path: str | Path) -> "PrecisionSpec":
        return PrecisionSpec.parse(Path(path).read_text())

    def to_json(self) -> dict:
        return {"default": self.default, "overrides": dict(self.overrides)}
