"""Declarative user error models loaded from small text files.

File format (documented in docs/models.md): `#` comments, blank lines, and
directives

    model user                      -- or approx-func
    expression <fpl expression>     -- required for `model user`
    map <variable> <function>       -- approx-func pairs, repeatable

A `model user` expression may reference exactly the bound names `value`,
`adjoint`, `eps_m` and `shadow_delta`, plus the numeric builtins (abs is
accepted as an alias of fabs).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Callable

from ..frontend import ast
from ..frontend.parser import Parser
from ..precision import EPS_M, ConfigError, round_single
from .base import ApproxFunctionModel, ErrorModel

BOUND_NAMES = ("value", "adjoint", "eps_m", "shadow_delta")

_FUNCS: dict[str, Callable] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "log": math.log,
    "pow": math.pow,
    "fabs": abs,
    "abs": abs,
    "min": min,
    "max": max,
}


def _compile(e: ast.Expr) -> Callable[[dict], float]:
    """Compile a parsed expression over the bound names to a closure."""
    match e:
        case ast.Num(value=v) | ast.IntNum(value=v):
            return lambda env, v=v: v
        case ast.Var(name=n):
            if n not in BOUND_NAMES:
                raise ConfigError(f"unbound name '{n}' in model expression (bound: {', '.join(BOUND_NAMES)})")
            return lambda env, n=n: env[n]
        case ast.Neg(operand=op):
            f = _compile(op)
            return lambda env: -f(env)
        case ast.Bin(op=o, left=l, right=r):
            lf, rf = _compile(l), _compile(r)
            if o == "+":
                return lambda env: lf(env) + rf(env)
            if o == "-":
                return lambda env: lf(env) - rf(env)
            if o == "*":
                return lambda env: lf(env) * rf(env)
            if o == "/":
                return lambda env: lf(env) / rf(env)
            raise ConfigError(f"operator '{o}' not allowed in model expressions")
        case ast.Call(func=fname, args=args):
            fn = _FUNCS.get(fname)
            if fn is None:
                raise ConfigError(f"unknown function '{fname}' in model expression")
            compiled = [_compile(a) for a in args]
            if len(compiled) == 1:
                af = compiled[0]
                return lambda env: fn(af(env))
            if len(compiled) == 2:
                af, bf = compiled
                return lambda env: fn(af(env), bf(env))
            raise ConfigError(f"'{fname}' takes 1 or 2 arguments")
        case _:
            raise ConfigError("model expressions allow only arithmetic and numeric builtins")


class UserModel(ErrorModel):
    """Model whose per-assignment expression is interpreted at runtime."""

    id = "user"

    def __init__(self, expression_text: str):
        parser = Parser(expression_text)
        expr = parser.parse_expr()
        if parser.cur.kind != "eof":
            raise ConfigError(f"trailing input in model expression: '{parser.cur.text}'")
        self.expression_text = expression_text
        self._fn = _compile(expr)

    def assign_error(self, name: str, value: float, adjoint: float, loc: ast.Loc, prec: str) -> float:
        env = {
            "value": value,
            "adjoint": adjoint,
            "eps_m": EPS_M[prec],
            "shadow_delta": value - round_single(value),
        }
        return self._fn(env)


def load_user_model(path: str | Path) -> ErrorModel:
    """Load a model file; raises ConfigError on schema violations."""
    text = Path(path).read_text(encoding="utf-8")
    model_kind: str | None = None
    expression: str | None = None
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "model":
            model_kind = rest
        elif key == "expression":
            expression = rest
        elif key == "map":
            parts = rest.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: 'map' needs '<variable> <function>'")
            mapping[parts[0]] = parts[1]
        else:
            raise ConfigError(f"{path}:{lineno}: unknown directive '{key}'")
    if model_kind == "user":
        if expression is None:
            raise ConfigError(f"{path}: 'model user' requires an 'expression' line")
        return UserModel(expression)
    if model_kind == "approx-func":
        if not mapping:
            raise ConfigError(f"{path}: 'model approx-func' requires at least one 'map' line")
        return ApproxFunctionModel(mapping)
    raise ConfigError(f"{path}: missing or unknown 'model' directive (expected 'user' or 'approx-func')")
