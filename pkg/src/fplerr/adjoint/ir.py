"""Instruction IR for synthesized error-estimated adjoint functions.

An AdjointFunction holds a forward sweep (the original statements with tape
Push instrumentation), a backward sweep (Pop / adjoint-accumulation /
AssignError instructions in exact reverse statement order), the
parameter-read AssignError hooks, and the terminal FinalizeEE. The generated
adjoint and scratch variables live in the same namespace as the source
program but use the reserved `_` prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend import ast

SEED_VAR = "_seed"


def adjoint_name(var: str) -> str:
    return "_d_" + var


# ---------------------------------------------------------------------------
# Forward sweep ops
# ---------------------------------------------------------------------------


@dataclass
class FPush:
    """Record the value the next assignment overwrites (one scalar or one
    array element)."""

    target: ast.Expr  # Var or Index


@dataclass
class FAssign:
    stmt: ast.Assign


@dataclass
class FFor:
    """`static` bounds are provably loop-invariant and are re-evaluated by the
    reverse loop; otherwise the trip data is recorded on the tape."""

    index: str
    lo: ast.Expr
    hi: ast.Expr
    body: list
    static: bool
    loop_id: int


@dataclass
class FWhile:
    cond: ast.Expr
    body: list
    loop_id: int


@dataclass
class FIf:
    cond: ast.Expr
    then: list
    orelse: list


@dataclass
class FReturn:
    value: ast.Expr | None


FwdOp = FPush | FAssign | FFor | FWhile | FIf | FReturn


# ---------------------------------------------------------------------------
# Backward sweep ops
# ---------------------------------------------------------------------------


@dataclass
class BPop:
    target: ast.Expr  # Var or Index


@dataclass
class BSet:
    """Generated scalar assignment (scratch or adjoint variable)."""

    name: str
    expr: ast.Expr


@dataclass
class BSetElem:
    """Generated adjoint-array element assignment `_d_a[i] = expr`."""

    array: str
    index: ast.Expr
    expr: ast.Expr


@dataclass
class BCond:
    """Plain backward conditional (sub-gradient selection for min/max)."""

    cond: ast.Expr
    then: list
    orelse: list


@dataclass
class BHook:
    """AssignError instruction for one assignment.

    `value_src` and `adjoint_src` name scratch slots holding the assigned
    value and incoming adjoint; adjoint_src None means a constant 0 adjoint
    (rule for live, non-differentiable assignments).
    """

    var_name: str
    loc: ast.Loc
    value_src: str
    adjoint_src: str | None


@dataclass
class BParamHook:
    """AssignError for a parameter's initial value, emitted at the end of the
    backward sweep; array parameters register one entry per element."""

    param: str
    loc: ast.Loc


@dataclass
class BRevFor:
    """Reverse of a static-bounds for loop; iterates index hi-1 down to lo."""

    index: str
    lo: ast.Expr
    hi: ast.Expr
    body: list
    loop_id: int


@dataclass
class BRevForDyn:
    """Reverse of a recorded-trip for loop; pops (lo, count) from the tape."""

    index: str
    body: list
    loop_id: int


@dataclass
class BRevWhile:
    """Reverse of a while loop; pops the recorded trip count."""

    body: list
    loop_id: int


@dataclass
class BRevIf:
    """Pops the recorded branch token and reverses the taken branch."""

    then: list
    orelse: list


@dataclass
class BFinalize:
    """E = FinalizeEE(...): reduce the registry into the total-error output."""


BwdOp = (
    BPop
    | BSet
    | BSetElem
    | BCond
    | BHook
    | BParamHook
    | BRevFor
    | BRevForDyn
    | BRevWhile
    | BRevIf
    | BFinalize
)


# ---------------------------------------------------------------------------
# The synthesized function
# ---------------------------------------------------------------------------


@dataclass
class AdjointFunction:
    """Error-estimated adjoint of one FPL function.

    Invariants: the backward sweep visits assignments in exact reverse order
    of the forward sweep; every FPush has exactly one matching BPop (same
    variable or element, LIFO order); stripping FPush from the forward sweep
    leaves the original (inlined) statement sequence.
    """

    name: str
    source_name: str
    fn: ast.FunctionDef  # inlined, type-checked source function
    diff_params: list[str]  # differentiable params, declaration order
    grad_outputs: dict[str, str]  # param name -> adjoint output name
    error_output: str
    adjoint_vars: dict[str, str]  # diff variable -> adjoint slot name
    scratch: list[str]  # generated scalar scratch names (caches, seed)
    fwd: list = field(default_factory=list)
    bwd: list = field(default_factory=list)
    model_id: str = "taylor-default"
    marked_loops: dict[str, int] = field(default_factory=dict)  # top-level for-index -> loop_id

    def count_ops(self, kinds) -> int:
        """Count IR ops of the given type(s) across both sweeps (tests)."""
        n = 0

        def walk(ops) -> None:
            nonlocal n
            for op in ops:
                if isinstance(op, kinds):
                    n += 1
                for attr in ("body", "then", "orelse"):
                    sub = getattr(op, attr, None)
                    if sub is not None:
                        walk(sub)

        walk(self.fwd)
        walk(self.bwd)
        return n
