"""Liveness/activity analysis selecting the per-assignment transform rule.

`isDiff` holds for variables data-dependent on a differentiable (real)
input; `isLive` holds for assignments whose stored value can reach a seed
output.  Both are computed flow-insensitively to a fixpoint, which
over-approximates (sound: extra instrumentation, never missing adjoints).

The default used when no analysis is requested marks every real assignment
live and every real variable differentiable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend import ast


@dataclass
class ActivitySet:
    """diff_vars holds variable names; live_stmts holds id()s of Assign nodes
    within one specific function object."""

    diff_vars: set[str] = field(default_factory=set)
    live_stmts: set[int] = field(default_factory=set)
    all_live: bool = False

    def is_diff(self, name: str) -> bool:
        return name in self.diff_vars

    def is_live(self, stmt: ast.Assign) -> bool:
        return self.all_live or id(stmt) in self.live_stmts


def _real_vars(fn: ast.FunctionDef) -> set[str]:
    return set(fn.real_variables())


def default_activity(fn: ast.FunctionDef) -> ActivitySet:
    """Mark all real assignments live and all real variables differentiable."""
    return ActivitySet(diff_vars=_real_vars(fn), all_live=True)


def _leaf_names(e: ast.Expr) -> set[str]:
    out: set[str] = set()

    def walk(node: ast.Expr) -> None:
        match node:
            case ast.Var(name=n):
                out.add(n)
            case ast.Index(name=n, index=ix):
                out.add(n)
                walk(ix)
            case ast.Neg(operand=op) | ast.Not(operand=op):
                walk(op)
            case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                walk(l)
                walk(r)
            case ast.Call(args=args):
                for a in args:
                    walk(a)
            case _:
                pass

    walk(e)
    return out


def _assignments(fn: ast.FunctionDef) -> list[ast.Assign]:
    out: list[ast.Assign] = []

    def walk(body: list[ast.Stmt]) -> None:
        for st in body:
            match st:
                case ast.Assign():
                    out.append(st)
                case ast.For(body=b) | ast.While(body=b):
                    walk(b)
                case ast.If(then=t, orelse=o):
                    walk(t)
                    walk(o)
                case _:
                    pass

    walk(fn.body)
    return out


def seed_outputs(fn: ast.FunctionDef) -> set[str]:
    """Default seed set: leaves of the return expression plus inout params."""
    seeds: set[str] = {p.name for p in fn.params if p.direction == "inout"}
    if fn.body and isinstance(fn.body[-1], ast.Return) and fn.body[-1].value is not None:
        seeds |= _leaf_names(fn.body[-1].value)
    return seeds


def analyze_activity(fn: ast.FunctionDef, seeds: set[str] | None = None) -> ActivitySet:
    """Reachability-based activity for an inlined function.

    diff_vars: real variables transitively varied by some real parameter
    (every param is varied by definition).  live_stmts: assignments whose
    target transitively feeds a seed output.
    """
    if seeds is None:
        seeds = seed_outputs(fn)
    assigns = _assignments(fn)
    real_vars = _real_vars(fn)
    int_like = {p.name for p in fn.params if isinstance(p.kind, ast.ScalarInt)}
    int_like |= {d.name for d in fn.locals if isinstance(d.kind, ast.ScalarInt)}

    # varied: forward closure from real params through assignments.
    varied = {p.name for p in fn.params if not isinstance(p.kind, ast.ScalarInt)}
    changed = True
    while changed:
        changed = False
        for st in assigns:
            tname = st.target.name  # type: ignore[union-attr]
            if tname in int_like or tname not in real_vars:
                continue
            if tname not in varied and (_leaf_names(st.value) & varied):
                varied.add(tname)
                changed = True

    # useful: backward closure from seeds through assignments.
    useful = set(seeds)
    changed = True
    while changed:
        changed = False
        for st in assigns:
            tname = st.target.name  # type: ignore[union-attr]
            if tname in useful:
                new = _leaf_names(st.value) - useful
                if new:
                    useful |= new
                    changed = True

    live = {id(st) for st in assigns if st.target.name in useful}  # type: ignore[union-attr]
    return ActivitySet(diff_vars=varied & real_vars, live_stmts=live)
