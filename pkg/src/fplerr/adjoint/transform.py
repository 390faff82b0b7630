"""Synthesis of error-estimated adjoint functions.

For each real assignment the emitted structure depends on the activity of
the statement and its target:

  live and diff:  forward `Push(ref); ref = expr`, backward `Pop(ref)`,
                  adjoint statements for expr, then AssignError;
  live, not diff: forward Push and assignment, backward Pop and AssignError
                  only (no adjoint statements, zero adjoint);
  not live, diff: no Push/Pop, but adjoint statements and AssignError.

A not-live assignment still gets Push/Pop unless skipping is provably safe
(target read nowhere else and assigned exactly once): without the restore,
partials of earlier statements could see the wrong value.  Integer
assignments are pushed/popped for state restoration but carry no adjoints or
hooks.  Loops reverse via re-evaluated bounds when those are loop-invariant,
and via recorded trip data otherwise; conditionals record the taken branch.
"""

from __future__ import annotations

from ..frontend import ast
from ..models.base import ErrorModel
from .activity import ActivitySet, analyze_activity, default_activity, seed_outputs
from .inline import TransformError, inline_function
from .ir import (
    SEED_VAR,
    AdjointFunction,
    BCond,
    BFinalize,
    BHook,
    BParamHook,
    BPop,
    BRevFor,
    BRevForDyn,
    BRevIf,
    BRevWhile,
    BSet,
    BSetElem,
    FAssign,
    FFor,
    FIf,
    FPush,
    FReturn,
    FWhile,
    adjoint_name,
)


def _r(e: ast.Expr) -> ast.Expr:
    e.ty = "real"
    return e


def _var(name: str) -> ast.Expr:
    return _r(ast.Var(name))


def _mul(a: ast.Expr, b: ast.Expr) -> ast.Expr:
    return _r(ast.Bin("*", a, b))


def _div(a: ast.Expr, b: ast.Expr) -> ast.Expr:
    return _r(ast.Bin("/", a, b))


def _add(a: ast.Expr, b: ast.Expr) -> ast.Expr:
    return _r(ast.Bin("+", a, b))


def _neg(a: ast.Expr) -> ast.Expr:
    return _r(ast.Neg(a))


def _call(f: str, args: list[ast.Expr]) -> ast.Expr:
    return _r(ast.Call(f, args))


def _num(v: float) -> ast.Expr:
    return _r(ast.Num(v))


def _has_user_call(fn: ast.FunctionDef) -> bool:
    found = False

    def walk_expr(e: ast.Expr) -> None:
        nonlocal found
        match e:
            case ast.Call(func=f, args=args):
                if f not in ast.BUILTINS:
                    found = True
                for a in args:
                    walk_expr(a)
            case ast.Neg(operand=op) | ast.Not(operand=op):
                walk_expr(op)
            case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                walk_expr(l)
                walk_expr(r)
            case ast.Index(index=ix):
                walk_expr(ix)
            case _:
                pass

    def walk(body: list[ast.Stmt]) -> None:
        for st in body:
            match st:
                case ast.Assign(target=t, value=v):
                    walk_expr(t)
                    walk_expr(v)
                case ast.Return(value=v):
                    if v is not None:
                        walk_expr(v)
                case ast.CallStmt():
                    nonlocal found
                    found = True
                case ast.For(lo=lo, hi=hi, body=b):
                    walk_expr(lo)
                    walk_expr(hi)
                    walk(b)
                case ast.While(cond=c, body=b):
                    walk_expr(c)
                    walk(b)
                case ast.If(cond=c, then=t, orelse=o):
                    walk_expr(c)
                    walk(t)
                    walk(o)

    walk(fn.body)
    return found


def prepare_function(fn: ast.FunctionDef, program: ast.Program | None) -> ast.FunctionDef:
    """Inline user calls if any; identity otherwise (preserving node ids so a
    caller-computed ActivitySet stays valid)."""
    if not _has_user_call(fn):
        return fn
    if program is None:
        raise TransformError(f"function '{fn.name}' calls user functions; a Program is required", fn.loc)
    return inline_function(program, fn)


class _Builder:
    def __init__(self, fn: ast.FunctionDef, activity: ActivitySet, emit_hooks: bool):
        self.fn = fn
        self.activity = activity
        self.emit_hooks = emit_hooks
        self.scratch: list[str] = []
        self.site = 0
        self.loop_count = 0
        self.marked_loops: dict[str, int] = {}
        self.var_kinds: dict[str, ast.VarKind] = {p.name: p.kind for p in fn.params}
        self.var_kinds.update({d.name: d.kind for d in fn.locals})
        self.assign_counts: dict[str, int] = {}
        self.read_counts: dict[str, int] = {}
        self._census(fn.body)

    # A name census backs the push-elision safety check for not-live stmts.
    def _census(self, body: list[ast.Stmt]) -> None:
        def reads(e: ast.Expr) -> None:
            match e:
                case ast.Var(name=n):
                    self.read_counts[n] = self.read_counts.get(n, 0) + 1
                case ast.Index(name=n, index=ix):
                    self.read_counts[n] = self.read_counts.get(n, 0) + 1
                    reads(ix)
                case ast.Neg(operand=op) | ast.Not(operand=op):
                    reads(op)
                case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                    reads(l)
                    reads(r)
                case ast.Call(args=args):
                    for a in args:
                        reads(a)
                case _:
                    pass

        for st in body:
            match st:
                case ast.Assign(target=t, value=v):
                    name = t.name  # type: ignore[union-attr]
                    self.assign_counts[name] = self.assign_counts.get(name, 0) + 1
                    if isinstance(t, ast.Index):
                        reads(t.index)
                    reads(v)
                case ast.Return(value=v):
                    if v is not None:
                        reads(v)
                case ast.For(lo=lo, hi=hi, body=b):
                    reads(lo)
                    reads(hi)
                    self._census(b)
                case ast.While(cond=c, body=b):
                    reads(c)
                    self._census(b)
                case ast.If(cond=c, then=t2, orelse=o):
                    reads(c)
                    self._census(t2)
                    self._census(o)
                case _:
                    pass

    def _new_scratch(self, prefix: str) -> str:
        name = f"{prefix}{self.site}"
        self.scratch.append(name)
        return name

    def _is_diff_target(self, target: ast.Expr) -> bool:
        return self.activity.is_diff(target.name)  # type: ignore[union-attr]

    # -- adjoint statement synthesis ---------------------------------------

    def _accum(self, e: ast.Expr, factor: ast.Expr, out: list) -> None:
        """Append `_d_<leaf> += factor * d(e)/d(leaf)` statements for each
        differentiable real leaf of `e`, evaluated at the restored state."""
        match e:
            case ast.Num() | ast.IntNum():
                return
            case ast.Var(name=n):
                if e.ty == "real" and self.activity.is_diff(n):
                    adj = adjoint_name(n)
                    out.append(BSet(adj, _add(_var(adj), factor)))
            case ast.Index(name=n, index=ix):
                if self.activity.is_diff(n):
                    adj = adjoint_name(n)
                    read = _r(ast.Index(adj, ix))
                    out.append(BSetElem(adj, ix, _add(read, factor)))
            case ast.Neg(operand=u):
                self._accum(u, _neg(factor), out)
            case ast.Bin(op="+", left=l, right=r):
                self._accum(l, factor, out)
                self._accum(r, factor, out)
            case ast.Bin(op="-", left=l, right=r):
                self._accum(l, factor, out)
                self._accum(r, _neg(factor), out)
            case ast.Bin(op="*", left=l, right=r):
                self._accum(l, _mul(factor, r), out)
                self._accum(r, _mul(factor, l), out)
            case ast.Bin(op="/", left=l, right=r):
                self._accum(l, _div(factor, r), out)
                self._accum(r, _div(_mul(_neg(factor), l), _mul(r, r)), out)
            case ast.Bin(op="%"):
                return  # integer-only by typing
            case ast.Call(func="sin", args=[u]):
                self._accum(u, _mul(factor, _call("cos", [u])), out)
            case ast.Call(func="cos", args=[u]):
                self._accum(u, _neg(_mul(factor, _call("sin", [u]))), out)
            case ast.Call(func="tan", args=[u]):
                self._accum(u, _div(factor, _mul(_call("cos", [u]), _call("cos", [u]))), out)
            case ast.Call(func="sqrt", args=[u]):
                self._accum(u, _div(factor, _mul(_num(2.0), _call("sqrt", [u]))), out)
            case ast.Call(func="exp", args=[u]):
                self._accum(u, _mul(factor, _call("exp", [u])), out)
            case ast.Call(func="log", args=[u]):
                self._accum(u, _div(factor, u), out)
            case ast.Call(func="pow", args=[u, v]):
                vm1 = ast.Bin("-", v, ast.IntNum(1))
                vm1.ty = v.ty
                self._accum(u, _mul(_mul(factor, v), _call("pow", [u, vm1])), out)
                if v.ty == "real":
                    self._accum(v, _mul(_mul(factor, _call("pow", [u, v])), _call("log", [u])), out)
            case ast.Call(func="fabs", args=[u]):
                self._accum(u, _mul(factor, _call("sign", [u])), out)
            case ast.Call(func="min", args=[u, v]):
                cond = ast.Cmp("<=", u, v)
                cond.ty = "bool"
                then: list = []
                els: list = []
                self._accum(u, factor, then)
                self._accum(v, factor, els)
                if then or els:
                    out.append(BCond(cond, then, els))
            case ast.Call(func="max", args=[u, v]):
                cond = ast.Cmp(">=", u, v)
                cond.ty = "bool"
                then = []
                els = []
                self._accum(u, factor, then)
                self._accum(v, factor, els)
                if then or els:
                    out.append(BCond(cond, then, els))
            case ast.Call(func=f):
                raise TransformError(f"cannot differentiate call to '{f}'", e.loc)
            case _:
                raise TransformError("cannot differentiate expression", e.loc)

    # -- per-statement transform ------------------------------------------------

    def _assign(self, st: ast.Assign) -> tuple[list, list]:
        target = st.target
        tname = target.name  # type: ignore[union-attr]
        kind = self.var_kinds.get(tname)
        is_int = isinstance(kind, ast.ScalarInt)

        if is_int:
            return [FPush(target), FAssign(st)], [BPop(target)]

        live = self.activity.is_live(st)
        diff = self._is_diff_target(target)
        # Eliding Push for a not-live assignment is only safe when no other
        # statement can observe the target's old value.
        safe_no_push = (
            self.read_counts.get(tname, 0) == 0 and self.assign_counts.get(tname, 0) == 1
        )
        push = live or not safe_no_push
        hook = self.emit_hooks

        # Neither live nor diff: outside rules S2-S4, no instrumentation
        # beyond the state restore the reversal may still need.
        if not live and not diff:
            fwd = ([FPush(target)] if push else []) + [FAssign(st)]
            return fwd, [BPop(target)] if push else []

        self.site += 1
        fwd: list = ([FPush(target)] if push else []) + [FAssign(st)]
        unit: list = []

        is_elem = isinstance(target, ast.Index)
        val_scratch = adj_scratch = None
        if hook:
            val_scratch = self._new_scratch("_t")
            src = _r(ast.Index(tname, target.index)) if is_elem else _var(tname)
            unit.append(BSet(val_scratch, src))
        if diff:
            adj_scratch = self._new_scratch("_a")
            adj = adjoint_name(tname)
            read = _r(ast.Index(adj, target.index)) if is_elem else _var(adj)
            unit.append(BSet(adj_scratch, read))
        if push:
            unit.append(BPop(target))
        if diff:
            adj = adjoint_name(tname)
            if is_elem:
                unit.append(BSetElem(adj, target.index, _num(0.0)))
            else:
                unit.append(BSet(adj, _num(0.0)))
            self._accum(st.value, _var(adj_scratch), unit)
        if hook:
            unit.append(BHook(tname, st.loc, val_scratch, adj_scratch))
        return fwd, unit

    def _loop_static(self, st: ast.For) -> bool:
        from .inline import _assigned_names

        mutated = _assigned_names(st.body)
        names = set()

        def leaves(e: ast.Expr) -> None:
            match e:
                case ast.Var(name=n):
                    names.add(n)
                case ast.Index(name=n, index=ix):
                    names.add(n)
                    leaves(ix)
                case ast.Neg(operand=op):
                    leaves(op)
                case ast.Bin(left=l, right=r):
                    leaves(l)
                    leaves(r)
                case ast.Call(args=args):
                    for a in args:
                        leaves(a)
                case _:
                    pass

        leaves(st.lo)
        leaves(st.hi)
        return not (names & mutated)

    def sweep(self, stmts: list[ast.Stmt], top: bool = False) -> tuple[list, list]:
        fwd: list = []
        bwd_units: list[list] = []
        for st in stmts:
            match st:
                case ast.Assign():
                    f, b = self._assign(st)
                case ast.For(index=i, lo=lo, hi=hi, body=body):
                    self.loop_count += 1
                    lid = self.loop_count
                    if top:
                        self.marked_loops[i] = lid
                    fb, bb = self.sweep(body)
                    if self._loop_static(st):
                        f = [FFor(i, lo, hi, fb, True, lid)]
                        b = [BRevFor(i, lo, hi, bb, lid)]
                    else:
                        f = [FFor(i, lo, hi, fb, False, lid)]
                        b = [BRevForDyn(i, bb, lid)]
                case ast.While(cond=c, body=body):
                    self.loop_count += 1
                    lid = self.loop_count
                    fb, bb = self.sweep(body)
                    f = [FWhile(c, fb, lid)]
                    b = [BRevWhile(bb, lid)]
                case ast.If(cond=c, then=t, orelse=o):
                    ft, bt = self.sweep(t)
                    fe, be = self.sweep(o)
                    f = [FIf(c, ft, fe)]
                    b = [BRevIf(bt, be)]
                case ast.Return(value=v):
                    f = [FReturn(v)]
                    b = []
                    if v is not None:
                        self._accum(v, _var(SEED_VAR), b)
                case ast.CallStmt():
                    raise TransformError("user calls must be inlined before transform", st.loc)
                case _:
                    raise TransformError("unsupported statement", st.loc)
            fwd.extend(f)
            bwd_units.append(b)
        bwd = [op for unit in reversed(bwd_units) for op in unit]
        return fwd, bwd


def transform(
    fn: ast.FunctionDef,
    model: ErrorModel,
    activity: ActivitySet | str | None = None,
    program: ast.Program | None = None,
    seeds: set[str] | None = None,
) -> AdjointFunction:
    """Synthesize the error-estimated adjoint of a type-checked function.

    `activity` may be None (all real assignments live and diff), the string
    "analyze" (reachability analysis on the inlined body), or an explicit
    ActivitySet built against the inlined function.
    """
    inlined = prepare_function(fn, program)
    if activity is None:
        act = default_activity(inlined)
    elif activity == "analyze":
        act = analyze_activity(inlined, seeds if seeds is not None else seed_outputs(inlined))
    elif isinstance(activity, ActivitySet):
        act = activity
    else:
        raise TransformError(f"bad activity argument {activity!r}", fn.loc)

    builder = _Builder(inlined, act, model.emits_hooks)
    fwd, bwd = builder.sweep(inlined.body, top=True)

    diff_params = [
        p.name
        for p in inlined.params
        if not isinstance(p.kind, ast.ScalarInt) and act.is_diff(p.name)
    ]
    real_params = [p for p in inlined.params if not isinstance(p.kind, ast.ScalarInt)]
    if model.emits_hooks:
        for p in real_params:
            bwd.append(BParamHook(p.name, p.loc))
    bwd.append(BFinalize())

    adjoint_vars = {v: adjoint_name(v) for v in sorted(act.diff_vars)}
    scratch = [SEED_VAR] + builder.scratch

    return AdjointFunction(
        name=inlined.name + "_ee",
        source_name=inlined.name,
        fn=inlined,
        diff_params=diff_params,
        grad_outputs={p: adjoint_name(p) for p in diff_params},
        error_output="_fp_error",
        adjoint_vars=adjoint_vars,
        scratch=scratch,
        fwd=fwd,
        bwd=bwd,
        model_id=model.id,
        marked_loops=builder.marked_loops,
    )
