"""User-function call inlining.

The transform differentiates a single flattened function, so user calls are
expanded at their call sites first (the call graph is acyclic, making this
terminating).  Conventions:

  - scalar `in` arguments are hoisted into fresh locals (`_i<k>_<param>`):
    the store is a real rounding event and is instrumented like any other;
  - scalar `inout` arguments hoist in and copy back after the body;
  - array arguments alias the caller's array (no copy);
  - int arguments are substituted as expressions when provably stable
    (literals and never-assigned caller names), else hoisted to an int temp;
  - a callee return of a bare variable aliases that variable, anything else
    is hoisted into `_i<k>_ret`.

Calls inside `while` conditions are rejected: the hoisted argument stores
would not re-execute per iteration.
"""

from __future__ import annotations

import copy

from ..frontend import ast
from ..frontend.typecheck import TypecheckError, typecheck


class TransformError(ast.FplError):
    """Unsupported construct reported with its source location."""

    def __init__(self, message: str, loc: ast.Loc):
        self.loc = loc
        super().__init__(f"{loc}: {message}")


def _assigned_names(stmts: list[ast.Stmt]) -> set[str]:
    out: set[str] = set()

    def walk(body: list[ast.Stmt]) -> None:
        for st in body:
            match st:
                case ast.Assign(target=ast.Var(name=n)) | ast.Assign(target=ast.Index(name=n)):
                    out.add(n)
                case ast.For(body=b):
                    walk(b)
                case ast.While(body=b):
                    walk(b)
                case ast.If(then=t, orelse=o):
                    walk(t)
                    walk(o)
                case _:
                    pass

    walk(stmts)
    return out


def _is_stable_int_arg(e: ast.Expr, mutated: set[str]) -> bool:
    match e:
        case ast.IntNum():
            return True
        case ast.Var(name=n):
            return n not in mutated
        case ast.Neg(operand=op):
            return _is_stable_int_arg(op, mutated)
        case ast.Bin(left=l, right=r):
            return _is_stable_int_arg(l, mutated) and _is_stable_int_arg(r, mutated)
        case _:
            return False


class _Renamer:
    """Clones a callee body applying name substitutions.

    `mapping` sends a callee name either to a replacement name (str) or to a
    caller expression substituted in place (stable int arguments).
    """

    def __init__(self, mapping: dict[str, str | ast.Expr]):
        self.mapping = mapping

    def expr(self, e: ast.Expr) -> ast.Expr:
        match e:
            case ast.Var(name=n):
                repl = self.mapping.get(n)
                if repl is None:
                    return copy.copy(e)
                if isinstance(repl, str):
                    out = copy.copy(e)
                    out.name = repl
                    return out
                return copy.deepcopy(repl)
            case ast.Index(name=n, index=ix):
                repl = self.mapping.get(n, n)
                if not isinstance(repl, str):
                    raise TransformError("array name substituted by expression", e.loc)
                out = copy.copy(e)
                out.name = repl
                out.index = self.expr(ix)
                return out
            case ast.Neg(operand=op) | ast.Not(operand=op):
                out = copy.copy(e)
                out.operand = self.expr(op)
                return out
            case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                out = copy.copy(e)
                out.left = self.expr(l)
                out.right = self.expr(r)
                return out
            case ast.Call(args=args):
                out = copy.copy(e)
                out.args = [self.expr(a) for a in args]
                return out
            case _:
                return copy.copy(e)

    def stmt(self, s: ast.Stmt) -> ast.Stmt:
        match s:
            case ast.Assign(target=t, value=v):
                return ast.Assign(self.expr(t), self.expr(v), loc=s.loc)
            case ast.Return(value=v):
                return ast.Return(None if v is None else self.expr(v), loc=s.loc)
            case ast.CallStmt(call=c):
                return ast.CallStmt(self.expr(c), loc=s.loc)
            case ast.For(index=i, lo=lo, hi=hi, body=b):
                new_index = self.mapping.get(i, i)
                assert isinstance(new_index, str)
                return ast.For(new_index, self.expr(lo), self.expr(hi), [self.stmt(x) for x in b], loc=s.loc)
            case ast.While(cond=c, body=b):
                return ast.While(self.expr(c), [self.stmt(x) for x in b], loc=s.loc)
            case ast.If(cond=c, then=t, orelse=o):
                return ast.If(self.expr(c), [self.stmt(x) for x in t], [self.stmt(x) for x in o], loc=s.loc)
            case _:
                raise TransformError("unsupported statement", s.loc)


def _collect_loop_indices(stmts: list[ast.Stmt]) -> list[str]:
    out: list[str] = []

    def walk(body: list[ast.Stmt]) -> None:
        for st in body:
            match st:
                case ast.For(index=i, body=b):
                    out.append(i)
                    walk(b)
                case ast.While(body=b):
                    walk(b)
                case ast.If(then=t, orelse=o):
                    walk(t)
                    walk(o)
                case _:
                    pass

    walk(stmts)
    return out


class Inliner:
    def __init__(self, program: ast.Program, caller: ast.FunctionDef):
        self.program = program
        self.counter = 0
        self.new_locals: list[ast.VarDecl] = []
        self.caller_mutated = _assigned_names(caller.body)

    def _fresh_prefix(self) -> str:
        k = self.counter
        self.counter += 1
        return f"_i{k}_"

    # -- expression rewriting -------------------------------------------------

    def _has_user_call(self, e: ast.Expr) -> bool:
        match e:
            case ast.Call(func=f, args=args):
                if f not in ast.BUILTINS:
                    return True
                return any(self._has_user_call(a) for a in args)
            case ast.Neg(operand=op) | ast.Not(operand=op):
                return self._has_user_call(op)
            case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                return self._has_user_call(l) or self._has_user_call(r)
            case ast.Index(index=ix):
                return self._has_user_call(ix)
            case _:
                return False

    def rewrite_expr(self, e: ast.Expr, pending: list[ast.Stmt]) -> ast.Expr:
        match e:
            case ast.Call(func=f, args=args) if f not in ast.BUILTINS:
                new_args = [self.rewrite_expr(a, pending) for a in args]
                call = copy.copy(e)
                call.args = new_args
                return self.expand_call(call, pending)
            case ast.Call(args=args):
                out = copy.copy(e)
                out.args = [self.rewrite_expr(a, pending) for a in args]
                return out
            case ast.Neg(operand=op) | ast.Not(operand=op):
                out = copy.copy(e)
                out.operand = self.rewrite_expr(op, pending)
                return out
            case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                out = copy.copy(e)
                out.left = self.rewrite_expr(l, pending)
                out.right = self.rewrite_expr(r, pending)
                return out
            case ast.Index(index=ix):
                out = copy.copy(e)
                out.index = self.rewrite_expr(ix, pending)
                return out
            case _:
                return e

    # -- call expansion --------------------------------------------------------

    def expand_call(self, call: ast.Call, pending: list[ast.Stmt]) -> ast.Expr:
        callee = self.program.function(call.func)
        prefix = self._fresh_prefix()
        mapping: dict[str, str | ast.Expr] = {}
        copy_backs: list[ast.Stmt] = []

        for p, arg in zip(callee.params, call.args):
            if isinstance(p.kind, ast.ArrayReal):
                assert isinstance(arg, ast.Var)
                mapping[p.name] = arg.name
            elif isinstance(p.kind, ast.ScalarInt):
                if _is_stable_int_arg(arg, self.caller_mutated):
                    mapping[p.name] = arg
                else:
                    temp = prefix + p.name
                    self.new_locals.append(ast.VarDecl(temp, ast.INT, loc=p.loc))
                    tv = ast.Var(temp, loc=arg.loc)
                    tv.ty = "int"
                    pending.append(ast.Assign(tv, arg, loc=arg.loc))
                    mapping[p.name] = temp
                    if _param_sizes_arrays(callee, p.name):
                        raise TransformError(
                            f"int argument for '{p.name}' must be a stable expression "
                            f"(it sizes arrays in '{callee.name}')",
                            arg.loc,
                        )
            else:
                temp = prefix + p.name
                self.new_locals.append(ast.VarDecl(temp, ast.REAL, loc=p.loc))
                tv = ast.Var(temp, loc=arg.loc)
                tv.ty = "real"
                pending.append(ast.Assign(tv, arg, loc=arg.loc))
                mapping[p.name] = temp
                if p.direction == "inout":
                    assert isinstance(arg, ast.Var)
                    back = ast.Var(arg.name, loc=arg.loc)
                    back.ty = "real"
                    src = ast.Var(temp, loc=arg.loc)
                    src.ty = "real"
                    copy_backs.append(ast.Assign(back, src, loc=arg.loc))

        for d in callee.locals:
            mapping[d.name] = prefix + d.name
        for idx in _collect_loop_indices(callee.body):
            mapping.setdefault(idx, prefix + idx)

        renamer = _Renamer(mapping)
        body = [renamer.stmt(s) for s in callee.body]

        # Rename array-length expressions in the callee's local declarations.
        for d in callee.locals:
            kind = d.kind
            if isinstance(kind, ast.ArrayReal):
                kind = ast.ArrayReal(renamer.expr(kind.length))
            self.new_locals.append(ast.VarDecl(mapping[d.name], kind, loc=d.loc))

        result: ast.Expr | None = None
        if body and isinstance(body[-1], ast.Return):
            ret = body.pop()
            if ret.value is not None:
                if isinstance(ret.value, ast.Var):
                    result = ret.value
                else:
                    temp = prefix + "ret"
                    self.new_locals.append(ast.VarDecl(temp, ast.REAL, loc=ret.loc))
                    tv = ast.Var(temp, loc=ret.loc)
                    tv.ty = "real"
                    body.append(ast.Assign(tv, ret.value, loc=ret.loc))
                    result = ast.Var(temp, loc=ret.loc)
                    result.ty = "real"

        # Nested calls inside the spliced body expand recursively.
        pending.extend(self.rewrite_stmts(body))
        pending.extend(copy_backs)

        if callee.return_kind == "real":
            assert result is not None
            return result
        return ast.Num(0.0, loc=call.loc)  # void call used as statement only

    # -- statement rewriting -----------------------------------------------------

    def rewrite_stmts(self, stmts: list[ast.Stmt]) -> list[ast.Stmt]:
        out: list[ast.Stmt] = []
        for st in stmts:
            pending: list[ast.Stmt] = []
            match st:
                case ast.Assign(target=t, value=v):
                    new_v = self.rewrite_expr(v, pending)
                    new_t = self.rewrite_expr(t, pending)
                    out.extend(pending)
                    out.append(ast.Assign(new_t, new_v, loc=st.loc))
                case ast.Return(value=None):
                    out.append(st)
                case ast.Return(value=v):
                    new_v = self.rewrite_expr(v, pending)
                    out.extend(pending)
                    out.append(ast.Return(new_v, loc=st.loc))
                case ast.CallStmt(call=c):
                    new_args = [self.rewrite_expr(a, pending) for a in c.args]
                    call = copy.copy(c)
                    call.args = new_args
                    self.expand_call(call, pending)
                    out.extend(pending)
                case ast.For(index=i, lo=lo, hi=hi, body=b):
                    out.append(ast.For(i, lo, hi, self.rewrite_stmts(b), loc=st.loc))
                case ast.While(cond=c, body=b):
                    if self._has_user_call(c):
                        raise TransformError("user-function calls in while conditions are unsupported", st.loc)
                    out.append(ast.While(c, self.rewrite_stmts(b), loc=st.loc))
                case ast.If(cond=c, then=t, orelse=o):
                    new_c = self.rewrite_expr(c, pending)
                    out.extend(pending)
                    out.append(ast.If(new_c, self.rewrite_stmts(t), self.rewrite_stmts(o), loc=st.loc))
                case _:
                    raise TransformError("unsupported statement", st.loc)
        return out


def _param_sizes_arrays(fn: ast.FunctionDef, param: str) -> bool:
    def refs(e: ast.Expr) -> bool:
        match e:
            case ast.Var(name=n):
                return n == param
            case ast.Neg(operand=op):
                return refs(op)
            case ast.Bin(left=l, right=r):
                return refs(l) or refs(r)
            case _:
                return False

    return any(isinstance(d.kind, ast.ArrayReal) and refs(d.kind.length) for d in fn.locals)


def inline_function(program: ast.Program, fn: ast.FunctionDef) -> ast.FunctionDef:
    """Return a copy of `fn` with every user call expanded.

    The result is re-type-checked (inlining bugs surface as assertion
    failures, not downstream miscompiles).
    """
    inliner = Inliner(program, fn)
    body = inliner.rewrite_stmts(fn.body)
    out = ast.FunctionDef(
        fn.name,
        fn.params,
        fn.return_kind,
        list(fn.locals) + inliner.new_locals,
        body,
        loc=fn.loc,
    )
    try:
        typecheck(ast.Program([out], loc=fn.loc))
    except TypecheckError as exc:  # pragma: no cover - internal consistency
        raise AssertionError(f"inlining produced an ill-typed function:\n{exc}") from exc
    return out
