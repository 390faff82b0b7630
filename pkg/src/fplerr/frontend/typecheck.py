"""Type checker: annotates expressions with "real"/"int"/"bool" in place.

The checked program (a TypedProgram) is the same object graph with `ty`
fields filled in.  All diagnostics for a run are collected and reported
together, in source order, so identical input yields an identical list.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import ast
from .ast import BUILTINS, FplError, Loc


@dataclass(frozen=True)
class Diagnostic:
    loc: Loc
    message: str

    def __str__(self) -> str:
        return f"{self.loc}: {self.message}"


class TypecheckError(FplError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


TypedProgram = ast.Program
TypedFunction = ast.FunctionDef


class _FunctionChecker:
    def __init__(self, program: ast.Program, fn: ast.FunctionDef, diags: list[Diagnostic]):
        self.program = program
        self.fn = fn
        self.diags = diags
        self.vars: dict[str, ast.VarKind] = {}
        self.loop_indices: list[str] = []

    def err(self, loc: Loc, message: str) -> None:
        self.diags.append(Diagnostic(loc, message))

    # -- declarations --------------------------------------------------------

    def check(self) -> None:
        fn = self.fn
        for p in fn.params:
            if p.name in self.vars:
                self.err(p.loc, f"duplicate parameter '{p.name}'")
            self.vars[p.name] = p.kind
            if p.direction == "inout" and isinstance(p.kind, ast.ScalarInt):
                self.err(p.loc, "inout parameters must be real-valued")
        for p in fn.params:
            if isinstance(p.kind, ast.ArrayReal):
                self._check_length(p.kind.length)
        for d in fn.locals:
            if d.name in self.vars:
                self.err(d.loc, f"duplicate declaration of '{d.name}'")
            self.vars[d.name] = d.kind
            if isinstance(d.kind, ast.ArrayReal):
                self._check_length(d.kind.length)
        self._check_returns()
        for st in fn.body:
            self.stmt(st)

    def _check_length(self, e: ast.Expr) -> None:
        params = {p.name: p.kind for p in self.fn.params}
        for name in _referenced_names(e):
            kind = params.get(name)
            if kind is None:
                self.err(e.loc, f"array length may only reference int parameters, not '{name}'")
            elif not isinstance(kind, ast.ScalarInt):
                self.err(e.loc, f"array length must use int parameters, '{name}' is not int")
        if self.expr(e) != "int":
            self.err(e.loc, "array length must be an integer expression")

    def _check_returns(self) -> None:
        fn = self.fn

        def walk(stmts: list[ast.Stmt], top: bool) -> None:
            for k, st in enumerate(stmts):
                match st:
                    case ast.Return():
                        is_last = top and k == len(stmts) - 1
                        if not is_last:
                            self.err(st.loc, "return must be the final statement of the function")
                    case ast.For(body=b) | ast.While(body=b):
                        walk(b, False)
                    case ast.If(then=t, orelse=o):
                        walk(t, False)
                        walk(o, False)
                    case _:
                        pass

        walk(fn.body, True)
        if fn.return_kind == "real":
            last = fn.body[-1] if fn.body else None
            if not isinstance(last, ast.Return) or last.value is None:
                self.err(fn.loc, f"function '{fn.name}' must end with 'return <expr>'")

    # -- statements ----------------------------------------------------------

    def stmt(self, st: ast.Stmt) -> None:
        match st:
            case ast.Assign(target=t, value=v):
                self._check_assign(t, v, st.loc)
            case ast.Return(value=None):
                if self.fn.return_kind == "real":
                    self.err(st.loc, "missing return value")
            case ast.Return(value=v):
                ty = self.expr(v)
                if self.fn.return_kind == "void":
                    self.err(st.loc, "void function cannot return a value")
                elif ty not in ("real", "int"):
                    self.err(v.loc, "return value must be numeric")
            case ast.For(index=i, lo=lo, hi=hi, body=body):
                if self.expr(lo) != "int":
                    self.err(lo.loc, "loop bound must be an integer expression")
                if self.expr(hi) != "int":
                    self.err(hi.loc, "loop bound must be an integer expression")
                if i in self.vars or i in self.loop_indices:
                    self.err(st.loc, f"loop index '{i}' shadows an existing name")
                self.loop_indices.append(i)
                for s in body:
                    self.stmt(s)
                self.loop_indices.pop()
            case ast.While(cond=c, body=body):
                if self.expr(c) != "bool":
                    self.err(c.loc, "while condition must be boolean")
                for s in body:
                    self.stmt(s)
            case ast.If(cond=c, then=then, orelse=orelse):
                if self.expr(c) != "bool":
                    self.err(c.loc, "if condition must be boolean")
                for s in then:
                    self.stmt(s)
                for s in orelse:
                    self.stmt(s)
            case ast.CallStmt(call=c):
                self._check_call(c, statement=True)
            case _:
                raise TypeError(f"unknown statement {st!r}")

    def _check_assign(self, target: ast.Expr, value: ast.Expr, loc: Loc) -> None:
        vty = self.expr(value)
        match target:
            case ast.Var(name=n):
                if n in self.loop_indices:
                    self.err(loc, f"cannot assign to loop index '{n}'")
                    return
                kind = self.vars.get(n)
                if kind is None:
                    self.err(target.loc, f"unknown identifier '{n}'")
                    return
                if isinstance(kind, ast.ArrayReal):
                    self.err(loc, f"cannot assign whole array '{n}'")
                elif isinstance(kind, ast.ScalarInt):
                    target.ty = "int"
                    if vty != "int":
                        self.err(value.loc, "cannot assign a non-integer to an int variable")
                else:
                    target.ty = "real"
                    if vty == "bool":
                        self.err(value.loc, "boolean value used in arithmetic position")
            case ast.Index(name=n, index=ix):
                kind = self.vars.get(n)
                if kind is None:
                    self.err(target.loc, f"unknown identifier '{n}'")
                elif not isinstance(kind, ast.ArrayReal):
                    self.err(target.loc, f"'{n}' is not an array")
                if self.expr(ix) != "int":
                    self.err(ix.loc, "array index must be an integer expression")
                target.ty = "real"
                if vty == "bool":
                    self.err(value.loc, "boolean value used in arithmetic position")
            case _:
                self.err(loc, "assignment target must be a variable or array element")

    # -- expressions -----------------------------------------------------------

    def expr(self, e: ast.Expr) -> str:
        ty = self._expr(e)
        e.ty = ty
        return ty

    def _expr(self, e: ast.Expr) -> str:
        match e:
            case ast.Num():
                return "real"
            case ast.IntNum():
                return "int"
            case ast.Var(name=n):
                if n in self.loop_indices:
                    return "int"
                kind = self.vars.get(n)
                if kind is None:
                    self.err(e.loc, f"unknown identifier '{n}'")
                    return "real"
                if isinstance(kind, ast.ScalarInt):
                    return "int"
                if isinstance(kind, ast.ArrayReal):
                    return "array"
                return "real"
            case ast.Index(name=n, index=ix):
                kind = self.vars.get(n)
                if n in self.loop_indices or isinstance(kind, (ast.ScalarReal, ast.ScalarInt)):
                    self.err(e.loc, f"'{n}' is not an array")
                elif kind is None:
                    self.err(e.loc, f"unknown identifier '{n}'")
                if self.expr(ix) != "int":
                    self.err(ix.loc, "array index must be an integer expression")
                return "real"
            case ast.Neg(operand=op):
                ty = self.expr(op)
                if ty == "bool":
                    self.err(e.loc, "boolean value used in arithmetic position")
                    return "real"
                return ty
            case ast.Bin(op=o, left=l, right=r):
                lt, rt = self.expr(l), self.expr(r)
                for side, ty in ((l, lt), (r, rt)):
                    if ty == "bool":
                        self.err(side.loc, "boolean value used in arithmetic position")
                    elif ty == "array":
                        self.err(side.loc, "array used in scalar position")
                if o == "%":
                    if lt != "int" or rt != "int":
                        self.err(e.loc, "'%' requires integer operands")
                    return "int"
                return "int" if lt == "int" and rt == "int" else "real"
            case ast.Cmp(left=l, right=r):
                for side in (l, r):
                    ty = self.expr(side)
                    if ty not in ("real", "int"):
                        self.err(side.loc, "comparison operands must be numeric")
                return "bool"
            case ast.BoolOp(left=l, right=r):
                for side in (l, r):
                    if self.expr(side) != "bool":
                        self.err(side.loc, "logical operands must be boolean")
                return "bool"
            case ast.Not(operand=op):
                if self.expr(op) != "bool":
                    self.err(op.loc, "'!' requires a boolean operand")
                return "bool"
            case ast.Call():
                return self._check_call(e, statement=False)
            case _:
                raise TypeError(f"unknown expression {e!r}")

    def _check_call(self, c: ast.Call, statement: bool) -> str:
        if c.func in BUILTINS:
            want = BUILTINS[c.func]
            if len(c.args) != want:
                self.err(c.loc, f"'{c.func}' expects {want} argument(s), got {len(c.args)}")
            for a in c.args:
                if self.expr(a) not in ("real", "int"):
                    self.err(a.loc, f"argument of '{c.func}' must be numeric")
            if statement:
                self.err(c.loc, f"builtin '{c.func}' cannot be used as a statement")
            return "real"

        callee = next((f for f in self.program.functions if f.name == c.func), None)
        if callee is None:
            self.err(c.loc, f"unknown identifier '{c.func}'")
            return "real"
        if statement and callee.return_kind != "void":
            self.err(c.loc, f"result of '{c.func}' cannot be discarded")
        if not statement and callee.return_kind != "real":
            self.err(c.loc, f"void function '{c.func}' used in an expression")
        if len(c.args) != len(callee.params):
            self.err(c.loc, f"'{c.func}' expects {len(callee.params)} argument(s), got {len(c.args)}")
        for a, p in zip(c.args, callee.params):
            aty = self.expr(a)
            if isinstance(p.kind, ast.ArrayReal):
                if not (isinstance(a, ast.Var) and aty == "array"):
                    self.err(a.loc, f"argument for array parameter '{p.name}' must name an array variable")
            elif isinstance(p.kind, ast.ScalarInt):
                if aty != "int":
                    self.err(a.loc, f"argument for int parameter '{p.name}' must be an integer expression")
            else:
                if aty not in ("real", "int"):
                    self.err(a.loc, f"argument for real parameter '{p.name}' must be numeric")
                if p.direction == "inout" and not isinstance(a, ast.Var):
                    self.err(a.loc, f"argument for inout parameter '{p.name}' must be a variable")
        return "real" if callee.return_kind == "real" else "void"


def _referenced_names(e: ast.Expr) -> list[str]:
    out: list[str] = []

    def walk(node: ast.Expr) -> None:
        match node:
            case ast.Var(name=n):
                out.append(n)
            case ast.Index(name=n, index=ix):
                out.append(n)
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


def _check_acyclic(program: ast.Program, diags: list[Diagnostic]) -> None:
    calls: dict[str, list[tuple[str, Loc]]] = {f.name: [] for f in program.functions}

    def collect(e_or_s, fn_name: str) -> None:
        match e_or_s:
            case ast.Call(func=g, args=args, loc=loc):
                if g in calls:
                    calls[fn_name].append((g, loc))
                for a in args:
                    collect(a, fn_name)
            case ast.Assign(target=t, value=v):
                collect(t, fn_name)
                collect(v, fn_name)
            case ast.Return(value=v):
                if v is not None:
                    collect(v, fn_name)
            case ast.CallStmt(call=c):
                collect(c, fn_name)
            case ast.For(lo=lo, hi=hi, body=b):
                collect(lo, fn_name)
                collect(hi, fn_name)
                for s in b:
                    collect(s, fn_name)
            case ast.While(cond=c, body=b):
                collect(c, fn_name)
                for s in b:
                    collect(s, fn_name)
            case ast.If(cond=c, then=t, orelse=o):
                collect(c, fn_name)
                for s in t + o:
                    collect(s, fn_name)
            case ast.Neg(operand=op) | ast.Not(operand=op):
                collect(op, fn_name)
            case ast.Bin(left=l, right=r) | ast.Cmp(left=l, right=r) | ast.BoolOp(left=l, right=r):
                collect(l, fn_name)
                collect(r, fn_name)
            case ast.Index(index=ix):
                collect(ix, fn_name)
            case _:
                pass

    for f in program.functions:
        for s in f.body:
            collect(s, f.name)

    # Iterative DFS cycle check; report the first back edge in source order.
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in calls}

    def visit(name: str) -> None:
        color[name] = GRAY
        for callee, loc in calls[name]:
            if color[callee] == GRAY:
                diags.append(Diagnostic(loc, f"recursive call to '{callee}'"))
            elif color[callee] == WHITE:
                visit(callee)
        color[name] = BLACK

    for f in program.functions:
        if color[f.name] == WHITE:
            visit(f.name)


def typecheck(program: ast.Program) -> TypedProgram:
    """Check and annotate a parsed program; raises TypecheckError on failure."""
    diags: list[Diagnostic] = []
    _check_acyclic(program, diags)
    if not diags:
        for fn in program.functions:
            _FunctionChecker(program, fn, diags).check()
    if diags:
        raise TypecheckError(diags)
    return program
