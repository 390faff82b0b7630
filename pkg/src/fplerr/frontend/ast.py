"""AST node definitions for FPL, a small imperative language for numeric kernels.

All nodes carry a source location (`loc`) that is excluded from equality, so
two parses of the same text compare structurally equal.  The type checker
annotates expression nodes in place via the `ty` field ("real", "int" or
"bool"), also excluded from equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Loc:
    """Line/column position, 1-indexed line, 1-indexed column."""

    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NO_LOC = Loc(0, 0)


class FplError(Exception):
    """Base class for all errors raised by the toolchain."""


class SourceError(FplError):
    """Error anchored at a source location, with a one-line excerpt."""

    def __init__(self, message: str, loc: Loc, excerpt: str = ""):
        self.message = message
        self.loc = loc
        self.excerpt = excerpt
        text = f"{loc}: {message}"
        if excerpt:
            text += "\n  " + excerpt + "\n  " + " " * max(loc.col - 1, 0) + "^"
        super().__init__(text)


class ParseError(SourceError):
    pass


# ---------------------------------------------------------------------------
# Variable kinds.  Expressions have scalar types only; arrays appear as
# variables of array kind read/written through an index.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarReal:
    def __str__(self) -> str:
        return "real"


@dataclass(frozen=True)
class ScalarInt:
    def __str__(self) -> str:
        return "int"


@dataclass
class ArrayReal:
    """Real array; `length` is an int expression over literals and params."""

    length: Expr

    def __str__(self) -> str:
        from .pretty import format_expr

        return f"real[{format_expr(self.length)}]"


VarKind = ScalarReal | ScalarInt | ArrayReal

REAL = ScalarReal()
INT = ScalarInt()


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass
class Expr:
    pass


@dataclass
class Num(Expr):
    """Real literal, parsed to the nearest binary64 value."""

    value: float
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class IntNum(Expr):
    value: int
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Var(Expr):
    name: str
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Index(Expr):
    """Array element read `name[index]`."""

    name: str
    index: Expr
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Neg(Expr):
    operand: Expr
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Bin(Expr):
    """Arithmetic binary op; `op` is one of + - * / %."""

    op: str
    left: Expr
    right: Expr
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Cmp(Expr):
    """Comparison, boolean-valued; `op` is one of == != < <= > >=."""

    op: str
    left: Expr
    right: Expr
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class BoolOp(Expr):
    """`&&` or `||` over boolean operands."""

    op: str
    left: Expr
    right: Expr
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Not(Expr):
    operand: Expr
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


@dataclass
class Call(Expr):
    """Builtin or user-function call."""

    func: str
    args: list[Expr]
    loc: Loc = field(default=NO_LOC, compare=False)
    ty: str | None = field(default=None, compare=False)


# Builtins available to user programs.  `sign` and `select` additionally exist
# as internal intrinsics in generated adjoint code and are rejected here.
BUILTINS: dict[str, int] = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "sqrt": 1,
    "exp": 1,
    "log": 1,
    "pow": 2,
    "fabs": 1,
    "min": 2,
    "max": 2,
}


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass
class Stmt:
    pass


@dataclass
class Assign(Stmt):
    """`x = e` or `a[i] = e`; target is Var or Index."""

    target: Expr
    value: Expr
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class For(Stmt):
    """`for i in lo..hi { body }` iterating i = lo, ..., hi-1.

    Bounds are evaluated once on entry; the index is integer, scoped to the
    loop, and not assignable in the body.
    """

    index: str
    lo: Expr
    hi: Expr
    body: list[Stmt]
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class While(Stmt):
    cond: Expr
    body: list[Stmt]
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class If(Stmt):
    cond: Expr
    then: list[Stmt]
    orelse: list[Stmt]
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class Return(Stmt):
    value: Expr | None
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class CallStmt(Stmt):
    call: Call
    loc: Loc = field(default=NO_LOC, compare=False)


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------


@dataclass
class Param:
    name: str
    kind: VarKind
    direction: str = "in"  # "in" | "inout"
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class VarDecl:
    name: str
    kind: VarKind
    loc: Loc = field(default=NO_LOC, compare=False)


@dataclass
class FunctionDef:
    """One FPL function: params, `real` or `void` return kind, locals, body.

    Invariants (enforced by the type checker):
      - every referenced identifier is a param, local, loop index or builtin;
      - a `real` function ends with `return <expr>` and returns nowhere else;
      - loop indices are not assignable and do not shadow other names.
    """

    name: str
    params: list[Param]
    return_kind: str  # "real" | "void"
    locals: list[VarDecl]
    body: list[Stmt]
    loc: Loc = field(default=NO_LOC, compare=False)

    def real_variables(self) -> list[str]:
        """Declared real-valued variables (params then locals), in order."""
        names = [p.name for p in self.params if not isinstance(p.kind, ScalarInt)]
        names += [d.name for d in self.locals if not isinstance(d.kind, ScalarInt)]
        return names


@dataclass
class Program:
    """A parsed FPL compilation unit; function names are unique and the
    user-function call graph is acyclic."""

    functions: list[FunctionDef]
    loc: Loc = field(default=NO_LOC, compare=False)

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)
