"""Canonical pretty-printer; parse(pretty(p)) is structurally equal to p."""

from __future__ import annotations

from . import ast

# Higher binds tighter.  Comparisons are non-associative, so operands at the
# same level get parenthesized.
_PREC_OR = 1
_PREC_AND = 2
_PREC_CMP = 3
_PREC_ADD = 4
_PREC_MUL = 5
_PREC_UNARY = 6
_PREC_ATOM = 7


def _num_repr(v: float) -> str:
    # repr() of a float round-trips exactly; ensure it still lexes as a real.
    s = repr(v)
    if "e" not in s and "E" not in s and "." not in s and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def format_expr(e: ast.Expr, parent_prec: int = 0, right_side: bool = False) -> str:
    match e:
        case ast.Num(value=v):
            return _num_repr(v)
        case ast.IntNum(value=v):
            return str(v)
        case ast.Var(name=n):
            return n
        case ast.Index(name=n, index=ix):
            return f"{n}[{format_expr(ix)}]"
        case ast.Call(func=f, args=args):
            return f"{f}({', '.join(format_expr(a) for a in args)})"
        case ast.Neg(operand=op):
            text = "-" + format_expr(op, _PREC_UNARY)
            prec = _PREC_UNARY
        case ast.Not(operand=op):
            text = "!" + format_expr(op, _PREC_UNARY)
            prec = _PREC_UNARY
        case ast.Bin(op=o, left=l, right=r):
            prec = _PREC_MUL if o in ("*", "/", "%") else _PREC_ADD
            text = f"{format_expr(l, prec)} {o} {format_expr(r, prec, right_side=True)}"
        case ast.Cmp(op=o, left=l, right=r):
            prec = _PREC_CMP
            text = f"{format_expr(l, prec + 1)} {o} {format_expr(r, prec + 1)}"
        case ast.BoolOp(op=o, left=l, right=r):
            prec = _PREC_AND if o == "&&" else _PREC_OR
            text = f"{format_expr(l, prec)} {o} {format_expr(r, prec, right_side=True)}"
        case _:
            raise TypeError(f"unknown expression node {e!r}")
    # - and / and % are left-associative: a right operand at equal precedence
    # needs parens (a - (b - c)); left operands do not.
    if prec < parent_prec or (prec == parent_prec and right_side):
        return f"({text})"
    return text


def _format_stmt(s: ast.Stmt, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    match s:
        case ast.Assign(target=t, value=v):
            out.append(f"{pad}{format_expr(t)} = {format_expr(v)};")
        case ast.Return(value=None):
            out.append(f"{pad}return;")
        case ast.Return(value=v):
            out.append(f"{pad}return {format_expr(v)};")
        case ast.CallStmt(call=c):
            out.append(f"{pad}{format_expr(c)};")
        case ast.For(index=i, lo=lo, hi=hi, body=body):
            out.append(f"{pad}for {i} in {format_expr(lo, _PREC_CMP + 1)}..{format_expr(hi, _PREC_CMP + 1)} {{")
            for st in body:
                _format_stmt(st, indent + 1, out)
            out.append(f"{pad}}}")
        case ast.While(cond=c, body=body):
            out.append(f"{pad}while {format_expr(c)} {{")
            for st in body:
                _format_stmt(st, indent + 1, out)
            out.append(f"{pad}}}")
        case ast.If(cond=c, then=then, orelse=orelse):
            out.append(f"{pad}if {format_expr(c)} {{")
            for st in then:
                _format_stmt(st, indent + 1, out)
            if orelse:
                out.append(f"{pad}}} else {{")
                for st in orelse:
                    _format_stmt(st, indent + 1, out)
            out.append(f"{pad}}}")
        case _:
            raise TypeError(f"unknown statement node {s!r}")


def _format_kind(kind: ast.VarKind) -> str:
    if isinstance(kind, ast.ArrayReal):
        return f"real[{format_expr(kind.length)}]"
    return "int" if isinstance(kind, ast.ScalarInt) else "real"


def pretty_print(p: ast.Program) -> str:
    out: list[str] = []
    for fn in p.functions:
        params = ", ".join(
            ("inout " if q.direction == "inout" else "") + f"{q.name}: {_format_kind(q.kind)}"
            for q in fn.params
        )
        ret = f": {fn.return_kind}" if fn.return_kind != "void" else ": void"
        out.append(f"func {fn.name}({params}){ret} {{")
        for d in fn.locals:
            out.append(f"  var {d.name}: {_format_kind(d.kind)};")
        for st in fn.body:
            _format_stmt(st, 1, out)
        out.append("}")
        out.append("")
    return "\n".join(out)
