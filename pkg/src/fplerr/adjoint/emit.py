"""Deterministic textual rendering of an AdjointFunction.

The dump mirrors the synthesized structure: parameter list extended with
adjoint outputs and the total-error output, a labeled forward sweep with
Push instrumentation, and a labeled backward sweep with Pop / adjoint /
AssignError instructions ending in FinalizeEE.
"""

from __future__ import annotations

from ..frontend import ast
from ..frontend.pretty import format_expr, _format_kind
from .ir import (
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
)


def _target(e: ast.Expr) -> str:
    return format_expr(e)


def _emit_fwd(ops: list, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for op in ops:
        match op:
            case FPush(target=t):
                out.append(f"{pad}Push({_target(t)});")
            case FAssign(stmt=st):
                out.append(f"{pad}{_target(st.target)} = {format_expr(st.value)};")
            case FFor(index=i, lo=lo, hi=hi, body=b, static=static):
                mode = "" if static else "[record-trips]"
                out.append(f"{pad}for{mode} {i} in {format_expr(lo)}..{format_expr(hi)} {{")
                _emit_fwd(b, indent + 1, out)
                out.append(f"{pad}}}")
                if not static:
                    out.append(f"{pad}PushControl(trips);")
            case FWhile(cond=c, body=b):
                out.append(f"{pad}while[record-trips] {format_expr(c)} {{")
                _emit_fwd(b, indent + 1, out)
                out.append(f"{pad}}}")
                out.append(f"{pad}PushControl(trips);")
            case FIf(cond=c, then=t, orelse=e):
                out.append(f"{pad}if {format_expr(c)} {{")
                _emit_fwd(t, indent + 1, out)
                if e:
                    out.append(f"{pad}}} else {{")
                    _emit_fwd(e, indent + 1, out)
                out.append(f"{pad}}}")
                out.append(f"{pad}PushBranch(taken);")
            case FReturn(value=None):
                out.append(f"{pad}// return")
            case FReturn(value=v):
                out.append(f"{pad}// return value: {format_expr(v)}")
            case _:
                raise TypeError(f"unknown forward op {op!r}")


def _emit_bwd(ops: list, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for op in ops:
        match op:
            case BPop(target=t):
                out.append(f"{pad}Pop({_target(t)});")
            case BSet(name=n, expr=e):
                out.append(f"{pad}{n} = {format_expr(e)};")
            case BSetElem(array=a, index=ix, expr=e):
                out.append(f"{pad}{a}[{format_expr(ix)}] = {format_expr(e)};")
            case BCond(cond=c, then=t, orelse=e):
                out.append(f"{pad}if {format_expr(c)} {{")
                _emit_bwd(t, indent + 1, out)
                if e:
                    out.append(f"{pad}}} else {{")
                    _emit_bwd(e, indent + 1, out)
                out.append(f"{pad}}}")
            case BHook(var_name=n, value_src=v, adjoint_src=a):
                adj = a if a is not None else "0.0"
                out.append(f"{pad}AssignError({n}, value={v}, adjoint={adj});")
            case BParamHook(param=p):
                out.append(f"{pad}AssignError({p}, value={p}, adjoint=_d_{p});")
            case BRevFor(index=i, lo=lo, hi=hi, body=b):
                out.append(f"{pad}for {i} in reverse({format_expr(lo)}..{format_expr(hi)}) {{")
                _emit_bwd(b, indent + 1, out)
                out.append(f"{pad}}}")
            case BRevForDyn(index=i, body=b):
                out.append(f"{pad}for {i} in reverse(PopControl()) {{")
                _emit_bwd(b, indent + 1, out)
                out.append(f"{pad}}}")
            case BRevWhile(body=b):
                out.append(f"{pad}repeat PopControl() {{")
                _emit_bwd(b, indent + 1, out)
                out.append(f"{pad}}}")
            case BRevIf(then=t, orelse=e):
                out.append(f"{pad}if PopBranch() {{")
                _emit_bwd(t, indent + 1, out)
                if e:
                    out.append(f"{pad}}} else {{")
                    _emit_bwd(e, indent + 1, out)
                out.append(f"{pad}}}")
            case BFinalize():
                out.append(f"{pad}_fp_error = FinalizeEE();")
            case _:
                raise TypeError(f"unknown backward op {op!r}")


def emit(adj: AdjointFunction) -> str:
    """Render the adjoint function deterministically (byte-stable)."""
    fn = adj.fn
    params = [
        ("inout " if p.direction == "inout" else "") + f"{p.name}: {_format_kind(p.kind)}"
        for p in fn.params
    ]
    for p in adj.diff_params:
        kind = next(q.kind for q in fn.params if q.name == p)
        params.append(f"inout {adj.grad_outputs[p]}: {_format_kind(kind)}")
    params.append(f"inout {adj.error_output}: real")

    out: list[str] = []
    out.append(f"// error-estimated adjoint of {adj.source_name} (model: {adj.model_id})")
    out.append(f"func {adj.name}({', '.join(params)}): void {{")
    grad_out_names = set(adj.grad_outputs.values())
    for d in fn.locals:
        out.append(f"  var {d.name}: {_format_kind(d.kind)};")
    for v, dv in adj.adjoint_vars.items():
        if dv in grad_out_names:
            continue
        kind = _kind_of(fn, v)
        out.append(f"  var {dv}: {_format_kind(kind)};")
    for s in adj.scratch:
        out.append(f"  var {s}: real;")
    out.append("")
    out.append("  // forward sweep")
    _emit_fwd(adj.fwd, 1, out)
    out.append("")
    out.append("  // backward sweep")
    _emit_bwd(adj.bwd, 1, out)
    out.append("}")
    out.append("")
    return "\n".join(out)


def _kind_of(fn: ast.FunctionDef, name: str) -> ast.VarKind:
    for p in fn.params:
        if p.name == name:
            return p.kind
    for d in fn.locals:
        if d.name == name:
            return d.kind
    return ast.REAL
