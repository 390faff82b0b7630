"""Closure-compiling interpreter for FPL functions and their adjoints.

Each expression and statement is compiled once into a Python closure over
pre-resolved variable slots; running a function is then a flat loop over
closures.  All arithmetic happens in binary64; stores to demoted program
variables round on the way in.  The same compiled assignment closures back
both `run_primal` and the adjoint's forward sweep, making primal outputs
bit-identical by construction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from ..adjoint.ir import (
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
from ..frontend import ast
from ..models.base import ErrorModel, ErrorRegistry
from ..precision import DOUBLE, ConfigError, PrecisionSpec
from ..runtime.tape import Tape

_INF = math.inf


class RuntimeFault(ast.FplError):
    """Runtime evaluation fault (domain error, division by zero, bad index)."""

    def __init__(self, message: str, loc: ast.Loc):
        self.loc = loc
        super().__init__(f"{loc}: {message}")


class _State:
    __slots__ = (
        "v",
        "tape",
        "model",
        "registry",
        "sens",
        "stmts",
        "overflow",
        "ret",
        "iter_value",
        "itermat",
        "total_error",
    )

    def __init__(self, nslots: int):
        self.v: list = [0.0] * nslots
        self.tape = Tape()
        self.model: ErrorModel | None = None
        self.registry = ErrorRegistry()
        self.sens: dict[str, float] = {}
        self.stmts = 0
        self.overflow = False
        self.ret: float | None = None
        self.iter_value = -1
        self.itermat: dict[int, dict[str, float]] | None = None
        self.total_error = 0.0


@dataclass
class ExecutionResult:
    """Outputs, gradients and error data of one adjoint execution."""

    outputs: dict[str, float | list[float]]
    gradients: dict[str, float | list[float]]
    registry: ErrorRegistry
    total_error: float
    sensitivities: dict[str, float]
    stats: dict
    iteration_matrix: dict[int, dict[str, float]] | None = None


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


class _Compiler:
    """Resolves names to slots and compiles AST/IR nodes to closures."""

    def __init__(
        self,
        fn: ast.FunctionDef,
        spec: PrecisionSpec,
        extra_scalars: list[str] = (),
        adjoint_vars: dict[str, str] | None = None,
        approx_map: dict[str, str] | None = None,
    ):
        self.fn = fn
        self.spec = spec
        self.approx_map = approx_map or {}
        self.slots: dict[str, int] = {}
        self.kinds: dict[str, ast.VarKind] = {}
        self.array_lengths: dict[str, ast.Expr] = {}
        self.rounders: dict[str, object] = {}

        for p in fn.params:
            self._declare(p.name, p.kind, rounded=True)
        for d in fn.locals:
            self._declare(d.name, d.kind, rounded=True)
        for name in extra_scalars:
            self._declare(name, ast.REAL, rounded=False)
        self.adjoint_arrays: dict[str, str] = {}
        if adjoint_vars:
            for src, adj in adjoint_vars.items():
                kind = self.kinds[src]
                if isinstance(kind, ast.ArrayReal):
                    self._declare(adj, ast.ArrayReal(kind.length), rounded=False)
                    self.adjoint_arrays[adj] = src
                else:
                    self._declare(adj, ast.REAL, rounded=False)
        self._loop_indices: dict[str, int] = {}

    def _declare(self, name: str, kind: ast.VarKind, rounded: bool) -> None:
        if name in self.slots:
            raise ConfigError(f"duplicate slot '{name}'")
        self.slots[name] = len(self.slots)
        self.kinds[name] = kind
        if isinstance(kind, ast.ArrayReal):
            self.array_lengths[name] = kind.length
        if rounded and not isinstance(kind, ast.ScalarInt):
            self.rounders[name] = self.spec.rounder(name)
        else:
            self.rounders[name] = None

    def slot_of_index(self, name: str) -> int:
        """Slot for a loop index variable, allocated on first use."""
        if name not in self.slots:
            self.slots[name] = len(self.slots)
            self.kinds[name] = ast.INT
            self.rounders[name] = None
        return self.slots[name]

    # -- expressions ---------------------------------------------------------

    def expr(self, e: ast.Expr):
        match e:
            case ast.Num(value=v) | ast.IntNum(value=v):
                return lambda S, v=v: v
            case ast.Var(name=n):
                k = self.slots.get(n)
                if k is None:
                    k = self.slot_of_index(n)
                return lambda S, k=k: S.v[k]
            case ast.Index(name=n, index=ix):
                k = self.slots[n]
                ixf = self.expr(ix)
                loc = e.loc

                def read_elem(S, k=k, ixf=ixf, loc=loc):
                    a = S.v[k]
                    i = ixf(S)
                    if 0 <= i < len(a):
                        return a[i]
                    raise RuntimeFault(f"index {i} out of bounds for array of length {len(a)}", loc)

                return read_elem
            case ast.Neg(operand=op):
                f = self.expr(op)
                return lambda S, f=f: -f(S)
            case ast.Bin(op=o, left=l, right=r):
                lf, rf = self.expr(l), self.expr(r)
                if o == "+":
                    return lambda S, lf=lf, rf=rf: lf(S) + rf(S)
                if o == "-":
                    return lambda S, lf=lf, rf=rf: lf(S) - rf(S)
                if o == "*":
                    return lambda S, lf=lf, rf=rf: lf(S) * rf(S)
                if o == "/":
                    loc = e.loc
                    if e.ty == "int":

                        def idiv(S, lf=lf, rf=rf, loc=loc):
                            a = lf(S)
                            b = rf(S)
                            if b == 0:
                                raise RuntimeFault("division by zero", loc)
                            return _trunc_div(a, b)

                        return idiv

                    def div(S, lf=lf, rf=rf, loc=loc):
                        a = lf(S)
                        b = rf(S)
                        if b == 0.0:
                            raise RuntimeFault("division by zero", loc)
                        return a / b

                    return div
                if o == "%":
                    loc = e.loc

                    def imod(S, lf=lf, rf=rf, loc=loc):
                        a = lf(S)
                        b = rf(S)
                        if b == 0:
                            raise RuntimeFault("modulo by zero", loc)
                        return a - _trunc_div(a, b) * b

                    return imod
                raise TypeError(f"unknown operator {o}")
            case ast.Cmp(op=o, left=l, right=r):
                lf, rf = self.expr(l), self.expr(r)
                if o == "==":
                    return lambda S, lf=lf, rf=rf: lf(S) == rf(S)
                if o == "!=":
                    return lambda S, lf=lf, rf=rf: lf(S) != rf(S)
                if o == "<":
                    return lambda S, lf=lf, rf=rf: lf(S) < rf(S)
                if o == "<=":
                    return lambda S, lf=lf, rf=rf: lf(S) <= rf(S)
                if o == ">":
                    return lambda S, lf=lf, rf=rf: lf(S) > rf(S)
                return lambda S, lf=lf, rf=rf: lf(S) >= rf(S)
            case ast.BoolOp(op=o, left=l, right=r):
                lf, rf = self.expr(l), self.expr(r)
                if o == "&&":
                    return lambda S, lf=lf, rf=rf: lf(S) and rf(S)
                return lambda S, lf=lf, rf=rf: lf(S) or rf(S)
            case ast.Not(operand=op):
                f = self.expr(op)
                return lambda S, f=f: not f(S)
            case ast.Call():
                return self._call(e)
            case _:
                raise TypeError(f"cannot compile expression {e!r}")

    def _call(self, e: ast.Call):
        args = [self.expr(a) for a in e.args]
        loc = e.loc
        f = e.func

        # Approximate-substitution execution: a mapped variable feeding the
        # builtin switches the call site to the approximate implementation.
        if (
            self.approx_map
            and f in ("log", "exp", "sqrt")
            and len(e.args) == 1
            and isinstance(e.args[0], (ast.Var, ast.Index))
            and self.approx_map.get(e.args[0].name) == f
        ):
            from ..models.approx_impls import APPROX_IMPLS

            impl = APPROX_IMPLS[f][1]
            af = args[0]

            def approx_call(S, af=af, impl=impl, loc=loc):
                try:
                    return impl(af(S))
                except ValueError as exc:
                    raise RuntimeFault(str(exc), loc) from None

            return approx_call

        if f == "sin":
            (af,) = args
            return lambda S, af=af: math.sin(af(S))
        if f == "cos":
            (af,) = args
            return lambda S, af=af: math.cos(af(S))
        if f == "tan":
            (af,) = args
            return lambda S, af=af: math.tan(af(S))
        if f == "sqrt":
            (af,) = args

            def _sqrt(S, af=af, loc=loc):
                x = af(S)
                if x < 0.0:
                    raise RuntimeFault(f"sqrt of negative value {x!r}", loc)
                return math.sqrt(x)

            return _sqrt
        if f == "exp":
            (af,) = args

            def _exp(S, af=af):
                try:
                    return math.exp(af(S))
                except OverflowError:
                    S.overflow = True
                    return _INF

            return _exp
        if f == "log":
            (af,) = args

            def _log(S, af=af, loc=loc):
                x = af(S)
                if x <= 0.0:
                    raise RuntimeFault(f"log of non-positive value {x!r}", loc)
                return math.log(x)

            return _log
        if f == "pow":
            af, bf = args

            def _pow(S, af=af, bf=bf, loc=loc):
                try:
                    return math.pow(af(S), bf(S))
                except ValueError:
                    raise RuntimeFault("pow domain error", loc) from None
                except OverflowError:
                    S.overflow = True
                    return _INF

            return _pow
        if f == "fabs":
            (af,) = args
            return lambda S, af=af: abs(af(S))
        if f == "min":
            af, bf = args
            return lambda S, af=af, bf=bf: min(af(S), bf(S))
        if f == "max":
            af, bf = args
            return lambda S, af=af, bf=bf: max(af(S), bf(S))
        if f == "sign":
            (af,) = args

            def _sign(S, af=af):
                x = af(S)
                return 1.0 if x > 0.0 else (-1.0 if x < 0.0 else 0.0)

            return _sign
        raise RuntimeFault(f"call to unknown function '{f}'", loc)

    # -- primal statements ------------------------------------------------------

    def store_scalar(self, name: str, vf, count: bool = True):
        k = self.slots[name]
        rnd = self.rounders[name]
        if rnd is None:
            if count:

                def set_plain(S, k=k, vf=vf):
                    S.stmts += 1
                    S.v[k] = vf(S)

                return set_plain
            return lambda S, k=k, vf=vf: S.v.__setitem__(k, vf(S))

        def set_rounded(S, k=k, vf=vf, rnd=rnd):
            S.stmts += 1
            x = vf(S)
            y = rnd(x)
            if y != x and math.isinf(y) and math.isfinite(x):
                S.overflow = True
            S.v[k] = y

        return set_rounded

    def store_elem(self, name: str, ixe: ast.Expr, vf, loc: ast.Loc):
        k = self.slots[name]
        ixf = self.expr(ixe)
        rnd = self.rounders[name]

        def set_elem(S, k=k, ixf=ixf, vf=vf, rnd=rnd, loc=loc):
            S.stmts += 1
            a = S.v[k]
            i = ixf(S)
            if not (0 <= i < len(a)):
                raise RuntimeFault(f"index {i} out of bounds for array of length {len(a)}", loc)
            x = vf(S)
            if rnd is not None:
                y = rnd(x)
                if y != x and math.isinf(y) and math.isfinite(x):
                    S.overflow = True
                x = y
            a[i] = x

        return set_elem

    def assign(self, st: ast.Assign):
        vf = self.expr(st.value)
        if isinstance(st.target, ast.Index):
            return self.store_elem(st.target.name, st.target.index, vf, st.loc)
        return self.store_scalar(st.target.name, vf)

    def primal_stmts(self, stmts: list[ast.Stmt]) -> list:
        ops = []
        for st in stmts:
            match st:
                case ast.Assign():
                    ops.append(self.assign(st))
                case ast.Return(value=None):
                    pass
                case ast.Return(value=v):
                    vf = self.expr(v)

                    def ret(S, vf=vf):
                        S.ret = vf(S)

                    ops.append(ret)
                case ast.For(index=i, lo=lo, hi=hi, body=b):
                    ki = self.slot_of_index(i)
                    lof, hif = self.expr(lo), self.expr(hi)
                    body = self.primal_stmts(b)

                    def forloop(S, ki=ki, lof=lof, hif=hif, body=body):
                        for i in range(lof(S), hif(S)):
                            S.v[ki] = i
                            for op in body:
                                op(S)

                    ops.append(forloop)
                case ast.While(cond=c, body=b):
                    cf = self.expr(c)
                    body = self.primal_stmts(b)

                    def whileloop(S, cf=cf, body=body):
                        while cf(S):
                            for op in body:
                                op(S)

                    ops.append(whileloop)
                case ast.If(cond=c, then=t, orelse=o):
                    cf = self.expr(c)
                    tb = self.primal_stmts(t)
                    eb = self.primal_stmts(o)

                    def ifstmt(S, cf=cf, tb=tb, eb=eb):
                        for op in tb if cf(S) else eb:
                            op(S)

                    ops.append(ifstmt)
                case _:
                    raise TypeError(f"cannot compile statement {st!r}")
        return ops

    # -- forward sweep ------------------------------------------------------------

    def fwd_ops(self, irops: list) -> list:
        ops = []
        for op in irops:
            match op:
                case FPush(target=t):
                    if isinstance(t, ast.Index):
                        k = self.slots[t.name]
                        ixf = self.expr(t.index)
                        loc = t.loc

                        def push_elem(S, k=k, ixf=ixf, loc=loc):
                            a = S.v[k]
                            i = ixf(S)
                            if not (0 <= i < len(a)):
                                raise RuntimeFault(
                                    f"index {i} out of bounds for array of length {len(a)}", loc
                                )
                            S.tape.push(a[i])

                        ops.append(push_elem)
                    else:
                        k = self.slots[t.name]
                        ops.append(lambda S, k=k: S.tape.push(S.v[k]))
                case FAssign(stmt=st):
                    ops.append(self.assign(st))
                case FFor(index=i, lo=lo, hi=hi, body=b, static=static):
                    ki = self.slot_of_index(i)
                    lof, hif = self.expr(lo), self.expr(hi)
                    body = self.fwd_ops(b)
                    if static:

                        def ffor(S, ki=ki, lof=lof, hif=hif, body=body):
                            for i in range(lof(S), hif(S)):
                                S.v[ki] = i
                                for op in body:
                                    op(S)

                        ops.append(ffor)
                    else:

                        def ffor_dyn(S, ki=ki, lof=lof, hif=hif, body=body):
                            lo = lof(S)
                            hi = hif(S)
                            for i in range(lo, hi):
                                S.v[ki] = i
                                for op in body:
                                    op(S)
                            S.tape.push((lo, max(hi - lo, 0)))

                        ops.append(ffor_dyn)
                case FWhile(cond=c, body=b):
                    cf = self.expr(c)
                    body = self.fwd_ops(b)

                    def fwhile(S, cf=cf, body=body):
                        n = 0
                        while cf(S):
                            for op in body:
                                op(S)
                            n += 1
                        S.tape.push(n)

                    ops.append(fwhile)
                case FIf(cond=c, then=t, orelse=e):
                    cf = self.expr(c)
                    tb = self.fwd_ops(t)
                    eb = self.fwd_ops(e)

                    # The branch token goes on after the body so it is on top
                    # when the backward sweep reverses this statement.
                    def fif(S, cf=cf, tb=tb, eb=eb):
                        taken = cf(S)
                        for op in tb if taken else eb:
                            op(S)
                        S.tape.push(taken)

                    ops.append(fif)
                case FReturn(value=None):
                    pass
                case FReturn(value=v):
                    vf = self.expr(v)

                    def fret(S, vf=vf):
                        S.ret = vf(S)

                    ops.append(fret)
                case _:
                    raise TypeError(f"cannot compile forward op {op!r}")
        return ops

    # -- backward sweep --------------------------------------------------------------

    def bwd_ops(self, irops: list, est_spec: PrecisionSpec, marked_loop: int | None) -> list:
        ops = []
        for op in irops:
            match op:
                case BPop(target=t):
                    if isinstance(t, ast.Index):
                        k = self.slots[t.name]
                        ixf = self.expr(t.index)

                        def pop_elem(S, k=k, ixf=ixf):
                            S.v[k][ixf(S)] = S.tape.pop()

                        ops.append(pop_elem)
                    else:
                        k = self.slots[t.name]

                        def pop_scalar(S, k=k):
                            S.v[k] = S.tape.pop()

                        ops.append(pop_scalar)
                case BSet(name=n, expr=e):
                    vf = self.expr(e)
                    k = self.slots[n]
                    ops.append(lambda S, k=k, vf=vf: S.v.__setitem__(k, vf(S)))
                case BSetElem(array=a, index=ix, expr=e):
                    k = self.slots[a]
                    ixf = self.expr(ix)
                    vf = self.expr(e)

                    def set_adj_elem(S, k=k, ixf=ixf, vf=vf):
                        S.v[k][ixf(S)] = vf(S)

                    ops.append(set_adj_elem)
                case BCond(cond=c, then=t, orelse=e):
                    cf = self.expr(c)
                    tb = self.bwd_ops(t, est_spec, marked_loop)
                    eb = self.bwd_ops(e, est_spec, marked_loop)

                    def bcond(S, cf=cf, tb=tb, eb=eb):
                        for op in tb if cf(S) else eb:
                            op(S)

                    ops.append(bcond)
                case BHook(var_name=n, loc=loc, value_src=vsrc, adjoint_src=asrc):
                    kv = self.slots[vsrc]
                    ka = self.slots[asrc] if asrc is not None else None
                    prec = est_spec.precision_of(n)

                    def hook(S, n=n, loc=loc, kv=kv, ka=ka, prec=prec):
                        val = S.v[kv]
                        adj = S.v[ka] if ka is not None else 0.0
                        c = S.model.assign_error(n, val, adj, loc, prec)
                        S.registry.register(n, loc, val, adj, c)
                        s = abs(val * adj)
                        S.sens[n] = S.sens.get(n, 0.0) + s
                        if S.itermat is not None and S.iter_value >= 0:
                            row = S.itermat.setdefault(S.iter_value, {})
                            row[n] = row.get(n, 0.0) + s

                    ops.append(hook)
                case BParamHook(param=p, loc=loc):
                    kp = self.slots[p]
                    prec = est_spec.precision_of(p)
                    adj = adjoint_name(p)
                    ka = self.slots.get(adj)
                    if isinstance(self.kinds[p], ast.ArrayReal):

                        def param_hook_array(S, p=p, loc=loc, kp=kp, ka=ka, prec=prec):
                            vals = S.v[kp]
                            adjs = S.v[ka] if ka is not None else None
                            for i, val in enumerate(vals):
                                a = adjs[i] if adjs is not None else 0.0
                                c = S.model.assign_error(p, val, a, loc, prec)
                                S.registry.register(p, loc, val, a, c)
                                S.sens[p] = S.sens.get(p, 0.0) + abs(val * a)

                        ops.append(param_hook_array)
                    else:

                        def param_hook(S, p=p, loc=loc, kp=kp, ka=ka, prec=prec):
                            val = S.v[kp]
                            a = S.v[ka] if ka is not None else 0.0
                            c = S.model.assign_error(p, val, a, loc, prec)
                            S.registry.register(p, loc, val, a, c)
                            S.sens[p] = S.sens.get(p, 0.0) + abs(val * a)

                        ops.append(param_hook)
                case BRevFor(index=i, lo=lo, hi=hi, body=b, loop_id=lid):
                    ki = self.slot_of_index(i)
                    lof, hif = self.expr(lo), self.expr(hi)
                    body = self.bwd_ops(b, est_spec, marked_loop)
                    if marked_loop is not None and lid == marked_loop:

                        def brevfor_marked(S, ki=ki, lof=lof, hif=hif, body=body):
                            for i in range(hif(S) - 1, lof(S) - 1, -1):
                                S.v[ki] = i
                                S.iter_value = i
                                for op in body:
                                    op(S)
                            S.iter_value = -1

                        ops.append(brevfor_marked)
                    else:

                        def brevfor(S, ki=ki, lof=lof, hif=hif, body=body):
                            for i in range(hif(S) - 1, lof(S) - 1, -1):
                                S.v[ki] = i
                                for op in body:
                                    op(S)

                        ops.append(brevfor)
                case BRevForDyn(index=i, body=b, loop_id=lid):
                    ki = self.slot_of_index(i)
                    body = self.bwd_ops(b, est_spec, marked_loop)
                    if marked_loop is not None and lid == marked_loop:

                        def brevdyn_marked(S, ki=ki, body=body):
                            lo, trips = S.tape.pop()
                            for i in range(lo + trips - 1, lo - 1, -1):
                                S.v[ki] = i
                                S.iter_value = i
                                for op in body:
                                    op(S)
                            S.iter_value = -1

                        ops.append(brevdyn_marked)
                    else:

                        def brevdyn(S, ki=ki, body=body):
                            lo, trips = S.tape.pop()
                            for i in range(lo + trips - 1, lo - 1, -1):
                                S.v[ki] = i
                                for op in body:
                                    op(S)

                        ops.append(brevdyn)
                case BRevWhile(body=b):
                    body = self.bwd_ops(b, est_spec, marked_loop)

                    def brevwhile(S, body=body):
                        n = S.tape.pop()
                        for _ in range(n):
                            for op in body:
                                op(S)

                    ops.append(brevwhile)
                case BRevIf(then=t, orelse=e):
                    tb = self.bwd_ops(t, est_spec, marked_loop)
                    eb = self.bwd_ops(e, est_spec, marked_loop)

                    def brevif(S, tb=tb, eb=eb):
                        for op in tb if S.tape.pop() else eb:
                            op(S)

                    ops.append(brevif)
                case BFinalize():

                    def bfin(S):
                        S.total_error = S.model.finalize(S.registry)

                    ops.append(bfin)
                case _:
                    raise TypeError(f"cannot compile backward op {op!r}")
        return ops


def _eval_length(e: ast.Expr, values: dict[str, int], loc_ctx: str) -> int:
    match e:
        case ast.IntNum(value=v):
            return v
        case ast.Var(name=n):
            if n not in values:
                raise ConfigError(f"array length of {loc_ctx} uses unbound '{n}'")
            return int(values[n])
        case ast.Neg(operand=op):
            return -_eval_length(op, values, loc_ctx)
        case ast.Bin(op=o, left=l, right=r):
            a = _eval_length(l, values, loc_ctx)
            b = _eval_length(r, values, loc_ctx)
            if o == "+":
                return a + b
            if o == "-":
                return a - b
            if o == "*":
                return a * b
            if o == "/":
                return _trunc_div(a, b)
            if o == "%":
                return a - _trunc_div(a, b) * b
        case _:
            pass
    raise ConfigError(f"unsupported array length expression for {loc_ctx}")


class _RunnerBase:
    def __init__(self, fn: ast.FunctionDef, compiler: _Compiler):
        self.fn = fn
        self.compiler = compiler

    def _init_state(self, inputs: dict) -> _State:
        fn = self.fn
        comp = self.compiler
        S = _State(len(comp.slots))
        int_params: dict[str, int] = {}
        for p in fn.params:
            if p.name not in inputs:
                raise ConfigError(f"missing input '{p.name}'")
            k = comp.slots[p.name]
            val = inputs[p.name]
            if isinstance(p.kind, ast.ScalarInt):
                S.v[k] = int(val)
                int_params[p.name] = int(val)
            elif isinstance(p.kind, ast.ArrayReal):
                rnd = comp.rounders[p.name]
                vals = [float(x) for x in val]
                S.v[k] = vals if rnd is None else [rnd(x) for x in vals]
            else:
                rnd = comp.rounders[p.name]
                x = float(val)
                S.v[k] = x if rnd is None else rnd(x)
        # Array parameter lengths must match their declarations.
        for p in fn.params:
            if isinstance(p.kind, ast.ArrayReal):
                n = _eval_length(p.kind.length, int_params, f"parameter '{p.name}'")
                if n < 0:
                    raise ConfigError(f"negative length {n} for array parameter '{p.name}'")
                if len(S.v[comp.slots[p.name]]) != n:
                    raise ConfigError(
                        f"array parameter '{p.name}' expects length {n}, got {len(S.v[comp.slots[p.name]])}"
                    )
        # Locals are zero-initialized; local arrays are sized by int params.
        for d in fn.locals:
            k = comp.slots[d.name]
            if isinstance(d.kind, ast.ArrayReal):
                n = _eval_length(d.kind.length, int_params, f"local '{d.name}'")
                if n < 0:
                    raise ConfigError(f"negative length {n} for local array '{d.name}'")
                S.v[k] = [0.0] * n
            elif isinstance(d.kind, ast.ScalarInt):
                S.v[k] = 0
            else:
                S.v[k] = 0.0
        # Adjoint arrays mirror their primal array's length.
        for adj, src in comp.adjoint_arrays.items():
            S.v[comp.slots[adj]] = [0.0] * len(S.v[comp.slots[src]])
        return S

    def _outputs(self, S: _State) -> dict:
        out: dict[str, float | list[float]] = {}
        if self.fn.return_kind == "real":
            out["return"] = S.ret
        for p in self.fn.params:
            if p.direction == "inout":
                v = S.v[self.compiler.slots[p.name]]
                out[p.name] = list(v) if isinstance(v, list) else v
        return out


class PrimalRunner(_RunnerBase):
    """Compiled plain execution of an (inlined) function under a spec."""

    def __init__(self, fn: ast.FunctionDef, spec: PrecisionSpec, approx_map: dict[str, str] | None = None):
        spec.validate(set(_declared_names(fn)))
        comp = _Compiler(fn, spec, approx_map=approx_map)
        super().__init__(fn, comp)
        self.ops = comp.primal_stmts(fn.body)

    def run(self, inputs: dict) -> dict:
        S = self._init_state(inputs)
        for op in self.ops:
            op(S)
        return self._outputs(S)


class AdjointRunner(_RunnerBase):
    """Compiled adjoint execution: forward sweep, backward sweep, hooks."""

    def __init__(
        self,
        adj: AdjointFunction,
        spec: PrecisionSpec,
        model: ErrorModel,
        est_spec: PrecisionSpec | None = None,
        profile_loop: str | None = None,
    ):
        if model.id != adj.model_id:
            raise ConfigError(
                f"adjoint was synthesized for model '{adj.model_id}', cannot run with '{model.id}'"
            )
        fn = adj.fn
        declared = set(_declared_names(fn))
        spec.validate(declared)
        if model.requires_double_exec:
            bad = [
                v
                for v in fn.real_variables()
                if spec.precision_of(v) != DOUBLE
            ]
            if bad:
                raise ConfigError(
                    f"model '{model.id}' requires binary64 execution; demoted: {', '.join(bad)}"
                )
        comp = _Compiler(
            fn,
            spec,
            extra_scalars=adj.scratch,
            adjoint_vars=adj.adjoint_vars,
        )
        super().__init__(fn, comp)
        self.adj = adj
        self.model = model
        self.est_spec = est_spec or spec
        marked = None
        if profile_loop is not None:
            if profile_loop not in adj.marked_loops:
                raise ConfigError(
                    f"unknown loop marker '{profile_loop}' (top-level for loops: "
                    f"{', '.join(adj.marked_loops) or 'none'})"
                )
            marked = adj.marked_loops[profile_loop]
        self.profiling = marked is not None
        self.fwd = comp.fwd_ops(adj.fwd)
        self.bwd = comp.bwd_ops(adj.bwd, self.est_spec, marked)
        self.seed_slot = comp.slots[SEED_VAR]

    def run(self, inputs: dict, seed: float = 1.0, seeds: dict | None = None) -> ExecutionResult:
        t0 = time.perf_counter()
        S = self._init_state(inputs)
        S.model = self.model
        if self.profiling:
            S.itermat = {}
        for op in self.fwd:
            op(S)
        outputs = self._outputs(S)

        S.v[self.seed_slot] = float(seed)
        if seeds:
            for name, sv in seeds.items():
                adjn = self.adj.adjoint_vars.get(name)
                if adjn is None:
                    raise ConfigError(f"cannot seed non-differentiable '{name}'")
                k = self.compiler.slots[adjn]
                if isinstance(S.v[k], list):
                    vec = list(sv)
                    if len(vec) != len(S.v[k]):
                        raise ConfigError(f"seed for '{name}' has wrong length")
                    S.v[k] = [float(x) for x in vec]
                else:
                    S.v[k] = float(sv)
        elif self.fn.return_kind == "void":
            # Default seed for multi-output functions: all-ones on each
            # inout output's adjoint.
            for p in self.fn.params:
                if p.direction == "inout":
                    adjn = self.adj.adjoint_vars.get(p.name)
                    if adjn is not None:
                        k = self.compiler.slots[adjn]
                        if isinstance(S.v[k], list):
                            S.v[k] = [float(seed)] * len(S.v[k])
                        else:
                            S.v[k] = float(seed)

        for op in self.bwd:
            op(S)

        gradients: dict[str, float | list[float]] = {}
        for p in self.adj.diff_params:
            k = self.compiler.slots[self.adj.grad_outputs[p]]
            v = S.v[k]
            gradients[p] = list(v) if isinstance(v, list) else v

        assert S.tape.balanced, "tape not balanced after adjoint execution"
        wall = time.perf_counter() - t0

        nonfinite = S.registry.nonfinite or S.overflow
        for v in list(outputs.values()) + list(gradients.values()):
            vals = v if isinstance(v, list) else [v]
            if any(x is None or not math.isfinite(x) for x in vals):
                nonfinite = True
        if not math.isfinite(S.total_error):
            nonfinite = True

        stats = {
            "statements": S.stmts,
            "pushes": S.tape.push_count,
            "pops": S.tape.pop_count,
            "tape_peak": S.tape.peak,
            "wall_time": wall,
            "overflow": S.overflow,
            "nonfinite": nonfinite,
        }
        return ExecutionResult(
            outputs=outputs,
            gradients=gradients,
            registry=S.registry,
            total_error=S.total_error,
            sensitivities=S.sens,
            stats=stats,
            iteration_matrix=S.itermat,
        )


def _declared_names(fn: ast.FunctionDef) -> list[str]:
    return [p.name for p in fn.params] + [d.name for d in fn.locals]


def run_primal(
    fn: ast.FunctionDef,
    inputs: dict,
    spec: PrecisionSpec | None = None,
    program: ast.Program | None = None,
    approx_map: dict[str, str] | None = None,
) -> dict:
    """Execute a type-checked function; returns its outputs in binary64
    carriers (rounding applied on stores per the spec)."""
    from ..adjoint.transform import prepare_function

    inlined = prepare_function(fn, program)
    return PrimalRunner(inlined, spec or PrecisionSpec.all_double(), approx_map).run(inputs)


def run_adjoint(
    adj: AdjointFunction,
    inputs: dict,
    spec: PrecisionSpec | None = None,
    model: ErrorModel | None = None,
    est_spec: PrecisionSpec | None = None,
    seed: float = 1.0,
    seeds: dict | None = None,
    profile_loop: str | None = None,
) -> ExecutionResult:
    """Execute an adjoint function once; see AdjointRunner for the reusable,
    precompiled form."""
    from ..models.base import TaylorModel

    runner = AdjointRunner(
        adj,
        spec or PrecisionSpec.all_double(),
        model or TaylorModel(),
        est_spec=est_spec,
        profile_loop=profile_loop,
    )
    return runner.run(inputs, seed=seed, seeds=seeds)
