import pytest

from fplerr.frontend import ParseError, TypecheckError, parse, pretty_print, typecheck
from fplerr.frontend import ast


def test_parse_minimal_function():
    p = parse("func f(x: real): real { var z: real; z = x + x; return z; }")
    assert len(p.functions) == 1
    fn = p.functions[0]
    assert fn.name == "f"
    assert len(fn.locals) == 1
    assert len(fn.body) == 2
    assert fn.return_kind == "real"


def test_empty_input_is_parse_error_at_1_1():
    with pytest.raises(ParseError) as exc:
        parse("")
    assert "expected function" in str(exc.value)
    assert exc.value.loc.line == 1 and exc.value.loc.col == 1


def test_self_recursion_rejected():
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse("func g(x: real): real { return g(x); }"))
    assert "recursive call" in str(exc.value)


def test_mutual_recursion_rejected():
    src = """
    func a(x: real): real { return b(x); }
    func b(x: real): real { return a(x); }
    """
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse(src))
    assert "recursive call" in str(exc.value)


def test_duplicate_function_name():
    with pytest.raises(ParseError) as exc:
        parse("func f(): void { } func f(): void { }")
    assert "duplicate function name" in str(exc.value)


def test_unknown_identifier():
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse("func f(x: real): real { return y; }"))
    assert "unknown identifier 'y'" in str(exc.value)


def test_parse_error_reports_line_col_and_excerpt():
    with pytest.raises(ParseError) as exc:
        parse("func f(x: real): real {\n  z = ;\n}")
    msg = str(exc.value)
    assert "2:7" in msg
    assert "z = ;" in msg


def test_well_typed_mixed_int_real():
    p = typecheck(parse("func f(x: real): real { var z: real; z = x + 1.0; return z; }"))
    assert p.functions[0].body[0].value.ty == "real"


def test_boolean_in_arithmetic_is_type_error():
    src = "func f(x: real, a: real, b: real): real { var z: real; z = x + (a < b); return z; }"
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse(src))
    assert "boolean" in str(exc.value)


def test_real_array_index_is_type_error():
    src = "func f(a: real[3], x: real): real { return a[x]; }"
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse(src))
    assert "index must be an integer" in str(exc.value)


def test_loop_index_not_assignable():
    src = "func f(x: real): real { var s: real; for i in 0..3 { i = 1; } return s; }"
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse(src))
    assert "loop index" in str(exc.value)


def test_return_must_be_last():
    src = "func f(x: real): real { return x; return x; }"
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse(src))
    assert "final statement" in str(exc.value)


def test_reserved_underscore_names_rejected():
    with pytest.raises(ParseError):
        parse("func f(_x: real): real { return _x; }")


def test_array_length_must_use_int_params():
    src = "func f(x: real): real { var a: real[x]; return x; }"
    with pytest.raises(TypecheckError):
        typecheck(parse(src))


def test_deterministic_diagnostics():
    src = "func f(x: real): real { var z: real; z = y + w; return q; }"
    outs = []
    for _ in range(2):
        with pytest.raises(TypecheckError) as exc:
            typecheck(parse(src))
        outs.append([str(d) for d in exc.value.diagnostics])
    assert outs[0] == outs[1]
    assert len(outs[0]) >= 3


def _roundtrip(src: str):
    first = parse(src)
    second = parse(pretty_print(first))
    assert first == second
    # fixpoint: printing the reparse is byte-identical
    assert pretty_print(first) == pretty_print(second)


def test_roundtrip_expressions():
    _roundtrip(
        """
        func f(x: real, y: real, n: int): real {
          var z: real;
          var a: real[n];
          z = -x + y * (x - 2.0) / (y + 1.0) - x * x * x;
          z = z - (x - (y - 1.0));
          z = pow(x, 2) + min(x, max(y, 0.5)) + fabs(-x);
          a[n - 1] = z / 2.0;
          if x < y && !(x == 0.0) || y >= 1.0 {
            z = z * 2.0;
          } else {
            z = z / 2.0;
          }
          for i in 0..n { z = z + a[i] * 1e-3; }
          while z > 100.0 { z = z * 0.5; }
          return z + 0.1 + 2.5e-07;
        }
        """
    )


def test_roundtrip_corpus(corpus):
    for kernel in corpus.values():
        _roundtrip(kernel.source())


def test_literal_rounding_to_binary64():
    p = parse("func f(): real { return 0.1; }")
    lit = p.functions[0].body[0].value
    assert isinstance(lit, ast.Num)
    assert lit.value == 0.1  # nearest binary64


def test_call_arity_checked():
    with pytest.raises(TypecheckError) as exc:
        typecheck(parse("func f(x: real): real { return sin(x, x); }"))
    assert "expects 1 argument" in str(exc.value)
