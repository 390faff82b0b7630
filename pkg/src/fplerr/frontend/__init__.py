"""FPL front-end: lexing, parsing, type checking and pretty-printing."""

from .ast import FplError, Loc, ParseError, Program, SourceError
from .parser import parse
from .pretty import format_expr, pretty_print
from .typecheck import Diagnostic, TypecheckError, TypedFunction, TypedProgram, typecheck

__all__ = [
    "Diagnostic",
    "FplError",
    "Loc",
    "ParseError",
    "Program",
    "SourceError",
    "TypecheckError",
    "TypedFunction",
    "TypedProgram",
    "format_expr",
    "parse",
    "pretty_print",
    "typecheck",
]
