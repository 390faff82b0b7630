"""Recursive-descent parser producing an `ast.Program`.

Grammar summary (full EBNF in docs/fpl-grammar.md):

    program   = { function }
    function  = "func" IDENT "(" [ params ] ")" [ ":" "real" ] block
    params    = param { "," param }
    param     = [ "inout" ] IDENT ":" type
    type      = "real" | "int" | "real" "[" expr "]"
    block     = "{" { "var" IDENT ":" type ";" } { stmt } "}"
    stmt      = assign ";" | call ";" | "return" [ expr ] ";"
              | "for" IDENT "in" expr ".." expr block
              | "while" expr block
              | "if" expr block [ "else" block ]

Expression precedence, loosest first:  ||  &&  comparisons  + -  * / %  unary.
"""

from __future__ import annotations

from . import ast
from .ast import Loc, ParseError
from .lexer import Token, tokenize


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.lines = source.splitlines() or [""]
        self.i = 0

    # -- token plumbing ----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def _excerpt(self, loc: Loc) -> str:
        if 0 < loc.line <= len(self.lines):
            return self.lines[loc.line - 1]
        return ""

    def error(self, message: str, loc: Loc | None = None) -> ParseError:
        loc = loc or self.cur.loc
        return ParseError(message, loc, self._excerpt(loc))

    def _advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.i += 1
        return tok

    def _at_op(self, text: str) -> bool:
        return self.cur.kind == "op" and self.cur.text == text

    def _at_kw(self, text: str) -> bool:
        return self.cur.kind == "kw" and self.cur.text == text

    def _eat_op(self, text: str) -> Token:
        if not self._at_op(text):
            raise self.error(f"expected '{text}', found '{self.cur.text or 'end of input'}'")
        return self._advance()

    def _eat_kw(self, text: str) -> Token:
        if not self._at_kw(text):
            raise self.error(f"expected '{text}', found '{self.cur.text or 'end of input'}'")
        return self._advance()

    def _eat_ident(self, what: str = "identifier") -> Token:
        if self.cur.kind != "ident":
            raise self.error(f"expected {what}, found '{self.cur.text or 'end of input'}'")
        tok = self._advance()
        if tok.text.startswith("_"):
            raise self.error("identifiers starting with '_' are reserved", tok.loc)
        return tok

    # -- declarations ------------------------------------------------------

    def parse_program(self) -> ast.Program:
        if self.cur.kind == "eof":
            raise self.error("expected function")
        functions = []
        seen: dict[str, Loc] = {}
        while self.cur.kind != "eof":
            fn = self.parse_function()
            if fn.name in seen:
                raise self.error(f"duplicate function name '{fn.name}'", fn.loc)
            seen[fn.name] = fn.loc
            functions.append(fn)
        return ast.Program(functions, loc=functions[0].loc)

    def parse_function(self) -> ast.FunctionDef:
        loc = self.cur.loc
        self._eat_kw("func")
        name = self._eat_ident("function name").text
        self._eat_op("(")
        params: list[ast.Param] = []
        if not self._at_op(")"):
            params.append(self.parse_param())
            while self._at_op(","):
                self._advance()
                params.append(self.parse_param())
        self._eat_op(")")
        return_kind = "void"
        if self._at_op(":"):
            self._advance()
            if self._at_kw("real"):
                self._advance()
                return_kind = "real"
            elif self._at_kw("void"):
                self._advance()
            else:
                raise self.error("expected return kind 'real' or 'void'")
        locals_, body = self.parse_block(allow_decls=True)
        return ast.FunctionDef(name, params, return_kind, locals_, body, loc=loc)

    def parse_param(self) -> ast.Param:
        loc = self.cur.loc
        direction = "in"
        if self._at_kw("inout"):
            self._advance()
            direction = "inout"
        name = self._eat_ident("parameter name").text
        self._eat_op(":")
        kind = self.parse_kind()
        return ast.Param(name, kind, direction, loc=loc)

    def parse_kind(self) -> ast.VarKind:
        if self._at_kw("int"):
            self._advance()
            return ast.INT
        self._eat_kw("real")
        if self._at_op("["):
            self._advance()
            length = self.parse_expr()
            self._eat_op("]")
            return ast.ArrayReal(length)
        return ast.REAL

    def parse_block(self, allow_decls: bool = False) -> tuple[list[ast.VarDecl], list[ast.Stmt]]:
        self._eat_op("{")
        decls: list[ast.VarDecl] = []
        if allow_decls:
            while self._at_kw("var"):
                loc = self._advance().loc
                name = self._eat_ident("variable name").text
                self._eat_op(":")
                kind = self.parse_kind()
                self._eat_op(";")
                decls.append(ast.VarDecl(name, kind, loc=loc))
        body: list[ast.Stmt] = []
        while not self._at_op("}"):
            if self.cur.kind == "eof":
                raise self.error("expected '}'")
            body.append(self.parse_stmt())
        self._eat_op("}")
        return decls, body

    # -- statements ----------------------------------------------------------

    def parse_stmt(self) -> ast.Stmt:
        loc = self.cur.loc
        if self._at_kw("return"):
            self._advance()
            value = None if self._at_op(";") else self.parse_expr()
            self._eat_op(";")
            return ast.Return(value, loc=loc)
        if self._at_kw("for"):
            self._advance()
            index = self._eat_ident("loop index").text
            self._eat_kw("in")
            lo = self.parse_expr()
            self._eat_op("..")
            hi = self.parse_expr()
            _, body = self.parse_block()
            return ast.For(index, lo, hi, body, loc=loc)
        if self._at_kw("while"):
            self._advance()
            cond = self.parse_expr()
            _, body = self.parse_block()
            return ast.While(cond, body, loc=loc)
        if self._at_kw("if"):
            self._advance()
            cond = self.parse_expr()
            _, then = self.parse_block()
            orelse: list[ast.Stmt] = []
            if self._at_kw("else"):
                self._advance()
                _, orelse = self.parse_block()
            return ast.If(cond, then, orelse, loc=loc)
        if self._at_kw("var"):
            raise self.error("variable declarations must precede statements")

        # Assignment or call statement.
        tok = self._eat_ident()
        if self._at_op("("):
            call = self._finish_call(tok.text, tok.loc)
            self._eat_op(";")
            return ast.CallStmt(call, loc=loc)
        target: ast.Expr = ast.Var(tok.text, loc=tok.loc)
        if self._at_op("["):
            self._advance()
            index = self.parse_expr()
            self._eat_op("]")
            target = ast.Index(tok.text, index, loc=tok.loc)
        self._eat_op("=")
        value = self.parse_expr()
        self._eat_op(";")
        return ast.Assign(target, value, loc=loc)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> ast.Expr:
        return self._parse_or()

    def _parse_or(self) -> ast.Expr:
        left = self._parse_and()
        while self._at_op("||"):
            loc = self._advance().loc
            right = self._parse_and()
            left = ast.BoolOp("||", left, right, loc=loc)
        return left

    def _parse_and(self) -> ast.Expr:
        left = self._parse_cmp()
        while self._at_op("&&"):
            loc = self._advance().loc
            right = self._parse_cmp()
            left = ast.BoolOp("&&", left, right, loc=loc)
        return left

    _CMP_OPS = ("==", "!=", "<=", ">=", "<", ">")

    def _parse_cmp(self) -> ast.Expr:
        left = self._parse_add()
        if self.cur.kind == "op" and self.cur.text in self._CMP_OPS:
            op = self._advance()
            right = self._parse_add()
            return ast.Cmp(op.text, left, right, loc=op.loc)
        return left

    def _parse_add(self) -> ast.Expr:
        left = self._parse_mul()
        while self.cur.kind == "op" and self.cur.text in ("+", "-"):
            op = self._advance()
            right = self._parse_mul()
            left = ast.Bin(op.text, left, right, loc=op.loc)
        return left

    def _parse_mul(self) -> ast.Expr:
        left = self._parse_unary()
        while self.cur.kind == "op" and self.cur.text in ("*", "/", "%"):
            op = self._advance()
            right = self._parse_unary()
            left = ast.Bin(op.text, left, right, loc=op.loc)
        return left

    def _parse_unary(self) -> ast.Expr:
        if self._at_op("-"):
            loc = self._advance().loc
            return ast.Neg(self._parse_unary(), loc=loc)
        if self._at_op("!"):
            loc = self._advance().loc
            return ast.Not(self._parse_unary(), loc=loc)
        return self._parse_atom()

    def _parse_atom(self) -> ast.Expr:
        tok = self.cur
        if tok.kind == "int":
            self._advance()
            return ast.IntNum(int(tok.text), loc=tok.loc)
        if tok.kind == "real":
            self._advance()
            # float() rounds decimal literals to the nearest binary64.
            return ast.Num(float(tok.text), loc=tok.loc)
        if tok.kind == "ident":
            self._advance()
            if self._at_op("("):
                return self._finish_call(tok.text, tok.loc)
            if self._at_op("["):
                self._advance()
                index = self.parse_expr()
                self._eat_op("]")
                return ast.Index(tok.text, index, loc=tok.loc)
            return ast.Var(tok.text, loc=tok.loc)
        if self._at_op("("):
            self._advance()
            inner = self.parse_expr()
            self._eat_op(")")
            return inner
        raise self.error(f"expected expression, found '{tok.text or 'end of input'}'")

    def _finish_call(self, func: str, loc: Loc) -> ast.Call:
        self._eat_op("(")
        args: list[ast.Expr] = []
        if not self._at_op(")"):
            args.append(self.parse_expr())
            while self._at_op(","):
                self._advance()
                args.append(self.parse_expr())
        self._eat_op(")")
        return ast.Call(func, args, loc=loc)


def parse(source: str) -> ast.Program:
    """Parse FPL source text into a Program.

    Raises ParseError with line:column and a source excerpt on bad input.
    """
    return Parser(source).parse_program()
