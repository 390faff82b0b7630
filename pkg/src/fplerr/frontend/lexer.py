"""Hand-written lexer for FPL source text."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Loc, ParseError

KEYWORDS = {
    "func",
    "var",
    "return",
    "for",
    "in",
    "while",
    "if",
    "else",
    "real",
    "int",
    "void",
    "inout",
}

# Multi-character operators first so maximal munch works.
_OPS = [
    "..",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "(",
    ")",
    "{",
    "}",
    "[",
    "]",
    ",",
    ";",
    ":",
    "=",
    "+",
    "-",
    "*",
    "/",
    "%",
    "<",
    ">",
    "!",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "kw" | "int" | "real" | "op" | "eof"
    text: str
    loc: Loc


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


class Lexer:
    def __init__(self, source: str):
        self.src = source
        self.lines = source.splitlines() or [""]
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str, loc: Loc | None = None) -> ParseError:
        loc = loc or Loc(self.line, self.col)
        excerpt = self.lines[loc.line - 1] if 0 < loc.line <= len(self.lines) else ""
        return ParseError(message, loc, excerpt)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.src) and self.src[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def _skip_trivia(self) -> None:
        while self.pos < len(self.src):
            c = self.src[self.pos]
            if c in " \t\r\n":
                self._advance()
            elif self.src.startswith("//", self.pos):
                while self.pos < len(self.src) and self.src[self.pos] != "\n":
                    self._advance()
            else:
                return

    def _lex_number(self) -> Token:
        loc = Loc(self.line, self.col)
        start = self.pos
        src = self.src
        n = len(src)
        i = self.pos
        while i < n and src[i].isdigit():
            i += 1
        is_real = False
        # A '..' after digits is the range operator, not a decimal point.
        if i < n and src[i] == "." and not src.startswith("..", i):
            is_real = True
            i += 1
            while i < n and src[i].isdigit():
                i += 1
        if i < n and src[i] in "eE":
            j = i + 1
            if j < n and src[j] in "+-":
                j += 1
            if j < n and src[j].isdigit():
                is_real = True
                i = j
                while i < n and src[i].isdigit():
                    i += 1
        text = src[start:i]
        self._advance(i - start)
        if self.pos < n and _is_ident_start(src[self.pos]):
            raise self.error(f"malformed number '{text}{src[self.pos]}'", loc)
        return Token("real" if is_real else "int", text, loc)

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while True:
            self._skip_trivia()
            if self.pos >= len(self.src):
                out.append(Token("eof", "", Loc(self.line, self.col)))
                return out
            loc = Loc(self.line, self.col)
            c = self.src[self.pos]
            if c.isdigit():
                out.append(self._lex_number())
            elif c == "." and self.pos + 1 < len(self.src) and self.src[self.pos + 1].isdigit():
                out.append(self._lex_number_leading_dot())
            elif _is_ident_start(c):
                start = self.pos
                while self.pos < len(self.src) and _is_ident_char(self.src[self.pos]):
                    self._advance()
                text = self.src[start : self.pos]
                out.append(Token("kw" if text in KEYWORDS else "ident", text, loc))
            else:
                for op in _OPS:
                    if self.src.startswith(op, self.pos):
                        self._advance(len(op))
                        out.append(Token("op", op, loc))
                        break
                else:
                    raise self.error(f"unexpected character {c!r}", loc)

    def _lex_number_leading_dot(self) -> Token:
        loc = Loc(self.line, self.col)
        start = self.pos
        src = self.src
        i = self.pos + 1
        while i < len(src) and src[i].isdigit():
            i += 1
        if i < len(src) and src[i] in "eE":
            j = i + 1
            if j < len(src) and src[j] in "+-":
                j += 1
            if j < len(src) and src[j].isdigit():
                i = j
                while i < len(src) and src[i].isdigit():
                    i += 1
        text = src[start:i]
        self._advance(i - start)
        return Token("real", text, loc)


def tokenize(source: str) -> list[Token]:
    return Lexer(source).tokens()
