"""Tokenizer for Lumen source.

Double-quoted comments vanish here. Keyword tokens are an identifier glued
to a colon (at:), which keeps them distinct from the := assignment arrow
and from block-parameter colons (:x).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ParseError
from .nodes import SourceSpan


class TokenType(enum.Enum):
    INT = enum.auto()
    STRING = enum.auto()
    SYMBOL = enum.auto()
    IDENT = enum.auto()
    KEYWORD = enum.auto()    # trailing colon included: "at:"
    BINOP = enum.auto()
    ASSIGN = enum.auto()     # :=
    CARET = enum.auto()
    DOT = enum.auto()
    PIPE = enum.auto()
    COLON = enum.auto()
    LPAREN = enum.auto()
    RPAREN = enum.auto()
    LBRACKET = enum.auto()
    RBRACKET = enum.auto()
    LBRACE = enum.auto()
    RBRACE = enum.auto()
    EOF = enum.auto()


@dataclass(frozen=True)
class Token:
    type: TokenType
    text: str
    start: int
    end: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.start, self.end)

    def __repr__(self) -> str:
        return f"Token({self.type.name}, {self.text!r}, {self.start})"


BINOP_CHARS = set("+-*/\\~<>=&@%,?!")

_SINGLE = {
    "^": TokenType.CARET,
    ".": TokenType.DOT,
    "|": TokenType.PIPE,
    "(": TokenType.LPAREN,
    ")": TokenType.RPAREN,
    "[": TokenType.LBRACKET,
    "]": TokenType.RBRACKET,
    "{": TokenType.LBRACE,
    "}": TokenType.RBRACE,
}


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == '"':  # comment
            j = source.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated comment", SourceSpan(i, n))
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token(TokenType.INT, source[i:j], i, j))
            i = j
            continue
        if ch == "'":
            j = i + 1
            parts = []
            while True:
                if j >= n:
                    raise ParseError("unterminated string", SourceSpan(i, n))
                if source[j] == "'":
                    if j + 1 < n and source[j + 1] == "'":
                        parts.append("'")
                        j += 2
                        continue
                    break
                parts.append(source[j])
                j += 1
            tokens.append(Token(TokenType.STRING, "".join(parts), i, j + 1))
            i = j + 1
            continue
        if ch == "#":
            j = i + 1
            if j < n and (source[j].isalpha() or source[j] == "_"):
                while j < n and (source[j].isalnum() or source[j] == "_"):
                    j += 1
                while j < n and source[j] == ":":
                    j += 1
                    while j < n and (source[j].isalnum() or source[j] == "_"):
                        j += 1
            elif j < n and source[j] in BINOP_CHARS:
                while j < n and source[j] in BINOP_CHARS:
                    j += 1
            else:
                raise ParseError("malformed symbol literal", SourceSpan(i, i + 1))
            tokens.append(Token(TokenType.SYMBOL, source[i + 1:j], i, j))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            if j < n and source[j] == ":" and not (j + 1 < n and source[j + 1] == "="):
                tokens.append(Token(TokenType.KEYWORD, source[i:j + 1], i, j + 1))
                i = j + 1
            else:
                tokens.append(Token(TokenType.IDENT, source[i:j], i, j))
                i = j
            continue
        if ch == ":":
            if i + 1 < n and source[i + 1] == "=":
                tokens.append(Token(TokenType.ASSIGN, ":=", i, i + 2))
                i += 2
            else:
                tokens.append(Token(TokenType.COLON, ":", i, i + 1))
                i += 1
            continue
        if ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], ch, i, i + 1))
            i += 1
            continue
        if ch in BINOP_CHARS:
            j = i
            while j < n and source[j] in BINOP_CHARS:
                j += 1
            tokens.append(Token(TokenType.BINOP, source[i:j], i, j))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", SourceSpan(i, i + 1))
    tokens.append(Token(TokenType.EOF, "", n, n))
    return tokens
