"""Tokenizer for .qid documents and term expressions."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexError


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, indexed, weight, string, op, eof
    value: object
    line: int
    col: int

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


_SPEC = [
    ("ws", r"[ \t\r]+"),
    ("nl", r"\n"),
    ("comment", r"#[^\n]*"),
    ("indexed", r"[A-Za-z_][A-Za-z0-9_]*\[[ \t]*(?:[A-Za-z_][A-Za-z0-9_]*|[0-9]+)[ \t]*\]"),
    ("weight", r"\|[ \t]*[A-Za-z_][A-Za-z0-9_]*[ \t]*\|"),
    ("ident", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("int", r"[0-9]+"),
    ("string", r'"[^"\n]*"'),
    ("op", r"[()\[\]{},;+\-*/^=]"),
]
_MASTER = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _SPEC))
_INDEXED = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\[[ \t]*([A-Za-z0-9_]+)[ \t]*\]")


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _MASTER.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            bad = source[pos]
            raise LexError(f"unexpected character {bad!r}", line, col, source)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "int":
            tokens.append(Token("int", int(text), line, col))
        elif kind == "indexed":
            name, idx = _INDEXED.fullmatch(text).groups()
            tokens.append(Token("indexed", (name, int(idx) if idx.isdigit() else idx), line, col))
        elif kind == "weight":
            tokens.append(Token("weight", text.strip("| \t"), line, col))
        elif kind == "string":
            tokens.append(Token("string", text[1:-1], line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", None, line, pos - line_start + 1))
    return tokens
