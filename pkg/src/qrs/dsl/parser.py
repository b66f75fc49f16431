"""Recursive-descent parser.

Precedence, loosest first: + -, then * /, then unary minus, then ^.
Binary operators associate to the left; ^ takes a unary operand on its
right, so a^-2 and a^b^c = a^(b^c) parse.
"""
from __future__ import annotations

from . import ast as A
from .errors import ParseError
from .lexer import Token, tokenize


class Parser:
    def __init__(self, tokens: list[Token], source: str | None = None):
        self.toks = tokens
        self.i = 0
        self.source = source

    # -- helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message, expected=(), tok=None):
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(_tok_text(t))
        if expected:
            message = f"{message}; expected {' or '.join(expected)}, found {found}"
        return ParseError(message, t.line, t.col, self.source, expected)

    def is_op(self, value) -> bool:
        return self.tok.kind == "op" and self.tok.value == value

    def is_kw(self, value) -> bool:
        return self.tok.kind == "ident" and self.tok.value == value

    def expect_op(self, value) -> Token:
        if not self.is_op(value):
            raise self.error("syntax error", (repr(value),))
        return self.advance()

    def expect_kw(self, value) -> Token:
        if not self.is_kw(value):
            raise self.error("syntax error", (repr(value),))
        return self.advance()

    def expect_ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            raise self.error("syntax error", (what,))
        return self.advance()

    # -- expressions
    def parse_expr(self):
        node = self.parse_term()
        while self.tok.kind == "op" and self.tok.value in "+-":
            t = self.advance()
            node = A.BinOp(t.value, node, self.parse_term(), pos=(t.line, t.col))
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.tok.kind == "op" and self.tok.value in "*/":
            t = self.advance()
            node = A.BinOp(t.value, node, self.parse_unary(), pos=(t.line, t.col))
        return node

    def parse_unary(self):
        if self.is_op("-"):
            t = self.advance()
            return A.Neg(self.parse_unary(), pos=(t.line, t.col))
        return self.parse_power()

    def parse_power(self):
        base = self.parse_primary()
        if self.is_op("^"):
            t = self.advance()
            return A.Pow(base, self.parse_unary(), pos=(t.line, t.col))
        return base

    def parse_primary(self):
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "int":
            self.advance()
            return A.Num(t.value, pos=pos)
        if t.kind == "weight":
            self.advance()
            return A.Weight(t.value, pos=pos)
        if t.kind == "indexed":
            name, idx = t.value
            if name in A.QUANTIFIERS:
                self.advance()
                if not isinstance(idx, str):
                    raise self.error("quantifier range must be a size name", tok=t)
                return self.parse_quant_body(name, idx, pos)
            self.advance()
            return A.Indexed(name, idx, pos=pos)
        if self.is_op("("):
            self.advance()
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if t.kind == "ident":
            name = t.value
            if name in A.QUANTIFIERS:
                self.advance()
                return self.parse_quant_body(name, None, pos)
            if name == "sum":
                return self.parse_sum()
            if name == "qp":
                return self.parse_qp()
            if name in ("inf",) or (name in A.KEYWORDS and name not in A.BUILTINS):
                raise self.error(f"keyword {name!r} cannot start an expression", ("expression",))
            self.advance()
            if self.is_op("("):
                self.advance()
                args = [self.parse_expr()]
                while self.is_op(","):
                    self.advance()
                    args.append(self.parse_expr())
                self.expect_op(")")
                return A.Call(name, tuple(args), pos=pos)
            return A.Name(name, pos=pos)
        raise self.error("syntax error", ("expression",))

    def parse_quant_body(self, kind, size, pos):
        self.expect_op("{")
        body = self.parse_expr()
        self.expect_op("}")
        return A.Quant(kind, size, body, pos=pos)

    def parse_sum(self):
        t = self.expect_kw("sum")
        self.expect_op("(")
        var = self.expect_ident("summation index").value
        self.expect_kw("in")
        self.expect_kw("box")
        self.expect_op("(")
        if self.is_kw("inf"):
            it = self.advance()
            bound = A.Inf(pos=(it.line, it.col))
        else:
            bound = self.parse_expr()
        self.expect_op(")")
        self.expect_op(")")
        self.expect_op("{")
        body = self.parse_expr()
        self.expect_op("}")
        return A.Sum(var, bound, body, pos=(t.line, t.col))

    def parse_qp(self):
        t = self.expect_kw("qp")
        self.expect_op("(")
        bases = [self.parse_expr()]
        while self.is_op(","):
            self.advance()
            bases.append(self.parse_expr())
        if not self.is_op(";"):
            raise self.error("q-Pochhammer needs a length", ("','", "';'"))
        self.advance()
        if self.is_kw("inf"):
            it = self.advance()
            length = A.Inf(pos=(it.line, it.col))
        else:
            length = self.parse_expr()
        self.expect_op(")")
        return A.QP(tuple(bases), length, pos=(t.line, t.col))

    # -- documents
    def parse_decl(self):
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return A.Decl(t.value, None, pos=(t.line, t.col))
        if t.kind == "indexed":
            self.advance()
            name, size = t.value
            return A.Decl(name, size, pos=(t.line, t.col))
        raise self.error("syntax error", ("declaration",))

    def parse_decl_list(self):
        out = [self.parse_decl()]
        while self.is_op(","):
            self.advance()
            out.append(self.parse_decl())
        return out

    def parse_document(self) -> A.Document:
        if self.tok.kind == "eof":
            raise self.error("expected identity document")
        fields = dict(id=None, anchor=None, title=None, dim=None)
        params, ints, sizes, seqs, externs, defs, forms = [], [], [], [], [], [], []
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind != "ident":
                raise self.error("syntax error", ("document item",))
            kw = t.value
            if kw == "identity":
                self.advance()
                fields["id"] = self.expect_ident("identity name").value
            elif kw in ("anchor", "title"):
                self.advance()
                if self.tok.kind != "string":
                    raise self.error("syntax error", ("string",))
                fields[kw] = self.advance().value
            elif kw == "dim":
                self.advance()
                if self.tok.kind == "int":
                    fields["dim"] = self.advance().value
                elif self.is_kw("n"):
                    self.advance()
                    fields["dim"] = "n"
                else:
                    raise self.error("syntax error", ("integer", "'n'"))
            elif kw == "params":
                self.advance()
                params.extend(self.parse_decl_list())
            elif kw == "ints":
                self.advance()
                ints.extend(self.parse_decl_list())
            elif kw == "size":
                self.advance()
                sizes.append(self.expect_ident("size name").value)
                while self.is_op(","):
                    self.advance()
                    sizes.append(self.expect_ident("size name").value)
            elif kw == "seqs":
                self.advance()
                seqs.append(self.expect_ident("sequence name").value)
                while self.is_op(","):
                    self.advance()
                    seqs.append(self.expect_ident("sequence name").value)
            elif kw == "extern":
                self.advance()
                name = self.expect_ident("function name")
                self.expect_op("(")
                formal = self.expect_ident("formal parameter").value
                self.expect_op(")")
                externs.append(A.Extern(name.value, formal, pos=(name.line, name.col)))
            elif kw == "def":
                defs.append(self.parse_def())
            elif kw == "form":
                forms.append(self.parse_form())
            else:
                raise self.error(f"unknown document item {kw!r}", ("document item",))
        if fields["id"] is None:
            raise ParseError("expected identity document: missing 'identity' header", 1, 1, self.source,
                             ("'identity'",))
        return A.Document(params=tuple(params), ints=tuple(ints), sizes=tuple(sizes), seqs=tuple(seqs),
                          externs=tuple(externs), defs=tuple(defs), forms=tuple(forms), **fields)

    def parse_def(self):
        self.expect_kw("def")
        t = self.tok
        pos = (t.line, t.col)
        if t.kind == "indexed":
            self.advance()
            name, formal = t.value
            if not isinstance(formal, str):
                raise self.error("formal parameter must be a name", tok=t)
            bracket = True
        else:
            name = self.expect_ident("function name").value
            formal, bracket = None, False
            if self.is_op("("):
                self.advance()
                formal = self.expect_ident("formal parameter").value
                self.expect_op(")")
        self.expect_op("=")
        body = self.parse_expr()
        self.expect_op(";")
        return A.Def(name, formal, bracket, body, pos=pos)

    def parse_form(self):
        t = self.expect_kw("form")
        if self.is_kw("terminating") or self.is_kw("nonterminating"):
            regime = self.advance().value
        else:
            raise self.error("syntax error", ("'terminating'", "'nonterminating'"))
        self.expect_op("{")
        lets = []
        while self.is_kw("let"):
            self.advance()
            name = self.expect_ident("name").value
            self.expect_op("=")
            lets.append((name, self.parse_expr()))
            self.expect_op(";")
        self.expect_kw("lhs")
        self.expect_op("=")
        lhs = self.parse_expr()
        self.expect_op(";")
        self.expect_kw("rhs")
        self.expect_op("=")
        rhs = self.parse_expr()
        self.expect_op(";")
        self.expect_op("}")
        return A.Form(regime, tuple(lets), lhs, rhs, pos=(t.line, t.col))


def _tok_text(t: Token) -> str:
    if t.kind == "indexed":
        return f"{t.value[0]}[{t.value[1]}]"
    if t.kind == "weight":
        return f"|{t.value}|"
    if t.kind == "string":
        return f'"{t.value}"'
    return str(t.value)


def parse_expr(source: str):
    p = Parser(tokenize(source), source)
    node = p.parse_expr()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input", ("end of input",))
    return node


def parse_document(source: str) -> A.Document:
    try:
        tokens = tokenize(source)
    except Exception as exc:  # attach source for rendering
        if hasattr(exc, "with_source"):
            exc.with_source(source)
        raise
    return Parser(tokens, source).parse_document()


def parse(source_or_tokens):
    """Parse a document if the text starts with a header keyword, else an expression."""
    if isinstance(source_or_tokens, list):
        p = Parser(source_or_tokens)
        if p.is_kw("identity"):
            return p.parse_document()
        node = p.parse_expr()
        if p.tok.kind != "eof":
            raise p.error("unexpected trailing input", ("end of input",))
        return node
    text = source_or_tokens
    toks = tokenize(text)
    if toks[0].kind == "ident" and toks[0].value in ("identity", "anchor", "title", "dim", "params"):
        return Parser(toks, text).parse_document()
    if toks[0].kind == "eof":
        raise ParseError("expected identity document", 1, 1, text)
    p = Parser(toks, text)
    node = p.parse_expr()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input", ("end of input",))
    return node
