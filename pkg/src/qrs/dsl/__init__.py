"""A small language for q-series identities: tokenizer, parser, printer, compiler."""
from . import ast
from .compiler import (CompiledDocument, CompiledForm, EvalContext, QVec, SideEvaluator, compile,
                       compile_document, compile_expr, link)
from .errors import BindError, DSLError, LexError, ParseError, RegimeError
from .lexer import Token, tokenize
from .parser import parse, parse_document, parse_expr
from .printer import pretty

__all__ = [
    "ast", "BindError", "CompiledDocument", "CompiledForm", "DSLError", "EvalContext", "LexError",
    "ParseError", "QVec", "RegimeError", "SideEvaluator", "Token", "compile", "compile_document",
    "compile_expr", "link", "load", "parse", "parse_document", "parse_expr", "pretty", "tokenize",
]


def load(path) -> CompiledDocument:
    """Parse and compile a .qid file, attaching the source to any diagnostic."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return compile_document(parse_document(text))
    except DSLError as exc:
        raise exc.with_source(text)
