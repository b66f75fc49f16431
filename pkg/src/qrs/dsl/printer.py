"""Pretty-printer whose output parses back to an equal AST."""
from __future__ import annotations

from . import ast as A

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG = 3
_POW = 4
_ATOM = 5


def _prec(node) -> int:
    if isinstance(node, A.BinOp):
        return _PREC[node.op]
    if isinstance(node, A.Neg):
        return _NEG
    if isinstance(node, A.Pow):
        return _POW
    return _ATOM


def _wrap(text, cond):
    return f"({text})" if cond else text


def pretty(node) -> str:
    if isinstance(node, A.Document):
        return pretty_document(node)
    if isinstance(node, A.Num):
        return str(node.value)
    if isinstance(node, A.Name):
        return node.name
    if isinstance(node, A.Indexed):
        return f"{node.name}[{node.index}]"
    if isinstance(node, A.Weight):
        return f"|{node.name}|"
    if isinstance(node, A.Inf):
        return "inf"
    if isinstance(node, A.Neg):
        return "-" + _wrap(pretty(node.operand), _prec(node.operand) < _NEG)
    if isinstance(node, A.BinOp):
        p = _PREC[node.op]
        left = _wrap(pretty(node.left), _prec(node.left) < p)
        right = _wrap(pretty(node.right), _prec(node.right) <= p)
        return f"{left} {node.op} {right}"
    if isinstance(node, A.Pow):
        # a^b^c parses as a^(b^c), but keep explicit parens for readability
        base = _wrap(pretty(node.base), _prec(node.base) < _ATOM)
        exp = _wrap(pretty(node.exp), _prec(node.exp) < _ATOM)
        return f"{base}^{exp}"
    if isinstance(node, A.Call):
        return f"{node.func}({', '.join(pretty(a) for a in node.args)})"
    if isinstance(node, A.QP):
        return f"qp({', '.join(pretty(b) for b in node.bases)}; {pretty(node.length)})"
    if isinstance(node, A.Quant):
        head = node.kind if node.size is None else f"{node.kind}[{node.size}]"
        return f"{head}{{ {pretty(node.body)} }}"
    if isinstance(node, A.Sum):
        return f"sum({node.var} in box({pretty(node.bound)})){{ {pretty(node.body)} }}"
    raise TypeError(f"cannot print {type(node).__name__}")


def _decl(d: A.Decl) -> str:
    return d.name if d.size is None else f"{d.name}[{d.size}]"


def pretty_document(doc: A.Document) -> str:
    out = [f"identity {doc.id}"]
    if doc.anchor is not None:
        out.append(f'anchor "{doc.anchor}"')
    if doc.title is not None:
        out.append(f'title "{doc.title}"')
    if doc.dim is not None:
        out.append(f"dim {doc.dim}")
    if doc.params:
        out.append("params " + ", ".join(_decl(d) for d in doc.params))
    if doc.ints:
        out.append("ints " + ", ".join(_decl(d) for d in doc.ints))
    if doc.sizes:
        out.append("size " + ", ".join(doc.sizes))
    if doc.seqs:
        out.append("seqs " + ", ".join(doc.seqs))
    for e in doc.externs:
        out.append(f"extern {e.name}({e.formal})")
    for d in doc.defs:
        if d.bracket:
            head = f"{d.name}[{d.formal}]"
        elif d.formal is not None:
            head = f"{d.name}({d.formal})"
        else:
            head = d.name
        out.append(f"def {head} = {pretty(d.body)};")
    for f in doc.forms:
        out.append(f"form {f.regime} {{")
        for name, expr in f.lets:
            out.append(f"  let {name} = {pretty(expr)};")
        out.append(f"  lhs = {pretty(f.lhs)};")
        out.append(f"  rhs = {pretty(f.rhs)};")
        out.append("}")
    return "\n".join(out) + "\n"
