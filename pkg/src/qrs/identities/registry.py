"""The registry of built-in identities and the auxiliary documents they refer to."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable, Optional

from ..dsl import CompiledDocument, compile_document, link, parse_document
from ..dsl import ast as A
from ..dsl.errors import DSLError
from ..errors import UnknownIdentity

IDS = (
    "liu_main1", "liu_gen1", "wang_ma2", "wang_ma1", "pfaff_saalschutz", "an_bailey_inverse",
    "an_trans1", "an_result5a", "an3p2_1", "an_result5b", "an3p2_2", "cn_bailey_inverse",
    "an_cntrans1", "an_cntrans2", "dn3p2_1", "cn_nt6p5", "cn_antrans3", "dn_result5", "dn3p2",
    "liu_app1", "cn_app1", "liu3", "an_liu3",
)

BAILEY = {
    "an_bailey_inverse": ("an", "Prop. 2.1", "A_n Bailey transform pair"),
    "cn_bailey_inverse": ("cn", "Prop. 3.1", "C_n Bailey transform pair"),
}

# n = 1 counterparts: generic id -> (one-variable id, regime)
COUNTERPARTS = {
    "an_trans1": ("wang_ma1", "terminating"),
    "an_cntrans1": ("wang_ma1", "terminating"),
    "cn_antrans3": ("wang_ma1", "terminating"),
    "an_result5a": ("wang_ma2", "terminating"),
    "an_result5b": ("wang_ma2", "terminating"),
    "an_cntrans2": ("wang_ma2", "terminating"),
    "dn_result5": ("wang_ma2", "terminating"),
    "an_liu3": ("liu3", "terminating"),
    "an3p2_1": ("pfaff_saalschutz", "terminating"),
    "an3p2_2": ("pfaff_saalschutz", "terminating"),
    "dn3p2": ("pfaff_saalschutz", "terminating"),
    "dn3p2_1": ("pfaff_saalschutz", "terminating"),
    "cn_app1": ("liu_app1", "terminating"),
    "cn_nt6p5": ("rogers_6phi5", "nonterminating"),
}

# Expansion theorems with a free K(y): their right-hand sides diverge for
# generic K, so they are never run through the numeric path.
NUMERIC_INELIGIBLE = frozenset({"wang_ma1", "an_trans1", "an_cntrans1", "cn_antrans3"})


def _abs(v):
    return abs(v)


def _prod(vals):
    out = 1
    for v in vals:
        out *= v
    return out


def _conv_wang(p):
    y, A, a, b, q = p.y, p.A, p.a, p.b, p.q
    return [("|y|", _abs(y)), ("|Ay|", _abs(A * y)), ("|bq/aA|", _abs(b * q / (a * A)))]


def _conv_an5a(p):
    Y = _prod(p.y)
    return [("|Y|", _abs(Y)), ("|AY|", _abs(p.A * Y)), ("|bq/aA|", _abs(p.b * p.q / (p.a * p.A)))]


def _conv_gustafson(p):
    return [("|aq/bCd|", _abs(p.a * p.q / (p.b * _prod(p.c) * p.d)))]


def _conv_cn_app1(p):
    # disk of analyticity in y: every y-dependent base of an lhs denominator product stays inside |.| < 1
    Y = _prod(p.y)
    n = len(p.y)
    out = [("|Y|", _abs(Y)), ("|aAY|", _abs(p.a * p.A * Y))]
    out += [(f"|y{r + 1}|", _abs(v)) for r, v in enumerate(p.y)]
    out += [(f"|aq x{r + 1} x{s + 1} y{s + 1}|", _abs(p.a * p.q * p.x[r] * p.x[s] * p.y[s]))
            for r in range(n) for s in range(n)]
    return out


def _conv_h_cd(p):
    n = len(p.y)
    return [(f"|aC y{s + 1} x{r + 1}/x{s + 1}|", _abs(p.a * p.hC * p.y[s] * p.x[r] / p.x[s]))
            for r in range(n) for s in range(n)]


def _conv_h_gh_jk(p):
    return ([(f"|aG x{r + 1} y{r + 1}|", _abs(p.a * p.hG * p.x[r] * p.y[r])) for r in range(len(p.y))]
            + [("|aJY|", _abs(p.a * p.hJ * _prod(p.y)))])


def _conv_h_pow_ef(p):
    n = len(p.y)
    return [(f"|aE x{r + 1} x{s + 1} y{s + 1}|", _abs(p.a * p.hE * p.x[r] * p.x[s] * p.y[s]))
            for r in range(n) for s in range(n)]


def _conv_liu_app1(p):
    out = [("|y|", _abs(p.y)), ("|aqy|", _abs(p.a * p.q * p.y))]
    return out + [(f"|aA{r + 1}y|", _abs(p.a * v * p.y)) for r, v in enumerate(p.A)]


def _conv_rogers(p):
    return [("|aq/bcd|", _abs(p.a * p.q / (p.b * p.c * p.d)))]


def _conv_milne(p):
    return [("|aq/bdC|", _abs(p.a * p.q / (p.b * p.d * _prod(p.c))))]


@dataclass(frozen=True)
class Convergence:
    """Quantities that must be < 1 for the nonterminating form; ``printed`` marks conditions stated in the source."""

    quantities: Callable
    printed: bool


CONVERGENCE = {
    "wang_ma2": Convergence(_conv_wang, True),
    "an_result5a": Convergence(_conv_an5a, True),
    "an_cntrans2": Convergence(_conv_an5a, False),
    "cn_nt6p5": Convergence(_conv_gustafson, True),
    "cn_app1": Convergence(_conv_cn_app1, False),
    "liu_app1": Convergence(_conv_liu_app1, False),
    "rogers_6phi5": Convergence(_conv_rogers, True),
    "milne_an_6phi5": Convergence(_conv_milne, True),
}

# Extra conditions contributed by the H(y) fragments linked into cn_app1.
H_CONVERGENCE = {
    "one": lambda p: [],
    "cd": _conv_h_cd,
    "gh_jk": _conv_h_gh_jk,
    "pow_ef": _conv_h_pow_ef,
}


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # scalar, vector, int, intvec, seq, extern
    size: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "size": self.size}


@dataclass
class IdentitySpec:
    id: str
    anchor: str
    title: str
    n: object  # 1 or "n"
    regimes: tuple
    schema: tuple
    reductions: tuple = ()
    counterpart: Optional[str] = None
    numeric_eligible: bool = False
    convergence: Optional[Convergence] = None
    delegate: Optional[str] = None
    document: Optional[CompiledDocument] = None

    def form(self, regime: Optional[str] = None):
        if self.document is None:
            raise DSLError(f"{self.id} is evaluated by the Bailey module, not by a document")
        return self.document.form(regime or self.regimes[0])

    @property
    def lhs(self):
        return self.form().lhs if self.document is not None else None

    @property
    def rhs(self):
        return self.form().rhs if self.document is not None else None

    @property
    def nonterminating_only(self) -> bool:
        return self.regimes == ("nonterminating",)

    @property
    def generic(self) -> bool:
        return self.n == "n"


def _data(*parts):
    return resources.files("qrs.identities").joinpath("data", *parts)


@lru_cache(maxsize=None)
def source(name: str, kind: str = "") -> str:
    """Text of a shipped document; ``kind`` is "", "targets" or "fragments"."""
    path = _data(kind, f"{name}.qid") if kind else _data(f"{name}.qid")
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UnknownIdentity(name) from None


@lru_cache(maxsize=None)
def document(name: str, kind: str = "") -> A.Document:
    text = source(name, kind)
    try:
        return parse_document(text)
    except DSLError as exc:
        raise exc.with_source(text)


@lru_cache(maxsize=None)
def compiled(name: str, kind: str = "") -> CompiledDocument:
    return compile_document(document(name, kind))


@lru_cache(maxsize=None)
def linked(host: str, *fragments: str, regimes: Optional[tuple] = None) -> CompiledDocument:
    """A registry document with externs resolved by shipped fragments."""
    return compile_document(link(document(host), *(document(f, "fragments") for f in fragments), regimes=regimes))


def target(name: str) -> CompiledDocument:
    return compiled(name, "targets")


def shipped_documents() -> list:
    """(kind, name) of every shipped .qid file, sorted."""
    out = []
    for kind in ("", "targets", "fragments"):
        folder = _data(kind) if kind else _data()
        for entry in folder.iterdir():
            if entry.name.endswith(".qid"):
                out.append((kind, entry.name[:-4]))
    return sorted(out)


def _schema(doc: A.Document) -> tuple:
    out = []
    for d in doc.params:
        out.append(Param(d.name, "scalar" if d.size is None else "vector", d.size))
    for d in doc.ints:
        out.append(Param(d.name, "int" if d.size is None else "intvec", d.size))
    out += [Param(s, "seq") for s in doc.seqs]
    out += [Param(e.name, "extern") for e in doc.externs]
    return tuple(out)


def _reductions():
    from .reductions import REDUCTIONS
    out: dict = {}
    for name, red in REDUCTIONS.items():
        out.setdefault(red.source, []).append(name)
    return out


@lru_cache(maxsize=None)
def builtin_identity(id: str) -> IdentitySpec:
    if id not in IDS:
        raise UnknownIdentity(id)
    if id in BAILEY:
        system, anchor, title = BAILEY[id]
        schema = (Param("a", "scalar"), Param("x", "vector", "n"), Param("N", "intvec", "n"))
        return IdentitySpec(id, anchor, title, "n", ("terminating",), schema, delegate=system)
    doc = compiled(id)
    ast = doc.doc
    return IdentitySpec(
        id=id, anchor=ast.anchor, title=ast.title, n=ast.dim, regimes=ast.regimes, schema=_schema(ast),
        reductions=tuple(_reductions().get(id, ())), counterpart=COUNTERPARTS.get(id, (None,))[0],
        numeric_eligible="nonterminating" in ast.regimes and id not in NUMERIC_INELIGIBLE,
        convergence=CONVERGENCE.get(id), document=doc)


def all_identities() -> list:
    return [builtin_identity(i) for i in IDS]
