"""AST node types.  Source positions are carried but excluded from equality."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

Pos = Optional[tuple]


@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Name:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Indexed:
    name: str
    index: Union[str, int]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Weight:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: object
    exp: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Inf:
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class QP:
    bases: tuple
    length: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Quant:
    kind: str
    size: Optional[str]
    body: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sum:
    var: str
    bound: object
    body: object
    pos: Pos = field(default=None, compare=False, repr=False)


QUANTIFIERS = {
    # name: (bound variables, aggregate)
    "prodr": (("r",), "prod"),
    "prodrs": (("r", "s"), "prod"),
    "prodrs_lt": (("r", "s"), "prod"),
    "prodrs_le": (("r", "s"), "prod"),
    "prodrs_ne": (("r", "s"), "prod"),
    "sumr": (("r",), "sum"),
    "sumrs_lt": (("r", "s"), "sum"),
}

BUILTINS = ("qpow", "binom2", "wt", "delta", "qvec")

KEYWORDS = frozenset(
    ["sum", "in", "box", "inf", "qp", "identity", "anchor", "title", "dim", "params",
     "ints", "size", "seqs", "extern", "def", "form", "let", "lhs", "rhs",
     "terminating", "nonterminating"]
) | frozenset(QUANTIFIERS) | frozenset(BUILTINS)


# -- document level --------------------------------------------------------

@dataclass(frozen=True)
class Decl:
    """A declared symbol; ``size`` is None for scalars, else "n" or a size name."""

    name: str
    size: Optional[Union[str, int]] = None
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Extern:
    name: str
    formal: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Def:
    name: str
    formal: Optional[str]
    bracket: bool
    body: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Form:
    regime: str
    lets: tuple
    lhs: object
    rhs: object
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Document:
    id: Optional[str]
    anchor: Optional[str] = None
    title: Optional[str] = None
    dim: Optional[Union[int, str]] = None
    params: tuple = ()
    ints: tuple = ()
    sizes: tuple = ()
    seqs: tuple = ()
    externs: tuple = ()
    defs: tuple = ()
    forms: tuple = ()

    def form(self, regime: str) -> Optional[Form]:
        for f in self.forms:
            if f.regime == regime:
                return f
        return None

    @property
    def regimes(self) -> tuple:
        return tuple(f.regime for f in self.forms)
