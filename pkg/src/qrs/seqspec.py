"""Finitely supported coefficient families indexed by multi-indices."""
from __future__ import annotations

from typing import Mapping

from .exact import ONE, ZERO, format_rational, rat
from .multiindex import MultiIndex, format_index


class SeqSpec:
    """beta(j) or A_j: zero outside a finite support."""

    __slots__ = ("values", "n")

    def __init__(self, values: Mapping, n: int | None = None):
        vals = {}
        for k, v in values.items():
            v = rat(v)
            if v != 0:
                vals[MultiIndex(k)] = v
        dims = {len(k) for k in vals}
        if len(dims) > 1:
            raise ValueError("support indices have mixed dimensions")
        if n is None:
            n = dims.pop() if dims else None
        elif dims and dims != {n}:
            raise ValueError("support dimension does not match n")
        self.values = vals
        self.n = n

    @classmethod
    def delta(cls, n: int) -> "SeqSpec":
        return cls({(0,) * n: ONE}, n)

    @property
    def support(self):
        return sorted(self.values)

    def __call__(self, j):
        return self.values.get(tuple(j), ZERO)

    def is_delta(self) -> bool:
        return len(self.values) == 1 and all(v == ONE and sum(k) == 0 for k, v in self.values.items())

    def to_json(self) -> dict:
        return {format_index(k): format_rational(v) for k, v in sorted(self.values.items())}

    def __eq__(self, other):
        return isinstance(other, SeqSpec) and self.values == other.values

    def __repr__(self):
        return f"SeqSpec({self.to_json()})"
