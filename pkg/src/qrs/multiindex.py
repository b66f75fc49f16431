"""Multi-indices, rectangular boxes and lexicographic iteration."""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator

from .errors import DimensionMismatch


class MultiIndex(tuple):
    """An n-tuple of non-negative integers."""

    __slots__ = ()

    def __new__(cls, components: Iterable[int] = ()):
        comps = tuple(components)
        for c in comps:
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ValueError(f"multi-index components must be non-negative ints, got {comps!r}")
        return super().__new__(cls, comps)

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    @property
    def n(self) -> int:
        return len(self)

    @property
    def weight(self) -> int:
        return sum(self)

    def __repr__(self):
        return f"MultiIndex({format_index(self)})"

    def __str__(self):
        return format_index(self)


def _check_dims(a, b):
    if len(a) != len(b):
        raise DimensionMismatch(f"dimensions differ: {len(a)} vs {len(b)}")


def weight(k) -> int:
    return sum(k)


def add(j, m) -> MultiIndex:
    _check_dims(j, m)
    return MultiIndex(a + b for a, b in zip(j, m))


def sub(k, j) -> MultiIndex:
    """Component-wise k - j; requires j <= k."""
    _check_dims(k, j)
    return MultiIndex(a - b for a, b in zip(k, j))


def leq_componentwise(m, k) -> bool:
    _check_dims(m, k)
    return all(a <= b for a, b in zip(m, k))


def iter_box(N) -> Iterator[MultiIndex]:
    """All m with 0 <= m_r <= N_r, leftmost component most significant."""
    for comps in itertools.product(*(range(b + 1) for b in N)):
        yield MultiIndex(comps)


def box_size(N) -> int:
    size = 1
    for b in N:
        size *= b + 1
    return size


class Box:
    """Inclusive rectangular index domain [0, N]."""

    __slots__ = ("bounds",)

    def __init__(self, bounds):
        self.bounds = MultiIndex(bounds)

    @property
    def n(self) -> int:
        return len(self.bounds)

    def __iter__(self):
        return iter_box(self.bounds)

    def __len__(self):
        return box_size(self.bounds)

    def __contains__(self, m) -> bool:
        return len(m) == self.n and leq_componentwise(m, self.bounds)

    def __eq__(self, other):
        return isinstance(other, Box) and other.bounds == self.bounds

    def __hash__(self):
        return hash(("Box", self.bounds))

    def __repr__(self):
        return f"Box({format_index(self.bounds)})"


def format_index(k) -> str:
    return "[" + ",".join(str(c) for c in k) + "]"


def parse_index(text: str) -> MultiIndex:
    s = text.strip()
    if s.startswith("[") and s.endswith("]"):
        s = s[1:-1]
    if not s.strip():
        return MultiIndex(())
    return MultiIndex(int(part) for part in s.split(","))
