"""Vandermonde products, the series kernels f and g, and product lemmas.

Indices r, s in the formulas are 1-based; the code uses 0-based positions,
so the exponent sum_r (r-1) k_r is ``sum(i * k[i])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import DimensionMismatch
from .exact import ONE, Rational, binom2, format_rational, rat, rat_pow
from .qpoch import qpoch


@dataclass(frozen=True)
class ParamPoint:
    """Named assignment of every free symbol to an exact rational.

    Scalars live in ``scalars``; vectors of length n (x, y, c, ...) in
    ``vectors``.  ``q`` is always present.
    """

    n: int
    q: Rational
    scalars: Mapping[str, Rational] = field(default_factory=dict)
    vectors: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if self.q == 0:
            raise ValueError("q must be nonzero")

    def __getattr__(self, name):
        # only called for names that are not dataclass fields
        scalars = object.__getattribute__(self, "scalars")
        if name in scalars:
            return scalars[name]
        vectors = object.__getattribute__(self, "vectors")
        if name in vectors:
            return vectors[name]
        raise AttributeError(name)

    def get(self, name, default=None):
        if name == "q":
            return self.q
        if name in self.scalars:
            return self.scalars[name]
        return self.vectors.get(name, default)

    def replace(self, **values) -> "ParamPoint":
        q = values.pop("q", self.q)
        scalars = dict(self.scalars)
        vectors = dict(self.vectors)
        for k, v in values.items():
            if isinstance(v, (tuple, list)):
                vectors[k] = tuple(rat(t) for t in v)
                scalars.pop(k, None)
            else:
                scalars[k] = rat(v)
                vectors.pop(k, None)
        return ParamPoint(self.n, rat(q), scalars, vectors)

    def to_json(self) -> dict:
        out = {"q": format_rational(self.q)}
        for k in sorted(self.scalars):
            out[k] = format_rational(self.scalars[k])
        for k in sorted(self.vectors):
            out[k] = [format_rational(v) for v in self.vectors[k]]
        return out


def _powq(q, e):
    return rat_pow(q, e)


def r1sum(k) -> int:
    """sum_r (r-1) k_r with 1-based r."""
    return sum(i * c for i, c in enumerate(k))


def rsum(k) -> int:
    """sum_r r k_r with 1-based r."""
    return sum((i + 1) * c for i, c in enumerate(k))


def vandermonde_A(x, k, q) -> Rational:
    if len(x) != len(k):
        raise DimensionMismatch("x and k differ in length")
    n = len(x)
    out = ONE
    for r in range(n):
        for s in range(r + 1, n):
            ratio = x[r] / x[s]
            out *= (1 - _powq(q, k[r] - k[s]) * ratio) / (1 - ratio)
    return out


def f1(y, a, q, k: int) -> Rational:
    """One-variable kernel (1 - a q^{2k}) (1/y)_k / (aqy)_k * y^k."""
    y, a, q = rat(y), rat(a), rat(q)
    return (1 - a * q ** (2 * k)) * qpoch(1 / y, q, k) / qpoch(a * q * y, q, k) * y ** k


def f_An(y, a, x, q, k) -> Rational:
    n = len(x)
    if len(y) != n or len(k) != n:
        raise DimensionMismatch("y, x and k must share the dimension")
    a, q = rat(a), rat(q)
    K = sum(k)
    out = vandermonde_A(x, k, q)
    for r in range(n):
        for s in range(n):
            out *= qpoch(x[r] / (x[s] * y[s]), q, k[r])
    Y = ONE
    for r in range(n):
        out *= (1 - a * x[r] * _powq(q, k[r] + K)) / qpoch(a * q * x[r] * y[r], q, K)
        Y *= y[r]
    return out * Y ** K * _powq(q, r1sum(k))


def g_Cn(y, a, x, q, j) -> Rational:
    n = len(x)
    if len(y) != n or len(j) != n:
        raise DimensionMismatch("y, x and j must share the dimension")
    a, q = rat(a), rat(q)
    J = sum(j)
    out = ONE
    for r in range(n):
        for s in range(r + 1, n):
            ratio = x[r] / x[s]
            out *= (1 - _powq(q, j[r] - j[s]) * ratio) / (1 - ratio)
            out *= 1 - a * x[r] * x[s] * _powq(q, j[r] + j[s])
    Y = ONE
    for r in range(n):
        out *= 1 - a * x[r] ** 2 * _powq(q, 2 * j[r])
        Y *= y[r]
        for s in range(n):
            out *= qpoch(x[r] / (x[s] * y[s]), q, j[r]) / qpoch(a * q * x[r] * x[s] * y[s], q, j[r])
    return out * Y ** J * _powq(q, r1sum(j))


# -- product rewrite lemmas -------------------------------------------------

def _magiclemma2(x, q, k, m):
    n = len(x)
    lhs = ONE
    for r in range(n):
        for s in range(n):
            lhs /= qpoch(_powq(q, 1 + m[r] - m[s]) * x[r] / x[s], q, k[r] - m[r])
    M, Kw = sum(m), sum(k)
    rhs = vandermonde_A(x, m, q)
    for r in range(n):
        for s in range(n):
            rhs *= qpoch(_powq(q, -k[s]) * x[r] / x[s], q, m[r]) / qpoch(q * x[r] / x[s], q, k[r])
    rhs *= (-1) ** M * _powq(q, Kw * M - binom2(M) + r1sum(m))
    return lhs, rhs


def _milne_3_12(x, q, j):
    n = len(x)
    lhs = ONE
    for r in range(n):
        for s in range(n):
            lhs *= qpoch(q * x[r] / x[s], q, j[r] - j[s])
    J = sum(j)
    rhs = vandermonde_A(x, j, q) * (-1) ** ((n - 1) * J)
    rhs *= _powq(q, r1sum(j) + n * sum(binom2(t) for t in j) - binom2(J))
    for r in range(n):
        rhs *= rat_pow(x[r], n * j[r] - J)
    return lhs, rhs


def _elem1(x, q, k, j, m):
    n = len(x)
    lhs = ONE
    rhs = ONE
    for r in range(n):
        for s in range(n):
            ratio = x[r] / x[s]
            lhs *= qpoch(_powq(q, -k[s]) * ratio, q, j[r] + m[r])
            lhs *= qpoch(_powq(q, -m[s] - j[s]) * ratio, q, j[r])
            lhs /= qpoch(q * ratio, q, j[r] + m[r])
            rhs *= qpoch(_powq(q, -k[s]) * ratio, q, j[r])
            rhs *= qpoch(_powq(q, j[r] - k[s]) * ratio, q, m[r])
            rhs /= qpoch(_powq(q, 1 + j[r] - j[s]) * ratio, q, m[r])
    for r in range(n):
        for s in range(r + 1, n):
            ratio = x[r] / x[s]
            rhs *= (1 - ratio) / (1 - _powq(q, j[r] - j[s]) * ratio)
    J, M = sum(j), sum(m)
    rhs *= (-1) ** J * _powq(q, -r1sum(j) - J * M - J * J + binom2(J))
    return lhs, rhs


LEMMAS = {
    "magiclemma2": (_magiclemma2, 2),
    "milne_3_12": (_milne_3_12, 1),
    "elem1": (_elem1, 3),
}


def product_lemma_sides(which: str, point: ParamPoint, indices):
    """Both sides of a product lemma at ``point``.

    ``indices`` is (k, m) for magiclemma2, (j,) for milne_3_12 and
    (k, j, m) for elem1.
    """
    try:
        fn, arity = LEMMAS[which]
    except KeyError:
        raise ValueError(f"unknown product lemma {which!r}") from None
    if len(indices) != arity:
        raise ValueError(f"{which} takes {arity} index tuples")
    x = point.vectors["x"]
    for idx in indices:
        if len(idx) != len(x):
            raise DimensionMismatch("index and x differ in length")
    return fn(x, point.q, *indices)


def check_product_lemma(which: str, point: ParamPoint, indices) -> bool:
    lhs, rhs = product_lemma_sides(which, point, indices)
    return lhs == rhs
