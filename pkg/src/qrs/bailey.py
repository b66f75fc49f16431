"""Bailey matrix pairs, a generic triangular inverter and the expansion engine."""
from __future__ import annotations

import itertools

from typing import Callable, Mapping

from .errors import DivisionByZero, SingularDiagonal
from .exact import ONE, ZERO, rat, rat_pow
from .kernels import r1sum, rsum, vandermonde_A
from .multiindex import MultiIndex, add, box_size, iter_box, leq_componentwise, sub
from .qpoch import qpoch


def _qp(cache):
    return cache.qpoch if cache is not None else qpoch


# -- closed-form entries ----------------------------------------------------

def F1(a, q, k: int, m: int, cache=None):
    if m > k:
        return ZERO
    qp = _qp(cache)
    return (1 - a * q ** (2 * m)) * qp(rat_pow(q, -k), q, m) / qp(a * q ** (k + 1), q, m) * q ** (k * m)


def G1(a, q, k: int, m: int, cache=None):
    if m > k:
        return ZERO
    qp = _qp(cache)
    return (qp(rat_pow(q, -k), q, m) * qp(a * q ** m, q, k)
            / ((1 - a * q ** m) * qp(q, q, m) * qp(q, q, k)) * q ** m)


def F_An(a, x, q, k, m, cache=None):
    if not leq_componentwise(m, k):
        return ZERO
    qp = _qp(cache)
    n = len(x)
    Kw, Mw = sum(k), sum(m)
    out = vandermonde_A(x, m, q) * rat_pow(q, r1sum(m) + Kw * Mw)
    for r in range(n):
        for s in range(n):
            out *= qp(rat_pow(q, -k[s]) * x[r] / x[s], q, m[r])
    for r in range(n):
        out *= (1 - a * x[r] * q ** (m[r] + Mw)) / qp(a * x[r] * q ** (k[r] + 1), q, Mw)
    return out


def G_An(a, x, q, k, m, cache=None):
    if not leq_componentwise(m, k):
        return ZERO
    qp = _qp(cache)
    n = len(x)
    Kw = sum(k)
    out = vandermonde_A(x, m, q) * rat_pow(q, rsum(m))
    for r in range(n):
        for s in range(n):
            ratio = x[r] / x[s]
            out *= qp(rat_pow(q, -k[s]) * ratio, q, m[r]) / (qp(q * ratio, q, k[r]) * qp(q * ratio, q, m[r]))
    for r in range(n):
        t = a * x[r] * q ** m[r]
        out *= qp(t, q, Kw) / (1 - t)
    return out


def F_Cn(a, x, q, k, m, cache=None):
    if not leq_componentwise(m, k):
        return ZERO
    qp = _qp(cache)
    n = len(x)
    Kw, Mw = sum(k), sum(m)
    out = vandermonde_A(x, m, q) * rat_pow(q, r1sum(m) + Kw * Mw)
    for r in range(n):
        for s in range(r, n):
            out *= 1 - a * x[r] * x[s] * q ** (m[r] + m[s])
    for r in range(n):
        for s in range(n):
            out *= qp(rat_pow(q, -k[s]) * x[r] / x[s], q, m[r]) / qp(a * x[r] * x[s] * q ** (k[s] + 1), q, m[r])
    return out


def G_Cn(a, x, q, k, m, cache=None):
    if not leq_componentwise(m, k):
        return ZERO
    qp = _qp(cache)
    n = len(x)
    out = rat_pow(q, rsum(m))
    for r in range(n):
        for s in range(r + 1, n):
            ratio = x[r] / x[s]
            out *= ((1 - rat_pow(q, m[r] - m[s]) * ratio) * (1 - a * x[r] * x[s] * q ** (m[r] + m[s]))
                    / (1 - ratio))
    for r in range(n):
        for s in range(n):
            ratio = x[r] / x[s]
            t = a * x[r] * x[s] * q ** m[s]
            out *= (qp(rat_pow(q, -k[s]) * ratio, q, m[r]) * qp(t, q, k[r])
                    / ((1 - t) * qp(q * ratio, q, k[r]) * qp(q * ratio, q, m[r])))
    return out


def pair(system: str, a, x, q, cache=None):
    """Entry functions (F(k, m), G(k, m)) for system "one", "an" or "cn"."""
    a, q = rat(a), rat(q)
    if system == "one":
        return (lambda k, m: F1(a, q, k[0], m[0], cache),
                lambda k, m: G1(a, q, k[0], m[0], cache))
    x = tuple(rat(v) for v in x)
    if system == "an":
        return (lambda k, m: F_An(a, x, q, k, m, cache),
                lambda k, m: G_An(a, x, q, k, m, cache))
    if system == "cn":
        return (lambda k, m: F_Cn(a, x, q, k, m, cache),
                lambda k, m: G_Cn(a, x, q, k, m, cache))
    raise ValueError(f"unknown Bailey system {system!r}")


# -- triangular matrices over a box ----------------------------------------

class TriMatrix:
    """Lower-triangular matrix indexed by the multi-indices of a box.

    Only entries with m <= k component-wise are stored; the rest are zero.
    """

    __slots__ = ("bounds", "entries")

    def __init__(self, bounds, entries: Mapping | None = None):
        self.bounds = MultiIndex(bounds)
        self.entries = {}
        for (k, m), v in (entries or {}).items():
            k, m = MultiIndex(k), MultiIndex(m)
            if not leq_componentwise(m, k):
                if v != 0:
                    raise ValueError(f"entry ({k}, {m}) lies above the diagonal")
                continue
            self.entries[(k, m)] = rat(v)

    @classmethod
    def from_function(cls, bounds, fn: Callable) -> "TriMatrix":
        mat = cls(bounds)
        for k in iter_box(bounds):
            for m in iter_box(k):
                mat.entries[(k, m)] = fn(k, m)
        return mat

    @classmethod
    def identity(cls, bounds) -> "TriMatrix":
        return cls.from_function(bounds, lambda k, m: ONE if k == m else ZERO)

    @property
    def n(self) -> int:
        return len(self.bounds)

    def indices(self):
        return list(iter_box(self.bounds))

    def __len__(self):
        return box_size(self.bounds)

    def __getitem__(self, km):
        return self.entries.get((tuple(km[0]), tuple(km[1])), ZERO)

    def __matmul__(self, other: "TriMatrix") -> "TriMatrix":
        if other.bounds != self.bounds:
            raise ValueError("box mismatch")
        out = TriMatrix(self.bounds)
        A, B = self.entries, other.entries
        for k in iter_box(self.bounds):
            for m in iter_box(k):
                total = ZERO
                for j in _interval(m, k):
                    total += A.get((k, j), ZERO) * B.get((j, m), ZERO)
                out.entries[(k, m)] = total
        return out

    def deviations(self, other: "TriMatrix") -> list:
        keys = set(self.entries) | set(other.entries)
        return sorted(key for key in keys if self.entries.get(key, ZERO) != other.entries.get(key, ZERO))

    def is_identity(self) -> bool:
        return not self.deviations(TriMatrix.identity(self.bounds))

    def __eq__(self, other):
        return isinstance(other, TriMatrix) and self.bounds == other.bounds and not self.deviations(other)


def _interval(m, k):
    """Plain tuples j with m <= j <= k; they hash like the MultiIndex keys."""
    return itertools.product(*(range(a, b + 1) for a, b in zip(m, k)))


def invert_lower_triangular(M: TriMatrix) -> TriMatrix:
    """Inverse by forward substitution in lexicographic order."""
    X = TriMatrix(M.bounds)
    E = M.entries
    for k in iter_box(M.bounds):
        diag = E.get((k, k), ZERO)
        if diag == 0:
            raise SingularDiagonal(tuple(k))
        inv = ONE / diag
        X.entries[(k, k)] = inv
        for m in iter_box(k):
            if m == k:
                continue
            total = ZERO
            for j in _interval(m, k):
                if j == k:
                    continue
                total += E.get((k, j), ZERO) * X.entries[(j, m)]
            X.entries[(k, m)] = -inv * total
    return X


def verify_inverse_pair(system: str, bounds, a, x, q):
    """(F@G deviations from I, G@F deviations, forward-substitution deviations)."""
    F_entry, G_entry = pair(system, a, x, q)
    F = TriMatrix.from_function(bounds, F_entry)
    G = TriMatrix.from_function(bounds, G_entry)
    ident = TriMatrix.identity(bounds)
    return ((F @ G).deviations(ident), (G @ F).deviations(ident), invert_lower_triangular(F).deviations(G))


# -- expansion engine -------------------------------------------------------

def expand(Fker: Callable, Ginv: Callable, K: Callable, h: Callable, beta, N):
    """Both sides of the Bailey-lemma expansion at y = q^N.

    Every family takes exponent multi-indices standing for y = q^M:
    ``Fker(M, k)`` is f_k(q^M), ``Ginv(k, m)`` a G entry, ``K(M)`` the
    prefactor and ``h(j, M)`` is h_j(q^M).  ``beta`` is a SeqSpec or any
    callable on multi-indices.  The two sides share no intermediate value.
    """
    N = MultiIndex(N)
    support = getattr(beta, "support", None)
    if support is None:
        support = [j for j in iter_box(N) if beta(j) != 0]
    support = [MultiIndex(j) for j in support if leq_componentwise(j, N)]

    lhs = ZERO
    for j in support:
        lhs += h(j, N) * beta(j)
    lhs *= K(N)

    rhs = ZERO
    for k in iter_box(N):
        mid = ZERO
        for j in support:
            if not leq_componentwise(j, k):
                continue
            inner = ZERO
            for m in iter_box(sub(k, j)):
                jm = add(j, m)
                inner += h(j, jm) * Ginv(k, jm) * K(jm)
            mid += beta(j) * inner
        if mid != 0:
            rhs += Fker(N, k) * mid
    return lhs, rhs


def alpha_from_samples(Ginv: Callable, samples: Mapping, bounds) -> dict:
    """alpha(k) = sum_{m <= k} G(k, m) A(q^m) for every k in the box."""
    out = {}
    for k in iter_box(bounds):
        total = ZERO
        for m in iter_box(k):
            total += Ginv(k, m) * samples[tuple(m)]
        out[k] = total
    return out


def kernel_family(system: str, a, x, q):
    """f_k(q^M) as a function of (M, k) for the given system."""
    from .kernels import f1, f_An, g_Cn

    a, q = rat(a), rat(q)
    if system == "one":
        return lambda M, k: f1(q ** M[0], a, q, k[0])
    x = tuple(rat(v) for v in x)
    fn = f_An if system == "an" else g_Cn
    if system not in ("an", "cn"):
        raise ValueError(f"unknown system {system!r}")
    return lambda M, k: fn(tuple(q ** t for t in M), a, x, q, k)


__all__ = [
    "F1", "G1", "F_An", "G_An", "F_Cn", "G_Cn", "pair", "TriMatrix",
    "invert_lower_triangular", "verify_inverse_pair", "expand",
    "alpha_from_samples", "kernel_family", "DivisionByZero",
]
