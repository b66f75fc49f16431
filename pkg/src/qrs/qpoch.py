"""q-Pochhammer symbols: finite, negative-length and truncated infinite."""
from __future__ import annotations

from gmpy2 import mpq

from .errors import DivisionByZero, NomeOutOfRange
from .exact import ONE, rat

INF = float("inf")


def qpoch(A, q, k: int):
    """(A;q)_k for any integer k; (A;q)_{-m} = 1/(Aq^{-m};q)_m."""
    if k >= 0:
        out = ONE
        t = rat(A)
        for _ in range(k):
            out *= 1 - t
            t *= q
        return out
    m = -k
    den = qpoch(rat(A) / rat(q) ** m, q, m)
    if den == 0:
        raise DivisionByZero(f"({A};{q})_{k} has a vanishing factor")
    return ONE / den


def qpoch_multi(bases, q, k: int):
    out = ONE
    for b in bases:
        out *= qpoch(b, q, k)
    return out


def qpoch_trunc_inf(A, q, M: int):
    """prod_{i<M} (1 - A q^i), the stand-in for (A;q)_inf."""
    q = rat(q)
    if abs(q) >= 1:
        raise NomeOutOfRange(f"|q| must be < 1 for infinite products, got {q}")
    if M < 1:
        raise ValueError("truncation level must be positive")
    return qpoch(A, q, M)


class PochCache:
    """Memo of (A;q)_k values for one evaluation context.

    Prefix products are stored per (A, q) so extending k costs one factor per
    step.  Instances are not shared between threads.
    """

    __slots__ = ("_prefix", "hits", "misses")

    def __init__(self):
        self._prefix: dict = {}
        self.hits = 0
        self.misses = 0

    def qpoch(self, A, q, k: int):
        if k < 0:
            m = -k
            den = self.qpoch(A / q ** m, q, m)
            if den == 0:
                raise DivisionByZero(f"({A};{q})_{k} has a vanishing factor")
            return ONE / den
        key = (A, q)
        entry = self._prefix.get(key)
        if entry is None:
            entry = [[ONE], mpq(A)]
            self._prefix[key] = entry
        vals = entry[0]
        if k < len(vals):
            self.hits += 1
            return vals[k]
        self.misses += 1
        t = entry[1]
        cur = vals[-1]
        while len(vals) <= k:
            cur = cur * (1 - t)
            t = t * q
            vals.append(cur)
        entry[1] = t
        return cur

    def trunc_inf(self, A, q, M: int):
        if abs(q) >= 1:
            raise NomeOutOfRange(f"|q| must be < 1 for infinite products, got {q}")
        return self.qpoch(A, q, M)

    def clear(self):
        self._prefix.clear()
