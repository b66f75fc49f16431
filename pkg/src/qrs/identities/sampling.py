"""Seeded sampling of admissible parameter points, coefficient families and free functions."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from gmpy2 import mpq

from ..dsl import ast as A
from ..exact import rat
from ..kernels import ParamPoint
from ..multiindex import iter_box
from ..seqspec import SeqSpec

MAX_ATTEMPTS = 1000
HEIGHT = 9


def trial_rng(*key) -> random.Random:
    """An independent stream for every (seed, id, n, trial, ...) key."""
    return random.Random(":".join(str(k) for k in key))


def sample_q(rng: random.Random, max_q=None):
    while True:
        v = rng.randint(2, 9)
        u = rng.randint(1, v - 1)
        q = mpq(u, v)
        if max_q is None or q <= max_q:
            return q


def sample_scalar(rng: random.Random, height: int = HEIGHT):
    while True:
        p = rng.randint(-height, height)
        if p:
            return mpq(p, rng.randint(1, height))


def sample_distinct(rng: random.Random, n: int, height: int = HEIGHT) -> tuple:
    out = []
    while len(out) < n:
        v = sample_scalar(rng, height)
        if v not in out:
            out.append(v)
    return tuple(out)


def sample_seq(rng: random.Random, n: int, box, size: Optional[int] = None) -> SeqSpec:
    """A finitely supported family with at most three nonzero values inside ``box``."""
    cells = list(iter_box(box))
    size = rng.randint(1, min(3, len(cells))) if size is None else min(size, len(cells))
    support = rng.sample(cells, size)
    return SeqSpec({tuple(j): sample_scalar(rng) for j in support}, n)


class RandomFunction:
    """An abstract K(y) or H(y): a seeded random rational per exponent vector, memoized.

    Callables receive a QVec (y = q^M) and key on its exponents, so values do
    not depend on call order.
    """

    def __init__(self, key: str, constant=None):
        self.key = key
        self.constant = constant
        self.memo: dict = {}

    def __call__(self, y):
        if self.constant is not None:
            return self.constant
        exps = getattr(y, "exps", None)
        if exps is None:
            raise TypeError("abstract function evaluated off the q-lattice")
        v = self.memo.get(exps)
        if v is None:
            v = sample_scalar(trial_rng(self.key, exps))
            self.memo[exps] = v
        return v


@dataclass
class Inputs:
    """Everything a compiled side needs besides the regime."""

    point: ParamPoint
    ints: dict = field(default_factory=dict)
    seqs: dict = field(default_factory=dict)
    externs: dict = field(default_factory=dict)

    def kwargs(self) -> dict:
        return {"ints": self.ints, "seqs": self.seqs, "externs": self.externs}

    def to_json(self) -> dict:
        out = self.point.to_json()
        for k in sorted(self.ints):
            v = self.ints[k]
            out[k] = v if isinstance(v, int) else list(v)
        for k in sorted(self.seqs):
            s = self.seqs[k]
            out[k] = s.to_json() if hasattr(s, "to_json") else repr(s)
        return out


def _fixed_value(fixed: Mapping, name: str, index: Optional[int] = None):
    if index is None:
        return fixed.get(name)
    return fixed.get(f"{name}{index + 1}")


def sample_inputs(doc: A.Document, n: int, N, rng: random.Random, *, beta="delta",
                  fixed: Optional[Mapping] = None, key: str = "", seq_box=None) -> Inputs:
    """Sample every declared name of ``doc``.

    ``N`` is the box (an int for one-variable documents); ``beta`` is "delta",
    "random" or a SeqSpec and applies to every declared sequence.  ``fixed``
    pins parameters by name, vector components as ``x1``, ``x2``, ...
    """
    fixed = dict(fixed or {})
    one = doc.dim == 1
    box = (N,) if one and isinstance(N, int) else tuple(N)
    sizes = {"n": n}
    for s in doc.sizes:
        sizes[s] = int(fixed.get(s, rng.randint(1, 3)))
    q = rat(fixed["q"]) if "q" in fixed else sample_q(rng)

    scalars, vectors = {}, {}
    for d in doc.params:
        if d.size is None:
            v = _fixed_value(fixed, d.name)
            scalars[d.name] = rat(v) if v is not None else sample_scalar(rng)
            continue
        length = sizes[d.size] if isinstance(d.size, str) else int(d.size)
        if d.name in fixed:
            vec = tuple(rat(t) for t in fixed[d.name])
        else:
            vec = list(sample_distinct(rng, length))
            for i in range(length):
                v = _fixed_value(fixed, d.name, i)
                if v is not None:
                    vec[i] = rat(v)
            vec = tuple(vec)
        vectors[d.name] = vec

    ints = {}
    for d in doc.ints:
        if d.name == "N":
            ints["N"] = box[0] if one and d.size is None else box
        elif d.size is None:
            ints[d.name] = int(fixed[d.name]) if d.name in fixed else rng.randint(0, 3)
        else:
            length = sizes[d.size] if isinstance(d.size, str) else int(d.size)
            ints[d.name] = tuple(fixed[d.name]) if d.name in fixed else tuple(rng.randint(0, 3) for _ in range(length))

    seqs = {}
    for name in doc.seqs:
        if isinstance(beta, SeqSpec):
            seqs[name] = beta
        elif beta == "delta":
            seqs[name] = SeqSpec.delta(len(box))
        elif beta == "random":
            seqs[name] = sample_seq(rng, len(box), seq_box if seq_box is not None else box)
        else:
            raise ValueError(f"unknown beta source {beta!r}")

    externs = {e.name: RandomFunction(f"{key}:{e.name}:{rng.random()!r}") for e in doc.externs}
    return Inputs(ParamPoint(n, q, scalars, vectors), ints, seqs, externs)
