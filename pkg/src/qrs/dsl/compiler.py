"""Compile ASTs to closures over an environment dict.

Kinds are inferred statically: ``int`` (exponents, indices), ``rat``,
``ivec`` (multi-indices), ``rvec`` (parameter vectors), plus ``seq`` and
function symbols.  Quantifier indices r, s are 1-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _cartesian
from typing import Callable, Optional

from gmpy2 import mpq

from ..errors import DimensionMismatch, DivisionByZero, ZeroToNegativePower
from ..exact import ONE, ZERO, rat
from ..qpoch import PochCache
from . import ast as A
from .errors import BindError, RegimeError

INT, RAT, IVEC, RVEC, SEQ, EXTERN, DEF = "int", "rat", "ivec", "rvec", "seq", "extern", "def"
SCALAR = (INT, RAT)
REGIMES = ("terminating", "nonterminating")


class QVec(tuple):
    """A vector of q-powers q^e remembering its integer exponents."""

    exps: tuple

    def __new__(cls, values, exps):
        obj = super().__new__(cls, values)
        obj.exps = tuple(exps)
        return obj


class EvalContext:
    """Per-evaluation state: nome, caches, truncation levels and hooks."""

    __slots__ = ("q", "n", "cache", "qpowers", "M", "K", "tau", "trace", "overrides", "_level")

    def __init__(self, q, n, cache=None, M=None, K=None, tau=None, trace=None, overrides=None):
        self.q = rat(q)
        self.n = n
        self.cache = cache if cache is not None else PochCache()
        self.qpowers = {}
        self.M = M
        self.K = K
        self.tau = tau
        self.trace = trace
        self.overrides = overrides or {}
        self._level = {}

    def qpow(self, e: int):
        v = self.qpowers.get(e)
        if v is None:
            if e < 0:
                if self.q == 0:
                    raise ZeroToNegativePower("0 raised to a negative power")
                v = ONE / self.q ** (-e)
            else:
                v = self.q ** e
            self.qpowers[e] = v
        return v

    def poch(self, A, k: int):
        return self.cache.qpoch(A, self.q, k)

    def inf_level(self, A) -> int:
        """Product cutoff for base A: at least M, and long enough that |A||q|^L < tau/100."""
        M = self.M
        if self.tau is None or A == 0:
            return M
        lvl = self._level.get(A)
        if lvl is None:
            aq = abs(self.q)
            need = (math.log(100 * abs(A)) - math.log(self.tau)) / -math.log(aq)
            lvl = max(M, int(math.ceil(need)) + 1)
            self._level[A] = lvl
        return lvl

    def poch_inf(self, A):
        if self.M is None:
            raise RegimeError("infinite product evaluated without a truncation level")
        return self.cache.trunc_inf(A, self.q, self.inf_level(A))


def _pos(node):
    p = getattr(node, "pos", None)
    return p if p is not None else (None, None)


def _bind_error(msg, node, name=None):
    line, col = _pos(node)
    return BindError(msg, line, col, None, name)


@dataclass
class Symbol:
    kind: str
    decl: object = None
    size: object = None
    glob: bool = False


class _Compiler:
    def __init__(self, doc: Optional[A.Document], regime: str, dim):
        if regime not in REGIMES:
            raise ValueError(f"unknown regime {regime!r}")
        self.doc = doc
        self.regime = regime
        self.dim = dim  # 'n' or an int
        self.used: set = set()
        self.def_cache: dict = {}
        self.defs = {d.name: d for d in doc.defs} if doc else {}
        self.sum_depth = 0

    # -- scope
    def global_scope(self, extra=None) -> dict:
        scope = {"q": Symbol(RAT, glob=True), "n": Symbol(INT, glob=True)}
        doc = self.doc
        if doc is not None:
            for d in doc.params:
                scope[d.name] = Symbol(RAT if d.size is None else RVEC, d, d.size, True)
            for d in doc.ints:
                scope[d.name] = Symbol(INT if d.size is None else IVEC, d, d.size, True)
            for s in doc.sizes:
                scope[s] = Symbol(INT, None, None, True)
            for s in doc.seqs:
                scope[s] = Symbol(SEQ, None, None, True)
            for e in doc.externs:
                scope[e.name] = Symbol(EXTERN, e, None, True)
            for d in doc.defs:
                scope[d.name] = Symbol(DEF, d, None, True)
        if extra:
            for name, kind in extra.items():
                scope[name] = Symbol(kind, None, None, True)
        return scope

    def lookup(self, scope, name, node) -> Symbol:
        sym = scope.get(name)
        if sym is None:
            raise _bind_error(f"unbound name {name!r}", node, name)
        if sym.glob and sym.kind not in (DEF,):
            self.used.add(name)
        return sym

    # -- expressions
    def comp(self, node, scope):
        method = getattr(self, "c_" + type(node).__name__, None)
        if method is None:
            raise _bind_error(f"unsupported node {type(node).__name__}", node)
        return method(node, scope)

    def c_Num(self, node, scope):
        v = node.value
        return INT, lambda env: v

    def c_Inf(self, node, scope):
        raise _bind_error("'inf' is only allowed as a q-Pochhammer length or a sum range", node)

    def c_Name(self, node, scope):
        name = node.name
        sym = self.lookup(scope, name, node)
        if sym.kind in (SEQ, EXTERN, DEF):
            raise _bind_error(f"{name!r} is a function and needs an argument", node, name)
        if name == "n":
            return INT, lambda env: env["#n"]
        return sym.kind, lambda env: env[name]

    def c_Indexed(self, node, scope):
        name, idx = node.name, node.index
        sym = self.lookup(scope, name, node)
        if sym.kind == RVEC:
            kind = RAT
        elif sym.kind == IVEC:
            kind = INT
        else:
            raise _bind_error(f"{name!r} is not a vector and cannot be indexed", node, name)
        if isinstance(idx, int):
            if idx < 1:
                raise _bind_error("indices are 1-based", node)
            i = idx - 1
            return kind, lambda env: env[name][i]
        isym = self.lookup(scope, idx, node)
        if isym.kind != INT:
            raise _bind_error(f"index {idx!r} is not an integer", node, idx)
        return kind, lambda env: env[name][env[idx] - 1]

    def c_Weight(self, node, scope):
        name = node.name
        sym = self.lookup(scope, name, node)
        if sym.kind == IVEC:
            return INT, lambda env: sum(env[name])
        if sym.kind == INT:
            return INT, lambda env: env[name]
        raise _bind_error(f"|{name}| needs a multi-index", node, name)

    def c_Neg(self, node, scope):
        kind, f = self.comp(node.operand, scope)
        if kind == IVEC:
            return IVEC, lambda env: tuple(-t for t in f(env))
        if kind not in SCALAR:
            raise _bind_error("cannot negate a vector", node)
        return kind, lambda env: -f(env)

    def c_BinOp(self, node, scope):
        if node.op in "+-":
            return self._additive(node, scope)
        return self._multiplicative(node, scope)

    def _additive(self, node, scope):
        lk, lf = self.comp(node.left, scope)
        rk, rf = self.comp(node.right, scope)
        sub = node.op == "-"
        if lk == IVEC and rk == IVEC:
            def vec(env):
                a, b = lf(env), rf(env)
                if len(a) != len(b):
                    raise DimensionMismatch(f"vector lengths {len(a)} and {len(b)} differ")
                if sub:
                    return tuple(x - y for x, y in zip(a, b))
                return tuple(x + y for x, y in zip(a, b))
            return IVEC, vec
        if lk not in SCALAR or rk not in SCALAR:
            raise _bind_error(f"operator {node.op!r} cannot combine {lk} and {rk}", node)
        kind = INT if lk == rk == INT else RAT
        if sub:
            return kind, lambda env: lf(env) - rf(env)
        return kind, lambda env: lf(env) + rf(env)

    def _flatten(self, node, out, div=False):
        if isinstance(node, A.BinOp) and node.op in "*/":
            self._flatten(node.left, out, div)
            self._flatten(node.right, out, div != (node.op == "/"))
        else:
            out.append((node, div))
        return out

    def _multiplicative(self, node, scope):
        # left-associative chains a*b/c*d become numerators [a,b,d] over [c];
        # for a/(b/c) the inner division flips, so flattening is exact
        parts = self._flatten(node, [])
        nums, dens = [], []
        kinds = []
        for sub, div in parts:
            k, f = self.comp(sub, scope)
            if k not in SCALAR:
                raise _bind_error(f"operator {node.op!r} needs scalar operands, got {k}", sub)
            kinds.append(k)
            (dens if div else nums).append(f)
        all_int = all(k == INT for k in kinds) and not dens
        kind = INT if all_int else RAT
        nums_t, dens_t = tuple(nums), tuple(dens)
        first, rest = nums_t[0], nums_t[1:]

        # a vanishing numerator never hides a vanishing divisor: 0/0 is not 0
        def mul(env):
            v = first(env)
            for g in rest:
                v = v * g(env)
            if dens_t:
                v = mpq(v)
                for g in dens_t:
                    t = g(env)
                    if t == 0:
                        raise DivisionByZero("division by zero")
                    if v:
                        v = v / t
            return v

        return kind, mul

    def c_Pow(self, node, scope):
        bk, bf = self.comp(node.base, scope)
        ek, ef = self.comp(node.exp, scope)
        if ek != INT:
            raise _bind_error("exponents must be integer expressions", node.exp)
        if bk not in SCALAR:
            raise _bind_error("only scalars can be raised to a power", node.base)
        if isinstance(node.base, A.Name) and node.base.name == "q" and scope["q"].glob:
            return RAT, lambda env: env["#ctx"].qpow(ef(env))

        def power(env):
            b, e = bf(env), ef(env)
            if e < 0:
                if b == 0:
                    raise ZeroToNegativePower("0 raised to a negative power")
                return ONE / mpq(b) ** (-e)
            return mpq(b) ** e

        return RAT, power

    def c_Call(self, node, scope):
        fn, args = node.func, node.args
        if fn in A.BUILTINS and fn not in scope:
            if len(args) != 1:
                raise _bind_error(f"{fn}() takes exactly one argument", node, fn)
            kind, f = self.comp(args[0], scope)
            return getattr(self, "b_" + fn)(node, kind, f)
        sym = self.lookup(scope, fn, node)
        if len(args) != 1:
            raise _bind_error(f"{fn}() takes exactly one argument", node, fn)
        kind, f = self.comp(args[0], scope)
        if sym.kind == SEQ:
            if kind == INT:
                return RAT, lambda env: env[fn]((f(env),))
            if kind != IVEC:
                raise _bind_error(f"sequence {fn!r} is indexed by a multi-index", node, fn)
            return RAT, lambda env: env[fn](f(env))
        if sym.kind == EXTERN:
            return RAT, lambda env: rat(env[fn](f(env)))
        if sym.kind == DEF:
            return self._call_def(sym.decl, kind, f, node)
        raise _bind_error(f"{fn!r} is not a function", node, fn)

    def _call_def(self, d: A.Def, argkind, argf, node):
        if d.formal is None:
            raise _bind_error(f"{d.name!r} takes no argument", node, d.name)
        if d.bracket:
            if argkind not in (IVEC, RVEC, INT):
                raise _bind_error(f"{d.name!r} expects a multi-index argument", node, d.name)
            fkind = INT if self.dim == 1 else IVEC
        else:
            fkind = argkind
        key = (d.name, fkind)
        if key not in self.def_cache:
            self.def_cache[key] = None  # recursion guard
            scope = self.global_scope()
            scope[d.formal] = Symbol(fkind)
            depth, self.sum_depth = self.sum_depth, 1  # sums inside defs never trace
            self.def_cache[key] = self.comp(d.body, scope)
            self.sum_depth = depth
        elif self.def_cache[key] is None:
            raise _bind_error(f"recursive definition of {d.name!r}", node, d.name)
        rkind, body = self.def_cache[key]
        formal, bracket = d.formal, d.bracket
        scalar_formal = fkind == INT

        def call(env):
            v = argf(env)
            if bracket and isinstance(v, QVec):
                v = v.exps
            if bracket and scalar_formal and isinstance(v, tuple):
                v = v[0]
            missing = object()
            old = env.get(formal, missing)
            env[formal] = v
            try:
                return body(env)
            finally:
                if old is missing:
                    del env[formal]
                else:
                    env[formal] = old

        return rkind, call

    # builtins
    def b_qpow(self, node, kind, f):
        if kind != INT:
            raise _bind_error("qpow() needs an integer exponent", node, "qpow")
        return RAT, lambda env: env["#ctx"].qpow(f(env))

    def b_binom2(self, node, kind, f):
        if kind != INT:
            raise _bind_error("binom2() needs an integer argument", node, "binom2")

        def b2(env):
            m = f(env)
            return m * (m - 1) // 2

        return INT, b2

    def b_wt(self, node, kind, f):
        if kind == IVEC:
            return INT, lambda env: sum(f(env))
        if kind == INT:
            return INT, f
        raise _bind_error("wt() needs a multi-index", node, "wt")

    def b_delta(self, node, kind, f):
        if kind == IVEC:
            return INT, lambda env: 0 if any(f(env)) else 1
        if kind == INT:
            return INT, lambda env: 0 if f(env) else 1
        raise _bind_error("delta() needs a multi-index", node, "delta")

    def b_qvec(self, node, kind, f):
        if kind == IVEC:
            def qv(env):
                e = f(env)
                ctx = env["#ctx"]
                return QVec([ctx.qpow(t) for t in e], e)
        elif kind == INT:
            def qv(env):
                e = f(env)
                return QVec([env["#ctx"].qpow(e)], (e,))
        else:
            raise _bind_error("qvec() needs integer exponents", node, "qvec")
        return RVEC, qv

    def c_QP(self, node, scope):
        bases = []
        for b in node.bases:
            k, f = self.comp(b, scope)
            if k not in SCALAR:
                raise _bind_error("q-Pochhammer bases must be scalars", b)
            bases.append(f)
        bases = tuple(bases)
        if isinstance(node.length, A.Inf):
            if self.regime == "terminating":
                line, col = _pos(node.length)
                raise RegimeError("infinite q-Pochhammer length in a terminating form", line, col)

            def qp_inf(env):
                ctx = env["#ctx"]
                out = ONE
                for g in bases:
                    t = ctx.poch_inf(mpq(g(env)))
                    if t == 0:
                        return ZERO
                    out *= t
                return out

            return RAT, qp_inf
        lk, lf = self.comp(node.length, scope)
        if lk != INT:
            raise _bind_error("q-Pochhammer length must be an integer expression", node.length)

        def qp(env):
            ctx = env["#ctx"]
            L = lf(env)
            out = ONE
            for g in bases:
                t = ctx.poch(mpq(g(env)), L)
                if t == 0:
                    return ZERO
                out *= t
            return out

        return RAT, qp

    def c_Quant(self, node, scope):
        vars_, agg = A.QUANTIFIERS[node.kind]
        inner = dict(scope)
        for v in vars_:
            inner[v] = Symbol(INT)
        size = node.size
        if size is not None:
            ssym = self.lookup(scope, size, node)
            if ssym.kind != INT:
                raise _bind_error(f"quantifier range {size!r} is not a size", node, size)
        bk, body = self.comp(node.body, inner)
        if bk not in SCALAR:
            raise _bind_error("quantifier bodies must be scalar", node.body)
        kind = bk
        shape = node.kind
        is_prod = agg == "prod"
        unit = (1 if kind == INT else ONE) if is_prod else (0 if kind == INT else ZERO)
        pairs_cache: dict = {}

        def indices(m):
            got = pairs_cache.get(m)
            if got is None:
                rng = range(1, m + 1)
                if len(vars_) == 1:
                    got = [(r,) for r in rng]
                elif shape == "prodrs_lt" or shape == "sumrs_lt":
                    got = [(r, s) for r in rng for s in rng if r < s]
                elif shape == "prodrs_le":
                    got = [(r, s) for r in rng for s in rng if r <= s]
                elif shape == "prodrs_ne":
                    got = [(r, s) for r in rng for s in rng if r != s]
                else:
                    got = [(r, s) for r in rng for s in rng]
                pairs_cache[m] = got
            return got

        names = vars_

        def quant(env):
            m = env["#n"] if size is None else env[size]
            saved = [env.get(v) for v in names]
            acc = unit
            try:
                for idx in indices(m):
                    for v, i in zip(names, idx):
                        env[v] = i
                    t = body(env)
                    if is_prod:
                        acc = acc * t
                    else:
                        acc = acc + t
                return acc
            finally:
                for v, old in zip(names, saved):
                    if old is None:
                        env.pop(v, None)
                    else:
                        env[v] = old

        return kind, quant

    def c_Sum(self, node, scope):
        var = node.var
        if isinstance(node.bound, A.Inf):
            if self.regime == "terminating":
                line, col = _pos(node.bound)
                raise RegimeError("unbounded sum in a terminating form", line, col)
            vkind = INT if self.dim == 1 else IVEC
            bf = None
        else:
            vkind, bf = self.comp(node.bound, scope)
            if vkind not in (INT, IVEC):
                raise _bind_error("sum ranges must be multi-indices or integers", node.bound)
        inner = dict(scope)
        inner[var] = Symbol(vkind)
        outermost = self.sum_depth == 0
        self.sum_depth += 1
        try:
            bk, body = self.comp(node.body, inner)
        finally:
            self.sum_depth -= 1
        if bk not in SCALAR:
            raise _bind_error("summands must be scalar", node.body)
        support = self._support_symbol(node, inner)
        scalar = vkind == INT

        def candidates(env, bound):
            if support is None:
                if scalar:
                    return range(bound + 1)
                return _cartesian(*[range(b + 1) for b in bound])
            if support == "delta":
                return [0] if scalar else [(0,) * len(bound)]
            seq = env[support]
            sup = getattr(seq, "support", None)
            if sup is None:
                return range(bound + 1) if scalar else _cartesian(*[range(b + 1) for b in bound])
            out = []
            for j in sup:
                j = tuple(j)
                if scalar:
                    if len(j) == 1 and j[0] <= bound:
                        out.append(j[0])
                elif len(j) == len(bound) and all(a <= b for a, b in zip(j, bound)):
                    out.append(j)
            return out

        def summation(env):
            ctx = env["#ctx"]
            if bf is None:
                bound = ctx.K if scalar else (ctx.K,) * env["#n"]
            else:
                bound = bf(env)
                if scalar:
                    if bound < 0:
                        return ZERO
                elif any(b < 0 for b in bound):
                    return ZERO
            missing = object()
            old = env.get(var, missing)
            try:
                override = ctx.overrides.get(var)
                if override is not None:
                    def term(idx):
                        env[var] = idx
                        return body(env)
                    return rat(override(env, term, bound))
                trace = ctx.trace if outermost else None
                acc = ZERO
                for idx in candidates(env, bound):
                    env[var] = idx
                    t = body(env)
                    if trace is not None:
                        trace.append((idx, mpq(t)))
                    acc = acc + t
                return acc
            finally:
                if old is missing:
                    env.pop(var, None)
                else:
                    env[var] = old

        return RAT, summation

    def _support_symbol(self, node, scope):
        """A top-level factor seq(var) or delta(var) restricts the sum to its support."""
        body = node.body
        if not (isinstance(body, A.BinOp) and body.op in "*/") and not isinstance(body, A.Call):
            return None
        factors = self._flatten(body, []) if isinstance(body, A.BinOp) else [(body, False)]
        for f, div in factors:
            if div or not isinstance(f, A.Call) or len(f.args) != 1:
                continue
            arg = f.args[0]
            if not (isinstance(arg, A.Name) and arg.name == node.var):
                continue
            if f.func == "delta" and "delta" not in scope:
                return "delta"
            sym = scope.get(f.func)
            if sym is not None and sym.kind == SEQ:
                return f.func
        return None


# -- public evaluators -----------------------------------------------------


@dataclass
class SideEvaluator:
    """A compiled side (or standalone expression) of an identity document."""

    name: str
    regime: str
    dim: object
    kind: str
    body: Callable
    lets: tuple = ()
    required: frozenset = frozenset()
    doc: Optional[A.Document] = None

    def __call__(self, point=None, ints=None, seqs=None, externs=None, *, values=None, M=None, K=None,
                 tau=None, trace=None, overrides=None, cache=None):
        env = build_env(self, point, ints, seqs, externs, values)
        q = env["q"]
        env["#ctx"] = EvalContext(q, env["#n"], cache, M, K, tau, trace, overrides)
        for name, f in self.lets:
            env[name] = f(env)
        out = self.body(env)
        return mpq(out) if not isinstance(out, tuple) else out


def build_env(ev: SideEvaluator, point, ints, seqs, externs, values) -> dict:
    env: dict = {}
    n = None
    if point is not None:
        env["q"] = point.q
        env.update(point.scalars)
        env.update({k: tuple(v) for k, v in point.vectors.items()})
        n = point.n
    if values:
        env.update(values)
        n = values.get("n", n)
    if ints:
        for k, v in ints.items():
            env[k] = v if isinstance(v, int) else tuple(v)
    if seqs:
        env.update(seqs)
    if externs:
        env.update(externs)
    if isinstance(ev.dim, int):
        if n is not None and n != ev.dim:
            raise DimensionMismatch(f"{ev.name} has dimension {ev.dim}, got {n}")
        n = ev.dim
    if n is None:
        raise BindError("dimension n could not be determined", name="n")
    env["#n"] = n
    env["n"] = n
    if "q" not in env:
        raise BindError("no value supplied for 'q'", name="q")
    doc = ev.doc
    if doc is not None:
        for s in doc.sizes:
            if s not in env:
                for d in doc.params + doc.ints:
                    if d.size == s and d.name in env:
                        env[s] = len(env[d.name])
                        break
    for name in ev.required:
        if name not in env:
            raise BindError(f"no value supplied for {name!r}", name=name)
    return env


@dataclass
class CompiledForm:
    regime: str
    lhs: SideEvaluator
    rhs: SideEvaluator

    def evaluate(self, *args, **kwargs):
        return self.lhs(*args, **kwargs), self.rhs(*args, **kwargs)


@dataclass
class CompiledDocument:
    doc: A.Document
    forms: dict = field(default_factory=dict)

    @property
    def id(self):
        return self.doc.id

    def form(self, regime: str) -> CompiledForm:
        try:
            return self.forms[regime]
        except KeyError:
            raise RegimeError(f"{self.doc.id} has no {regime} form") from None


def _compile_side(doc, form, regime, which):
    comp = _Compiler(doc, regime, doc.dim if doc.dim is not None else "n")
    scope = comp.global_scope()
    lets = []
    for name, expr in form.lets:
        k, f = comp.comp(expr, scope)
        scope[name] = Symbol(k)
        lets.append((name, f))
    node = form.lhs if which == "lhs" else form.rhs
    kind, body = comp.comp(node, scope)
    if kind not in SCALAR:
        raise _bind_error(f"{which} must be scalar", node)
    required = frozenset(n for n in comp.used if n not in ("q", "n")
                         and scope[n].kind not in (SEQ, EXTERN) and n not in dict(form.lets)
                         and not any(s == n for s in doc.sizes))
    return SideEvaluator(f"{doc.id}.{which}", regime, comp.dim, kind, body, tuple(lets), required, doc)


def compile_document(doc: A.Document) -> CompiledDocument:
    named = [(d.name, d.pos) for d in doc.params + doc.ints + doc.externs + doc.defs]
    named += [(nm, None) for nm in doc.sizes + doc.seqs]
    seen = set()
    for nm, pos in named:
        if nm in seen:
            line, col = pos or (None, None)
            raise BindError(f"{nm!r} declared twice", line, col, name=nm)
        seen.add(nm)
    out = CompiledDocument(doc)
    for form in doc.forms:
        out.forms[form.regime] = CompiledForm(
            form.regime, _compile_side(doc, form, form.regime, "lhs"), _compile_side(doc, form, form.regime, "rhs"))
    if not doc.forms:
        # library fragment: still type-check every definition
        comp = _Compiler(doc, "nonterminating", doc.dim if doc.dim is not None else "n")
        for d in doc.defs:
            if d.formal is None:
                comp.comp(d.body, comp.global_scope())
    return out


def compile_expr(node, n=1, regime="terminating", decls: Optional[dict] = None) -> SideEvaluator:
    """Compile a standalone expression; ``decls`` maps free names to kinds."""
    comp = _Compiler(None, regime, n)
    scope = comp.global_scope(decls or {})
    kind, body = comp.comp(node, scope)
    required = frozenset(x for x in comp.used if x not in ("q", "n"))
    return SideEvaluator("expr", regime, n, kind, body, (), required, None)


def compile(node, n=None, regime="terminating", decls=None):
    """Compile a Document to a CompiledDocument or an expression to a SideEvaluator."""
    if isinstance(node, A.Document):
        return compile_document(node)
    return compile_expr(node, 1 if n is None else n, regime, decls)


def link(host: A.Document, *fragments: A.Document, regimes=None) -> A.Document:
    """Resolve ``host`` externs with definitions from fragments and merge their declarations.

    ``regimes`` keeps only the named forms of the host, e.g. when a fragment
    uses infinite products that a terminating form could not compile.
    """
    defs = {d.name: d for f in fragments for d in f.defs}
    externs = tuple(e for e in host.externs if e.name not in defs)
    host_names = {d.name for d in host.params + host.ints} | set(host.sizes) | set(host.seqs)

    def merged(attr):
        out = list(getattr(host, attr))
        names = {d.name for d in out}
        for f in fragments:
            for d in getattr(f, attr):
                if d.name not in names and d.name not in host_names:
                    out.append(d)
                    names.add(d.name)
        return tuple(out)

    sizes = list(host.sizes)
    seqs = list(host.seqs)
    for f in fragments:
        sizes += [s for s in f.sizes if s not in sizes]
        seqs += [s for s in f.seqs if s not in seqs]
    own_defs = tuple(d for d in host.defs if d.name not in defs)
    forms = host.forms if regimes is None else tuple(f for f in host.forms if f.regime in regimes)
    return A.Document(host.id, host.anchor, host.title, host.dim, merged("params"), merged("ints"),
                      tuple(sizes), tuple(seqs), externs, own_defs + tuple(defs.values()), forms)
