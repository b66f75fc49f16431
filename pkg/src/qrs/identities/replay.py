"""Replays of the theorem proofs: choose K(y), sum the innermost sum with a 3phi2 oracle.

Three values are compared at each point: the expansion's right-hand side
summed directly (R1), the theorem's right-hand side (R2), and the expansion
with its innermost sum replaced by the oracle's closed form (R3).  The
replacement is only accepted after checking that the innermost terms are a
constant multiple of the oracle's terms, in the same order.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from ..bailey import G_An, kernel_family
from ..dsl import compile_expr, parse_expr
from ..errors import AdmissiblePointNotFound, ConfigError, QRSError
from ..exact import ONE, ZERO, format_rational
from ..kernels import ParamPoint
from ..multiindex import MultiIndex, add, iter_box, leq_componentwise, sub
from ..seqspec import SeqSpec
from .registry import builtin_identity, compiled, linked
from .report import VerificationReport, format_residual
from .sampling import MAX_ATTEMPTS, sample_distinct, sample_q, sample_scalar, sample_seq, trial_rng


class ReplayMismatch(QRSError, ArithmeticError):
    """Innermost terms are not proportional to the oracle's terms."""


@dataclass(frozen=True)
class Replay:
    theorem: str
    host: str
    fragment: str
    oracle: str
    # (params, k, j) -> oracle scalars a, b, c
    substitution: Callable
    text: str


def _w(v):
    return sum(v)


REPLAYS = {
    "an_result5a": Replay("an_result5a", "an_trans1", "proof_an_result5a", "an3p2_1",
                          lambda e, q, k, j: (e["a"] * q ** _w(k), e["A"] * q ** _w(j), e["b"] * q ** (_w(j) + 1)),
                          "a->aq^|k|, b->Aq^|j|, c->bq^(|j|+1)"),
    "an_result5b": Replay("an_result5b", "an_trans1", "proof_an_result5b", "an3p2_2",
                          lambda e, q, k, j: (e["a"] * q ** _w(k), e["A"], e["b"] * q ** (_w(j) + 1)),
                          "a->aq^|k|, b->A, c->bq^(|j|+1)"),
    "an_cntrans2": Replay("an_cntrans2", "an_cntrans1", "proof_an_cntrans2", "dn3p2_1",
                          lambda e, q, k, j: (e["a"], e["A"] * q ** _w(j), e["a"] * e["A"] / e["b"]),
                          "a->a, b->Aq^|j|, c->aA/b"),
    "dn_result5": Replay("dn_result5", "cn_antrans3", "proof_dn_result5", "dn3p2",
                         lambda e, q, k, j: (e["a"] * q ** _w(k), e["A"], e["b"] * q),
                         "a->aq^|k|, b->A, c->bq"),
    "an_liu3": Replay("an_liu3", "lemma", "", "an3p2_1",
                      lambda e, q, k, j: (e["a"] * q ** _w(k), e["a"] * e["A"] * e["B"] / q, e["a"] * e["B"]),
                      "a->aq^|k|, b->aAB/q, c->aB"),
}


def _oracle_sum(oracle, q, n, abc, x, k, j, direct_terms):
    """Closed form of the innermost sum, after checking term proportionality."""
    a, b, c = abc
    shifted = tuple(xr * q ** jr for xr, jr in zip(x, j))
    point = ParamPoint(n, q, {"a": a, "b": b, "c": c}, {"x": shifted})
    ints = {"N": tuple(sub(k, j))}
    trace: list = []
    form = oracle.form("terminating")
    form.rhs(point, ints=ints, trace=trace)
    if [tuple(i) for i, _ in trace] != [tuple(m) for m in iter_box(sub(k, j))]:
        raise ReplayMismatch("oracle terms are not in box order")
    ratio = None
    for d, (_, o) in zip(direct_terms, trace):
        if o == 0:
            if d != 0:
                raise ReplayMismatch("an oracle term vanishes where the direct term does not")
            continue
        r = d / o
        if ratio is None:
            ratio = r
        elif r != ratio:
            raise ReplayMismatch("innermost terms are not proportional to the oracle terms")
    if ratio is None:
        return ZERO
    return ratio * form.lhs(point, ints=ints)


def _sample_point(rng, n):
    q = sample_q(rng)
    scalars = {name: sample_scalar(rng) for name in ("a", "b", "A", "B")}
    return ParamPoint(n, q, scalars, {"x": sample_distinct(rng, n)})


def _replay_host(rep: Replay, n, N, point, beta):
    host = linked(rep.host, rep.fragment).form("terminating")
    theorem = builtin_identity(rep.theorem).form("terminating")
    oracle = compiled(rep.oracle)
    ints = {"N": N}
    seqs = {"beta": beta}
    q = point.q

    def override(env, term, bound):
        k, j = env["k"], env["j"]
        direct = [term(tuple(m)) for m in iter_box(bound)]
        return _oracle_sum(oracle, q, n, rep.substitution(env, q, k, j), env["x"], k, j, direct)

    h_lhs = host.lhs(point, ints=ints, seqs=seqs)
    t_lhs = theorem.lhs(point, ints=ints, seqs=seqs)
    r1 = host.rhs(point, ints=ints, seqs=seqs)
    r2 = theorem.rhs(point, ints=ints, seqs=seqs)
    r3 = host.rhs(point, ints=ints, seqs=seqs, overrides={"m": override})
    return h_lhs, t_lhs, r1, r2, r3


_LEMMA_K = "qp(a*A*B/q; |M|) / qp(a*A; |M|) * prodr{ qp(a*q*x[r]; M[r]) / qp(a*B*x[r]; M[r]) }"
_LEMMA_H = ("prodrs_lt{ (1 - q^(j[r] - j[s])*x[r]/x[s]) / (1 - x[r]/x[s]) } * prodrs{ qp(q^(-M[s])*x[r]/x[s]; j[r]) }"
            " / qp(q^(2 - |M|)/(a*A*B); |j|) * q^sumr{ (r - 1)*j[r] }")
_LEMMA_BETA = "prodr{ qp(q*x[r]/A; j[r]) } * qp(q/B; |j|) * q^|j| * Aj(j)"


def _lemma_parts(n):
    decls = {"a": "rat", "A": "rat", "B": "rat", "x": "rvec", "M": "ivec", "j": "ivec", "Aj": "seq"}
    return tuple(compile_expr(parse_expr(src), n, "terminating", decls) for src in (_LEMMA_K, _LEMMA_H, _LEMMA_BETA))


def _replay_lemma(rep: Replay, n, N, point, Aj):
    """Th. 5.2 route: the generic expansion engine with (F_An, G_An)."""
    from ..bailey import expand

    Kc, hc, bc = _lemma_parts(n)
    q, a, A, B, x = point.q, point.a, point.A, point.B, point.x
    base = {"q": q, "n": n, "a": a, "A": A, "B": B, "x": x, "Aj": Aj}

    def K(M):
        return Kc(values=dict(base, M=tuple(M)))

    def h(j, M):
        return hc(values=dict(base, M=tuple(M), j=tuple(j)))

    def beta(j):
        return bc(values=dict(base, j=tuple(j)))

    beta_vals = SeqSpec({tuple(j): beta(j) for j in Aj.support}, n)
    F = kernel_family("an", a, x, q)

    def G(k, m):
        return G_An(a, x, q, k, m)

    lhs, r1 = expand(F, G, K, h, beta_vals, N)
    theorem = builtin_identity(rep.theorem).form("terminating")
    pt = ParamPoint(n, q, {"a": a, "A": A, "B": B}, {"x": x})
    t_lhs = theorem.lhs(pt, ints={"N": N}, seqs={"Aj": Aj})
    r2 = theorem.rhs(pt, ints={"N": N}, seqs={"Aj": Aj})

    oracle = compiled(rep.oracle)
    Nm = MultiIndex(N)
    env = {"a": a, "A": A, "B": B}
    r3 = ZERO
    for k in iter_box(Nm):
        mid = ZERO
        for j in beta_vals.support:
            j = MultiIndex(j)
            if not leq_componentwise(j, k):
                continue
            direct = [h(j, add(j, m)) * G(k, add(j, m)) * K(add(j, m)) for m in iter_box(sub(k, j))]
            mid += beta_vals(j) * _oracle_sum(oracle, q, n, rep.substitution(env, q, k, j), x, k, j, direct)
        if mid != 0:
            r3 += F(Nm, k) * mid
    return lhs, t_lhs, r1, r2, r3


def replay_proof(theorem: str, *, n: int = 2, N=None, trials: int = 10, seed: int = 0) -> VerificationReport:
    """R1 == R2 == R3 and matching left-hand sides at seeded points with random beta."""
    rep = REPLAYS.get(theorem)
    if rep is None:
        raise ConfigError(f"no proof replay registered for {theorem!r}")
    if n < 1:
        raise ConfigError("dimension must be ≥ 1")
    box = tuple(N) if N is not None else (2,) * n
    spec = builtin_identity(theorem)
    started = time.perf_counter()
    report = VerificationReport(f"{theorem}:proof", spec.anchor, "terminating", n, list(box), seed=seed)
    for t in range(trials):
        rng = trial_rng(seed, theorem, "replay", n, box, t)
        for _ in range(MAX_ATTEMPTS):
            point = _sample_point(rng, n)
            seq = sample_seq(rng, n, box)
            try:
                if rep.host == "lemma":
                    vals = _replay_lemma(rep, n, box, point, seq)
                else:
                    vals = _replay_host(rep, n, box, point, seq)
            except ZeroDivisionError:
                report.resampled += 1
                continue
            except ReplayMismatch as exc:
                vals = exc
            break
        else:
            raise AdmissiblePointNotFound(f"{theorem}: no admissible point for the replay")
        if isinstance(vals, ReplayMismatch):
            report.attempted += 1
            report.add_failure(dict(point.to_json(), beta=seq.to_json()), str(vals), "")
            continue
        h_lhs, t_lhs, r1, r2, r3 = vals
        report.attempted += 1
        report.residuals.append(format_residual(r1 - r2))
        if h_lhs == t_lhs and r1 == r2 == r3:
            report.passed += 1
        else:
            report.add_failure(dict(point.to_json(), beta=seq.to_json()),
                               f"{format_rational(h_lhs)} | {format_rational(t_lhs)}",
                               " | ".join(format_rational(v) for v in (r1, r2, r3)))
    report.wall_ms = int((time.perf_counter() - started) * 1000)
    return report
