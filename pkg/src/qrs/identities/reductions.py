"""Printed specializations: beta = delta reductions to known summations and n = 1 reductions."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import AdmissiblePointNotFound, ConfigError, NoRegisteredCounterpart, UnknownReduction
from ..exact import ONE, format_rational, rat
from ..kernels import ParamPoint
from ..seqspec import SeqSpec
from .registry import COUNTERPARTS, builtin_identity, compiled, target
from .report import VerificationReport, format_residual
from .sampling import MAX_ATTEMPTS, Inputs, RandomFunction, sample_inputs, trial_rng


def _inv(vec):
    return tuple(ONE / v for v in vec)


def _rogers(p: ParamPoint, regime: str) -> dict:
    out = {"a": p.a, "b": p.a / p.c, "A": p.a * p.q / (p.b * p.c)}
    if regime == "nonterminating":
        out["y"] = ONE / p.d
    return out


def _milne_an(p: ParamPoint, regime: str) -> dict:
    out = {"a": p.a, "b": p.a / p.b, "A": p.a * p.q / (p.b * p.d), "x": p.x}
    if regime == "nonterminating":
        out["y"] = _inv(p.c)
    return out


def _milne_terminating(p: ParamPoint, regime: str) -> dict:
    return {"a": p.a, "b": p.a / p.b, "A": p.a * p.q / (p.b * p.c), "x": p.x}


def _dn_delta(p: ParamPoint, regime: str) -> dict:
    return {"a": p.a, "b": p.a / p.c, "A": p.a * p.q / (p.b * p.c), "x": p.x}


@dataclass(frozen=True)
class Reduction:
    """beta = delta plus a parameter substitution taking ``source`` to ``target``.

    ``mapping`` sends a point of the target summation to the source parameters
    that specialize to it.
    """

    name: str
    source: str
    target: str
    regimes: tuple
    mapping: Callable
    substitution: str


REDUCTIONS = {
    "rogers_delta": Reduction("rogers_delta", "wang_ma2", "rogers_6phi5", ("terminating", "nonterminating"),
                              _rogers, "beta=delta, b->a/c, A->aq/(bc), y->1/d"),
    "milne_6phi5_delta": Reduction("milne_6phi5_delta", "an_result5a", "milne_an_6phi5",
                                   ("terminating", "nonterminating"), _milne_an,
                                   "beta=delta, b->a/b, y_r->1/c_r, A->aq/(bd)"),
    "milne_terminating_delta": Reduction("milne_terminating_delta", "an_result5b", "milne_terminating_6phi5",
                                         ("terminating",), _milne_terminating, "beta=delta, b->a/b, A->aq/(bc)"),
    "bhatnagar_6phi5": Reduction("bhatnagar_6phi5", "dn_result5", "dn_terminating_6phi5", ("terminating",),
                                 _dn_delta, "beta=delta, b->a/c, A->aq/(bc)"),
    "gustafson_delta": Reduction("gustafson_delta", "an_cntrans2", "cn_nt6p5", ("nonterminating",), _milne_an,
                                 "beta=delta, b->a/b, y_r->1/c_r, A->aq/(bd)"),
}


def get_reduction(id: str, name: str) -> Reduction:
    red = REDUCTIONS.get(name)
    if red is None or red.source != id:
        raise UnknownReduction(f"{id}:{name}")
    return red


def _target_doc(name: str):
    return compiled(name) if name == "cn_nt6p5" else target(name)


def source_inputs(red: Reduction, tinputs: Inputs, regime: str) -> Inputs:
    p = tinputs.point
    values = red.mapping(p, regime)
    vectors = {k: tuple(v) for k, v in values.items() if isinstance(v, tuple)}
    scalars = {k: rat(v) for k, v in values.items() if not isinstance(v, tuple)}
    n = p.n
    seqs = {"beta": SeqSpec.delta(n)}
    return Inputs(ParamPoint(n, p.q, scalars, vectors), dict(tinputs.ints), seqs, {})


def verify_reduction(id: str, name: str, *, n: Optional[int] = None, N=None, regime: Optional[str] = None,
                     trials: int = 5, seed: int = 0, plan=None, q=None) -> VerificationReport:
    """Specialize ``id`` by the printed substitution and compare with the target summation.

    Both the specialized sides and the independently written target document
    are evaluated; in the terminating regime all four values must agree
    exactly.  Nonterminating reductions compare the truncated sides exactly at
    every cutoff and run the numeric criterion on the target.
    """
    red = get_reduction(id, name)
    regime = regime or red.regimes[0]
    if regime not in red.regimes:
        raise ConfigError(f"{name} has no {regime} form")
    spec = builtin_identity(id)
    n = 1 if spec.n == 1 else (n or 2)
    if n < 1:
        raise ConfigError("dimension must be ≥ 1")
    box = (N,) if isinstance(N, int) else tuple(N) if N is not None else (2,) * n
    src = spec.form(regime)
    tgt_doc = _target_doc(red.target)
    tgt = tgt_doc.form(regime)
    started = time.perf_counter()
    report = VerificationReport(f"{id}:{name}", spec.anchor, regime, n, list(box), seed=seed)
    if regime == "nonterminating":
        from ..numeric import TruncationPlan, sample_convergent, run_levels

        plan = plan or TruncationPlan()
    for t in range(trials):
        rng = trial_rng(seed, id, name, n, box, t)
        fixed = {"q": q} if q is not None else {}
        for _ in range(MAX_ATTEMPTS):
            if regime == "nonterminating":
                tin = sample_convergent(red.target, tgt_doc.doc, n, rng, fixed=fixed, report=report)
            else:
                tin = sample_inputs(tgt_doc.doc, n, box if tgt_doc.doc.dim != 1 else box[0], rng, fixed=fixed)
            sin = source_inputs(red, tin, regime)
            try:
                if regime == "terminating":
                    vals = [src.lhs(sin.point, **sin.kwargs()), src.rhs(sin.point, **sin.kwargs()),
                            tgt.lhs(tin.point, **tin.kwargs()), tgt.rhs(tin.point, **tin.kwargs())]
                else:
                    vals = run_levels([src, tgt], [sin, tin], plan)
            except ZeroDivisionError:
                report.resampled += 1
                continue
            break
        else:
            raise AdmissiblePointNotFound(f"{name}: no admissible point")
        report.attempted += 1
        if regime == "terminating":
            s_l, s_r, t_l, t_r = vals
            report.residuals.append(format_residual(t_l - t_r))
            ok = s_l == t_l and s_r == t_r and t_l == t_r
            if not ok:
                report.add_failure(tin.to_json(), f"{format_rational(s_l)} | {format_rational(t_l)}",
                                   f"{format_rational(s_r)} | {format_rational(t_r)}")
        else:
            from ..numeric import judge

            levels = vals
            same = all(s_l == t_l and s_r == t_r for (s_l, s_r), (t_l, t_r) in levels)
            residuals = [t_l - t_r for _, (t_l, t_r) in levels]
            verdict = judge(residuals, plan)
            report.residuals.extend(format_residual(r) for r in residuals)
            report.sequences.append([format_residual(r) for r in residuals])
            ok = same and verdict == "passed"
            if verdict == "inconclusive" and same:
                report.inconclusive += 1
            if not ok:
                s_l, s_r = levels[-1][0]
                report.add_failure(tin.to_json(), format_rational(s_l), format_rational(s_r))
        report.passed += ok
    report.wall_ms = int((time.perf_counter() - started) * 1000)
    return report


# -- n = 1 ----------------------------------------------------------------

def _counterpart_values(id: str, p: ParamPoint, ints: dict, cdoc) -> tuple:
    """(scalars, vectors, ints) for the one-variable counterpart of ``id`` at n = 1."""
    names = {d.name: d for d in cdoc.params}
    scalars, vectors = {}, {}
    for k, v in p.scalars.items():
        if k in names and names[k].size is None:
            scalars[k] = v
        elif k in names:
            vectors[k] = (v,)
    for k, v in p.vectors.items():
        if k in names and names[k].size is None:
            scalars[k] = v[0]
    if "N" not in ints:
        return scalars, vectors, {}
    N = ints["N"][0]
    cints = {"N": N}
    if id == "dn3p2_1":
        scalars["a"] = p.a * p.q ** N
    if id == "cn_app1":
        cints["l"] = 0
    return scalars, vectors, cints


def _trace_map(trace) -> dict:
    out = {}
    for idx, val in trace:
        key = idx if isinstance(idx, int) else idx[0]
        out[key] = out.get(key, 0) + val
    return out


def _same_trace(t1, t2) -> bool:
    a, b = _trace_map(t1), _trace_map(t2)
    return all(a.get(k, 0) == b.get(k, 0) for k in set(a) | set(b))


def reduce_to_n1(id: str, *, N: int = 3, trials: int = 5, seed: int = 0, beta="random",
                 cutoff: int = 8) -> VerificationReport:
    """Instantiate ``id`` at n = 1, x1 = 1 and compare with its one-variable counterpart.

    Side totals and the term lists of each side's outermost sum must agree
    exactly.  Nonterminating counterparts are compared at a fixed cutoff.
    """
    if id not in COUNTERPARTS:
        raise NoRegisteredCounterpart(f"{id} has no registered one-variable counterpart")
    cid, regime = COUNTERPARTS[id]
    spec = builtin_identity(id)
    cdoc = compiled(cid) if cid != "rogers_6phi5" else target(cid)
    src, ctr = spec.form(regime), cdoc.form(regime)
    box = (N,)
    started = time.perf_counter()
    shown = [N] if regime == "terminating" else {"M": cutoff, "K": cutoff}
    report = VerificationReport(f"{id}->{cid}", spec.anchor, regime, 1, shown, seed=seed)
    kw = {"M": cutoff, "K": cutoff} if regime == "nonterminating" else {}
    for t in range(trials):
        rng = trial_rng(seed, id, "n1", N, t)
        for _ in range(MAX_ATTEMPTS):
            sin = sample_inputs(spec.document.doc, 1, box, rng, beta=beta, fixed={"x1": 1},
                                key=f"{seed}:{id}:n1:{t}")
            if "H" in sin.externs:
                sin.externs["H"] = RandomFunction("H", constant=ONE)
            scalars, vectors, cints = _counterpart_values(id, sin.point, sin.ints, cdoc.doc)
            cin = Inputs(ParamPoint(1, sin.point.q, scalars, vectors), cints, dict(sin.seqs), dict(sin.externs))
            traces = [[], [], [], []]
            try:
                vals = [src.lhs(sin.point, **sin.kwargs(), trace=traces[0], **kw),
                        src.rhs(sin.point, **sin.kwargs(), trace=traces[1], **kw),
                        ctr.lhs(cin.point, **cin.kwargs(), trace=traces[2], **kw),
                        ctr.rhs(cin.point, **cin.kwargs(), trace=traces[3], **kw)]
            except ZeroDivisionError:
                report.resampled += 1
                continue
            break
        else:
            raise AdmissiblePointNotFound(f"{id}: no admissible point at n=1")
        report.attempted += 1
        ok = (vals[0] == vals[2] and vals[1] == vals[3] and _same_trace(traces[0], traces[2])
              and _same_trace(traces[1], traces[3]))
        if regime == "terminating":
            ok = ok and vals[0] == vals[1]
        report.residuals.append(format_residual(vals[1] - vals[3]))
        if ok:
            report.passed += 1
        else:
            report.add_failure(sin.to_json(), format_rational(vals[0]), format_rational(vals[1]))
    report.wall_ms = int((time.perf_counter() - started) * 1000)
    return report
