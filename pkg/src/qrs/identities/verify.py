"""Exact verification of terminating identities at seeded random points."""
from __future__ import annotations

import time
from typing import Optional

from ..bailey import verify_inverse_pair
from ..errors import AdmissiblePointNotFound, ConfigError
from ..exact import format_rational
from ..kernels import ParamPoint
from ..seqspec import SeqSpec
from .registry import IdentitySpec, builtin_identity
from .report import VerificationReport, format_residual
from .sampling import MAX_ATTEMPTS, sample_distinct, sample_inputs, sample_q, sample_scalar, trial_rng


def check_dimension(spec: IdentitySpec, n: Optional[int]) -> int:
    if n is None:
        return 1 if spec.n == 1 else 2
    if not isinstance(n, int) or n < 1:
        raise ConfigError("dimension must be ≥ 1")
    if spec.n == 1 and n != 1:
        raise ConfigError(f"{spec.id} is a one-variable identity; n must be 1")
    return n


def normalize_box(spec: IdentitySpec, n: int, N) -> tuple:
    if N is None:
        return (1,) * n
    box = (N,) if isinstance(N, int) else tuple(int(v) for v in N)
    if len(box) != n:
        raise ConfigError(f"box {list(box)} does not have {n} components")
    if any(v < 0 for v in box):
        raise ConfigError("box bounds must be non-negative")
    return box


def point_fixed(point: Optional[ParamPoint], params: Optional[dict]) -> dict:
    fixed = dict(params or {})
    if point is not None:
        fixed["q"] = point.q
        fixed.update(point.scalars)
        fixed.update(point.vectors)
    return fixed


def evaluate_trial(form, spec_doc, n, box, rng, *, beta, fixed, key, report, pinned=False, seq_box=None,
                   **eval_kw):
    """Sample until both sides evaluate; returns (inputs, lhs, rhs)."""
    for _ in range(MAX_ATTEMPTS):
        inputs = sample_inputs(spec_doc, n, box if spec_doc.dim != 1 else box[0], rng, beta=beta, fixed=fixed,
                               key=key, seq_box=seq_box)
        try:
            lhs = form.lhs(inputs.point, **inputs.kwargs(), **eval_kw)
            rhs = form.rhs(inputs.point, **inputs.kwargs(), **eval_kw)
        except ZeroDivisionError:
            report.resampled += 1
            if pinned:
                break
            continue
        return inputs, lhs, rhs
    raise AdmissiblePointNotFound(f"{key}: no admissible point after {report.resampled} resamples")


def verify_terminating(id: str, n: Optional[int] = None, N=None, beta=None, point: Optional[ParamPoint] = None,
                       *, trials: int = 1, seed: int = 0, params: Optional[dict] = None) -> VerificationReport:
    """Evaluate both sides exactly; a trial passes iff lhs == rhs as canonical rationals.

    ``beta`` is "delta" (default), "random" or a SeqSpec; ``point`` pins every
    parameter it names (remaining ones are seeded-random).
    """
    spec = builtin_identity(id)
    n = check_dimension(spec, n)
    box = normalize_box(spec, n, N)
    if "terminating" not in spec.regimes:
        raise ConfigError(f"{id} has no terminating form (nonterminating only)")
    beta = "delta" if beta is None else beta
    if isinstance(beta, SeqSpec) and beta.n not in (None, n):
        raise ConfigError("beta dimension does not match n")
    started = time.perf_counter()
    report = VerificationReport(spec.id, spec.anchor, "terminating", n, list(box), seed=seed)
    fixed = point_fixed(point, params)
    if spec.delegate:
        _verify_bailey(spec, n, box, trials, seed, fixed, report)
    else:
        form = spec.form("terminating")
        for t in range(trials):
            rng = trial_rng(seed, id, n, box, t)
            inputs, lhs, rhs = evaluate_trial(form, spec.document.doc, n, box, rng, beta=beta, fixed=fixed,
                                              key=f"{seed}:{id}:{n}:{t}", report=report, pinned=point is not None)
            report.attempted += 1
            report.residuals.append(format_residual(lhs - rhs))
            if lhs == rhs:
                report.passed += 1
            else:
                report.add_failure(inputs.to_json(), format_rational(lhs), format_rational(rhs))
    report.wall_ms = int((time.perf_counter() - started) * 1000)
    return report


def _verify_bailey(spec, n, box, trials, seed, fixed, report):
    for t in range(trials):
        rng = trial_rng(seed, spec.id, n, box, t)
        for _ in range(MAX_ATTEMPTS):
            q = fixed.get("q") or sample_q(rng)
            a = fixed.get("a") or sample_scalar(rng)
            x = tuple(fixed["x"]) if "x" in fixed else sample_distinct(rng, n)
            try:
                devs = verify_inverse_pair(spec.delegate, box, a, x, q)
            except ZeroDivisionError:
                report.resampled += 1
                continue
            break
        else:
            raise AdmissiblePointNotFound(f"{spec.id}: no admissible point")
        report.attempted += 1
        count = sum(len(d) for d in devs)
        report.residuals.append(str(count))
        point = ParamPoint(n, q, {"a": a}, {"x": x})
        if count == 0:
            report.passed += 1
        else:
            report.add_failure(point.to_json(), f"{count} deviating entries", "identity")
