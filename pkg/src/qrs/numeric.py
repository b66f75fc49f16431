"""Nonterminating identities: exact partial sums and truncated products at growing cutoffs."""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from typing import Optional

from gmpy2 import mpq

from .dsl import ast as A
from .dsl import compile_document
from .errors import AdmissiblePointNotFound, ConfigError, ConvergenceConditionViolated, ConvergenceNotObserved
from .exact import format_rational, rat
from .identities.registry import CONVERGENCE, H_CONVERGENCE, builtin_identity, document, linked
from .identities.report import VerificationReport, format_residual
from .identities.sampling import MAX_ATTEMPTS, Inputs, sample_inputs, sample_q, trial_rng
from .kernels import ParamPoint
from .qpoch import PochCache

MARGIN = mpq(1, 3)
MAX_Q = mpq(1, 2)
H_CHOICES = ("one", "cd", "gh_jk", "pow_ef")


@dataclass(frozen=True)
class TruncationPlan:
    """Cutoffs (M, K), doubled ``escalations`` times; pass iff the last residual is below ``tau``
    and every escalation shrinks it at least tenfold.

    Infinite products are cut where max |A| |q|^L falls below ``tau * product_guard / 100``
    (never below M), so product error sits far under the series tail.  Shrinking below
    ``tau * floor`` is unobservable against that error and counts as converged.
    """

    M: int = 8
    K: int = 8
    factor: int = 2
    tau: mpq = mpq(1, 10 ** 20)
    escalations: int = 3
    product_guard: mpq = mpq(1, 10 ** 20)
    floor: mpq = mpq(1, 10 ** 6)

    def __post_init__(self):
        if self.M < 1 or self.K < 0 or self.factor < 2 or self.escalations < 0:
            raise ConfigError("invalid truncation plan")
        if self.tau <= 0:
            raise ConfigError("tolerance must be positive")

    def levels(self) -> list:
        return [(self.M * self.factor ** i, self.K * self.factor ** i) for i in range(self.escalations + 1)]

    @property
    def product_tau(self):
        return self.tau * self.product_guard


def run_levels(forms, inputs, plan: TruncationPlan) -> list:
    """[(lhs, rhs) for each form] at every cutoff level of the plan."""
    caches = [PochCache() for _ in forms]
    out = []
    for M, K in plan.levels():
        row = []
        for form, inp, cache in zip(forms, inputs, caches):
            kw = dict(inp.kwargs(), M=M, K=K, tau=plan.product_tau, cache=cache)
            row.append((form.lhs(inp.point, **kw), form.rhs(inp.point, **kw)))
        out.append(tuple(row))
    return out


def judge(residuals, plan: TruncationPlan) -> str:
    """"passed", "inconclusive" (no tenfold shrink observed) or "failed" (shrinks but stays above tau)."""
    mags = [abs(mpq(r)) for r in residuals]
    floor = plan.tau * plan.floor
    shrink = all(b * 10 <= a or b <= floor for a, b in zip(mags, mags[1:]))
    if not shrink:
        return "inconclusive"
    return "passed" if mags[-1] < plan.tau else "failed"


def convergence_quantities(name: str, point: ParamPoint, H: Optional[str] = None):
    conv = CONVERGENCE.get(name)
    if conv is None:
        return None, False
    qs = conv.quantities(point)
    if H is not None:
        qs = qs + H_CONVERGENCE[H](point)
    return qs, conv.printed


def sample_convergent(name: str, doc: A.Document, n: int, rng, *, fixed=None, report=None, beta="delta",
                      margin=MARGIN, H: Optional[str] = None):
    """Sample until every convergence quantity is at most ``margin`` (and q <= 1/2)."""
    fixed = dict(fixed or {})
    box = (2,) * (1 if doc.dim == 1 else n)
    for _ in range(MAX_ATTEMPTS * 10):
        f = dict(fixed)
        if "q" not in f:
            f["q"] = sample_q(rng, MAX_Q)
        inp = sample_inputs(doc, n, box[0] if doc.dim == 1 else box, rng, beta=beta, fixed=f,
                            key=f"{name}:{rng.random()!r}")
        qs, _ = convergence_quantities(name, inp.point, H)
        if qs is None or all(v <= margin for _, v in qs):
            return inp
    raise AdmissiblePointNotFound(f"{name}: no point inside the convergence region")


def _first_qp(node):
    if isinstance(node, A.QP):
        return node
    if dataclasses.is_dataclass(node):
        for f in dataclasses.fields(node):
            v = getattr(node, f.name)
            items = v if isinstance(v, tuple) else (v,)
            for item in items:
                if isinstance(item, tuple):
                    for sub in item:
                        hit = _first_qp(sub)
                        if hit is not None:
                            return hit
                else:
                    hit = _first_qp(item)
                    if hit is not None:
                        return hit
    return None


def _replace_node(node, old, new):
    if node is old:
        return new
    if not dataclasses.is_dataclass(node) or isinstance(node, type):
        if isinstance(node, tuple):
            return tuple(_replace_node(x, old, new) for x in node)
        return node
    changes = {}
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        nv = _replace_node(v, old, new)
        if nv is not v:
            changes[f.name] = nv
    return dataclasses.replace(node, **changes) if changes else node


def mutate(doc: A.Document, regime: str = "nonterminating") -> A.Document:
    """Double the first q-Pochhammer base on the rhs of ``regime``: a single-factor perturbation."""
    form = doc.form(regime)
    hit = _first_qp(form.rhs)
    if hit is None:
        raise ConfigError("rhs has no q-Pochhammer factor to perturb")
    bases = (A.BinOp("*", A.Num(2), hit.bases[0]),) + tuple(hit.bases[1:])
    new_form = dataclasses.replace(form, rhs=_replace_node(form.rhs, hit, dataclasses.replace(hit, bases=bases)))
    forms = tuple(new_form if f is form else f for f in doc.forms)
    return dataclasses.replace(doc, forms=forms)


def numeric_document(id: str, H: Optional[str] = None, mutated: bool = False):
    spec = builtin_identity(id)
    if "nonterminating" not in spec.regimes:
        raise ConfigError(f"{id} has no nonterminating form")
    if not spec.numeric_eligible:
        raise ConfigError(f"{id} is not eligible for numeric verification")
    if id == "cn_app1":
        H = H or "one"
        if H not in H_CHOICES:
            raise ConfigError(f"unknown H choice {H!r}; expected one of {', '.join(H_CHOICES)}")
        doc = linked("cn_app1", f"h_{H}", regimes=("nonterminating",))
    else:
        doc = spec.document
    if mutated:
        doc = compile_document(mutate(doc.doc))
    return spec, doc


def verify_truncated(id: str, point: Optional[ParamPoint] = None, plan: Optional[TruncationPlan] = None,
                     beta=None, *, n: Optional[int] = None, H: Optional[str] = None, trials: int = 5,
                     seed: int = 0, q=None, params: Optional[dict] = None, mutated: bool = False,
                     raise_on_inconclusive: bool = False) -> VerificationReport:
    """Numeric verification of the nonterminating form.

    With ``point`` the printed convergence conditions are checked up front;
    otherwise points are sampled inside them with margin 1/3.
    """
    plan = plan or TruncationPlan()
    spec, cdoc = numeric_document(id, H, mutated)
    n = 1 if spec.n == 1 else (n if n is not None else (point.n if point is not None else 2))
    if n < 1:
        raise ConfigError("dimension must be ≥ 1")
    beta = "delta" if beta is None else beta
    fixed = dict(params or {})
    if q is not None:
        fixed["q"] = rat(q)
    if point is not None:
        fixed["q"] = point.q
        fixed.update(point.scalars)
        fixed.update(point.vectors)
        if abs(point.q) >= 1:
            raise ConvergenceConditionViolated("|q| < 1 is required")
        qs, _ = convergence_quantities(id, point, (H or "one") if id == "cn_app1" else None)
        bad = [label for label, v in (qs or []) if v >= 1]
        if bad:
            raise ConvergenceConditionViolated(f"{id}: convergence condition violated: {', '.join(bad)} >= 1")
        trials = 1
    form = cdoc.form("nonterminating")
    H = (H or "one") if id == "cn_app1" else None
    label = id if H is None else f"{id}[H={H}]"
    report = VerificationReport(label, spec.anchor, "nonterminating", n, {"M": plan.levels()[-1][0],
                                "K": plan.levels()[-1][1]}, seed=seed)
    started = time.perf_counter()
    for t in range(trials):
        rng = trial_rng(seed, label, n, t, "numeric")
        for _ in range(MAX_ATTEMPTS):
            inp = sample_convergent(id, cdoc.doc, n, rng, fixed=fixed, beta=beta, H=H)
            try:
                levels = run_levels([form], [inp], plan)
            except ZeroDivisionError:
                report.resampled += 1
                if point is not None:
                    raise AdmissiblePointNotFound(f"{id}: the given point hits a vanishing denominator")
                continue
            break
        else:
            raise AdmissiblePointNotFound(f"{id}: no admissible point")
        residuals = [l - r for ((l, r),) in levels]
        verdict = judge(residuals, plan)
        seq = [format_residual(r) for r in residuals]
        report.attempted += 1
        report.residuals.extend(seq)
        report.sequences.append(seq)
        if verdict == "passed":
            report.passed += 1
        else:
            if verdict == "inconclusive":
                report.inconclusive += 1
            (l, r), = levels[-1]
            report.add_failure(inp.to_json(), format_rational(l), format_rational(r))
    report.wall_ms = int((time.perf_counter() - started) * 1000)
    if raise_on_inconclusive and report.inconclusive:
        raise ConvergenceNotObserved(f"{label}: residual did not shrink tenfold per escalation",
                                     report.residuals)
    return report


def numeric_ids() -> list:
    from .identities.registry import IDS

    return [i for i in IDS if builtin_identity(i).numeric_eligible]
