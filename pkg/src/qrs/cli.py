"""Command-line front-end: list, verify, invert, fuzz and parse.

Exit status: 0 when everything passed, 1 on a verification failure (or an
inconclusive numeric run), 2 on a configuration or input error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from gmpy2 import mpq

from .bailey import F1, pair, verify_inverse_pair
from .dsl import DSLError, compile_document, parse_document
from .errors import (AdmissiblePointNotFound, ConfigError, ConvergenceConditionViolated, NoRegisteredCounterpart,
                     SingularDiagonal, UnknownIdentity, UnknownReduction)
from .exact import parse_rational
from .identities import (IDS, builtin_identity, reduce_to_n1, replay_proof, verify_reduction,
                         verify_terminating)
from .identities.report import VERSION
from .identities.sampling import sample_distinct, sample_q, sample_scalar, trial_rng
from .multiindex import box_size, iter_box, parse_index
from .numeric import H_CHOICES, TruncationPlan, verify_truncated
from .seqspec import SeqSpec

OK, FAILED, CONFIG = 0, 1, 2


class UsageError(ConfigError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument helpers -------------------------------------------------------

def parse_box(text: Optional[str]):
    if text is None:
        return None
    try:
        return tuple(int(p) for p in text.replace("(", "").replace(")", "").split(","))
    except ValueError:
        raise ConfigError(f"invalid box {text!r}; expected comma-separated integers") from None


def parse_params(items) -> dict:
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"invalid --param {item!r}; expected name=p/q")
        try:
            out[name.strip()] = parse_rational(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"invalid rational in --param {item!r}") from None
    return out


def parse_beta(text: Optional[str], n: int):
    if text is None or text in ("delta", "random"):
        return text
    try:
        with open(text, encoding="utf-8") as fh:
            raw = json.load(fh)
        return SeqSpec({tuple(parse_index(k)): parse_rational(str(v)) for k, v in raw.items()}, n)
    except (OSError, ValueError, AttributeError) as exc:
        raise ConfigError(f"cannot read beta file {text!r}: {exc}") from None


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("QRS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"QRS_SEED must be an integer, got {env!r}") from None


def check_distinct(params: dict, name: str = "x"):
    comps = {k: v for k, v in params.items() if k.startswith(name) and k[len(name):].isdigit()}
    values = list(comps.values())
    if len(set(values)) != len(values):
        raise ConfigError(f"admissibility error: {name} must have pairwise distinct entries")


def make_plan(args) -> TruncationPlan:
    tau = mpq(1, 10 ** 20) if args.tau is None else parse_rational(args.tau)
    return TruncationPlan(M=args.M, K=args.K, tau=tau, escalations=args.escalations)


# -- subcommands ------------------------------------------------------------

def regime_label(spec) -> str:
    if spec.nonterminating_only:
        return "nonterminating-only"
    return "+".join(spec.regimes)


def cmd_list(args, out) -> int:
    specs = [builtin_identity(i) for i in IDS]
    if args.json:
        rows = [{"id": s.id, "anchor": s.anchor, "n": s.n, "regimes": list(s.regimes),
                 "schema": [p.to_json() for p in s.schema], "reductions": list(s.reductions)} for s in specs]
        out.write(json.dumps(rows, indent=2, ensure_ascii=False) + "\n")
        return OK
    for s in specs:
        dim = "n" if s.n == "n" else str(s.n)
        out.write(f"{s.id:<20} n={dim:<2} {regime_label(s):<28} {s.anchor:<18} {s.title}\n")
    out.write(f"{len(specs)} identities\n")
    return OK


def _run_one(job):
    """Worker body; kept at module level so process pools can pickle it."""
    kind, id, kw = job
    if kind == "terminating":
        return verify_terminating(id, **kw)
    if kind == "numeric":
        return verify_truncated(id, **kw)
    if kind == "reduction":
        return verify_reduction(id, **kw)
    if kind == "n1":
        return reduce_to_n1(id, **kw)
    if kind == "replay":
        return replay_proof(id, **kw)
    raise ValueError(kind)


def plan_jobs(args, seed: int) -> list:
    ids = list(IDS) if args.id == "all" else [args.id]
    for i in ids:
        builtin_identity(i)
    if args.n is not None and args.n < 1:
        raise ConfigError("dimension must be ≥ 1")
    params = parse_params(args.param)
    check_distinct(params)
    box = parse_box(args.N)
    jobs = []
    for i in ids:
        spec = builtin_identity(i)
        n = 1 if spec.n == 1 else (args.n or (len(box) if box else 2))
        if spec.n == 1 and args.n not in (None, 1):
            if args.id == "all":
                n = 1
            else:
                raise ConfigError(f"{i} is a one-variable identity; n must be 1")
        N = box if box is not None and args.id != "all" else (2,) * n
        if args.reduction:
            kw = dict(n=n, N=N, trials=args.trials or 5, seed=seed)
            if args.regime in ("terminating", "nonterminating"):
                kw["regime"] = args.regime
            if kw.get("regime") == "nonterminating" or args.reduction == "gustafson_delta":
                kw["plan"] = make_plan(args)
            jobs.append(("reduction", i, dict(kw, name=args.reduction)))
            continue
        if args.n1:
            jobs.append(("n1", i, dict(N=(box or (3,))[0], trials=args.trials or 5, seed=seed)))
            continue
        if args.replay:
            jobs.append(("replay", i, dict(n=n, N=N, trials=args.trials or 10, seed=seed)))
            continue
        regimes = []
        want = args.regime
        if want in ("terminating", "all", "auto") and "terminating" in spec.regimes:
            regimes.append("terminating")
        if (want in ("nonterminating", "all") or (want == "auto" and spec.nonterminating_only)) \
                and spec.numeric_eligible:
            regimes.append("nonterminating")
        if not regimes:
            if args.id == "all":
                continue
            raise ConfigError(f"{i} has no {want} form")
        beta = parse_beta(args.beta, n)
        for regime in regimes:
            if regime == "terminating":
                jobs.append(("terminating", i, dict(n=n, N=N, beta=beta or "delta", trials=args.trials or 20,
                                                    seed=seed, params=params)))
            else:
                kw = dict(n=n, plan=make_plan(args), beta=beta if beta != "random" else None,
                          trials=args.trials or 5, seed=seed, params=params)
                if i == "cn_app1":
                    kw["H"] = args.H
                    if args.n is None:
                        kw["n"] = 1
                jobs.append(("numeric", i, kw))
    return jobs


def cmd_verify(args, out) -> int:
    seed = resolve_seed(args.seed)
    jobs = plan_jobs(args, seed)
    jobs_n = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    if jobs_n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=jobs_n) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    payload = [r.to_json() for r in reports]
    text = json.dumps(payload if args.id == "all" else payload[0], indent=2, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.json:
        out.write(text)
    else:
        for r in reports:
            out.write(r.summary() + "\n")
            for f in r.failures[:1]:
                out.write(f"  first failure at {json.dumps(f.point, ensure_ascii=False)}\n")
                out.write(f"    lhs = {f.lhs}\n    rhs = {f.rhs}\n")
        passed = sum(r.ok for r in reports)
        out.write(f"{passed}/{len(reports)} reports passed\n")
    return OK if all(r.ok for r in reports) else FAILED


def cmd_fuzz(args, out) -> int:
    """Random boxes (prod(N_r+1) <= max-size), dimensions and beta families for one id or all."""
    seed = resolve_seed(args.seed)
    ids = list(IDS) if args.id == "all" else [args.id]
    failures = 0
    runs = 0
    for i in ids:
        spec = builtin_identity(i)
        if "terminating" not in spec.regimes:
            continue
        for t in range(args.rounds):
            rng = trial_rng(seed, "fuzz", i, t)
            n = 1 if spec.n == 1 else rng.randint(1, 3)
            while True:
                box = tuple(rng.randint(0, 4) for _ in range(n))
                if box_size(box) <= args.max_size:
                    break
            beta = rng.choice(["delta", "random"])
            r = verify_terminating(i, n, box, beta=beta, trials=args.trials, seed=seed + t)
            runs += 1
            failures += not r.ok
            out.write(r.summary() + "\n")
    out.write(f"{runs - failures}/{runs} fuzz runs passed\n")
    return OK if failures == 0 else FAILED


def cmd_invert(args, out) -> int:
    seed = resolve_seed(args.seed)
    system = args.system
    n = 1 if system == "one" else (args.n if args.n is not None else 1)
    if n < 1:
        raise ConfigError("dimension must be ≥ 1")
    box = parse_box(args.N) or (2,) * n
    if len(box) != n:
        raise ConfigError(f"box {list(box)} does not have {n} components")
    if any(b < 0 for b in box):
        raise ConfigError("box bounds must be non-negative")
    params = parse_params(args.param)
    check_distinct(params)
    worst = 0
    for t in range(args.trials):
        rng = trial_rng(seed, "invert", system, n, box, t)
        q = params.get("q", sample_q(rng))
        a = params.get("a", sample_scalar(rng))
        x = list(sample_distinct(rng, n))
        for r in range(n):
            x[r] = params.get(f"x{r + 1}", x[r])
        if len(set(x)) != n:
            raise ConfigError("admissibility error: x must have pairwise distinct entries")
        if any(v == 0 for v in x) or q == 0:
            raise ConfigError("admissibility error: q and x must be nonzero")
        try:
            fg, gf, inv = verify_inverse_pair(system, box, a, x, q)
        except SingularDiagonal as exc:
            out.write(f"singular diagonal at index {list(exc.index)}\n")
            return FAILED
        except ZeroDivisionError as exc:
            raise ConfigError(f"admissibility error: {exc}") from None
        devs = len(fg) + len(gf) + len(inv)
        worst = max(worst, devs)
        if n == 1 and system != "one":
            # one-variable reduction: F_An(a, x) = F1(a x), F_Cn(a, x) = F1(a x^2)
            Fs, _ = pair(system, a, x, q)
            a1 = a * x[0] if system == "an" else a * x[0] ** 2
            devs1 = sum(1 for k in iter_box(box) for m in iter_box(k) if Fs(k, m) != F1(a1, q, k[0], m[0]))
            worst = max(worst, devs1)
            if devs1 == 0:
                out.write("one-variable reduction confirmed\n")
    if worst == 0:
        out.write("identity confirmed, 0 deviations\n")
        return OK
    out.write(f"identity NOT confirmed, {worst} deviations\n")
    return FAILED


def cmd_parse(args, out) -> int:
    status = OK
    for path in args.files:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            out.write(f"{path}: {exc}\n")
            status = CONFIG
            continue
        try:
            doc = compile_document(parse_document(text))
        except DSLError as exc:
            exc.with_source(text)
            out.write(f"{path}: {exc.render()}\n")
            status = CONFIG
            continue
        regimes = ", ".join(doc.doc.regimes) or "no forms"
        out.write(f"{path}: ok ({doc.id}; {regimes})\n")
    return status


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qrs", description="Exact verification of multiple basic hypergeometric identities.")
    p.add_argument("--version", action="version", version=f"qrs {VERSION}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    lp = sub.add_parser("list", help="list built-in identities")
    lp.add_argument("--json", action="store_true")

    vp = sub.add_parser("verify", help="verify an identity (or all)")
    vp.add_argument("id")
    vp.add_argument("--n", type=int)
    vp.add_argument("--N", help="box bounds, e.g. 2,1")
    vp.add_argument("--trials", type=int)
    vp.add_argument("--seed", type=int)
    vp.add_argument("--beta", help="delta, random, or a JSON file of index -> value")
    vp.add_argument("--regime", choices=["auto", "terminating", "nonterminating", "all"], default="auto",
                    help="auto: the primary regime of each identity")
    vp.add_argument("--param", action="append", help="name=p/q; vector components as x1, x2, ...")
    vp.add_argument("--M", type=int, default=8, help="initial product cutoff")
    vp.add_argument("--K", type=int, default=8, help="initial series cutoff")
    vp.add_argument("--escalations", type=int, default=3)
    vp.add_argument("--tau", help="numeric tolerance as p/q (default 1/10^20)")
    vp.add_argument("--H", choices=H_CHOICES, default="one", help="factor H(y) for cn_app1")
    group = vp.add_mutually_exclusive_group()
    group.add_argument("--reduction", help="run a named reduction instead")
    group.add_argument("--n1", action="store_true", help="compare with the one-variable counterpart")
    group.add_argument("--replay", action="store_true", help="replay the proof through its 3phi2 oracle")
    vp.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    vp.add_argument("--out", help="write the JSON report here")
    vp.add_argument("--json", action="store_true", help="print the JSON report")

    ip = sub.add_parser("invert", help="check a Bailey pair F, G by multiplication and inversion")
    ip.add_argument("--system", choices=["an", "cn", "one"], required=True)
    ip.add_argument("--n", type=int)
    ip.add_argument("--N")
    ip.add_argument("--seed", type=int)
    ip.add_argument("--trials", type=int, default=1)
    ip.add_argument("--param", action="append")

    fp = sub.add_parser("fuzz", help="random boxes and beta families")
    fp.add_argument("id")
    fp.add_argument("--rounds", type=int, default=3)
    fp.add_argument("--trials", type=int, default=3)
    fp.add_argument("--max-size", type=int, default=36)
    fp.add_argument("--seed", type=int)

    pp = sub.add_parser("parse", help="parse and compile .qid files")
    pp.add_argument("files", nargs="+")
    return p


COMMANDS = {"list": cmd_list, "verify": cmd_verify, "invert": cmd_invert, "fuzz": cmd_fuzz, "parse": cmd_parse}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except (ConfigError, ConvergenceConditionViolated, AdmissiblePointNotFound, DSLError, UnknownIdentity,
            UnknownReduction, NoRegisteredCounterpart) as exc:
        err.write(f"qrs: error: {exc}\n")
        return CONFIG
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
