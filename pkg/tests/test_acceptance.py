"""The ten acceptance criteria; each test prints one PASS/FAIL line."""
import dataclasses
import json
import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest
from gmpy2 import mpq

import handwritten as hw
from conftest import lattice, oracle_point, record_criterion
from test_dsl import MALFORMED
from qrs.bailey import F_An, F_Cn, TriMatrix, expand, invert_lower_triangular, kernel_family, pair
from qrs.dsl import compile_document, parse_document, pretty
from qrs.identities import IDS, REPLAYS, builtin_identity, reduce_to_n1, replay_proof, verify_reduction, verify_terminating
from qrs.identities.registry import COUNTERPARTS, document, shipped_documents, source
from qrs.identities.sampling import sample_inputs, trial_rng
from qrs.kernels import ParamPoint, check_product_lemma, f_An, g_Cn
from qrs.multiindex import box_size, iter_box
from qrs.numeric import TruncationPlan, verify_truncated
from qrs.seqspec import SeqSpec


@contextmanager
def criterion(tag, title, budget_s):
    started = time.perf_counter()
    notes = []
    try:
        yield notes
    except BaseException as exc:
        elapsed = time.perf_counter() - started
        record_criterion(tag, False, f"{title}: {type(exc).__name__}: {str(exc)[:160]} ({elapsed:.1f} s)")
        raise
    elapsed = time.perf_counter() - started
    extra = f"; {', '.join(notes)}" if notes else ""
    budget = f", budget {budget_s} s" if budget_s else ""
    record_criterion(tag, True, f"{title}{extra} ({elapsed:.1f} s{budget})")


def rand_rat(rng, height=9):
    while True:
        p = rng.randint(-height, height)
        if p:
            return mpq(p, rng.randint(1, height))


def rand_point(rng, n):
    xs = []
    while len(xs) < n:
        v = rand_rat(rng)
        if v not in xs:
            xs.append(v)
    v = rng.randint(2, 9)
    return rand_rat(rng), tuple(xs), mpq(rng.randint(1, v - 1), v)


def rand_function(rng):
    memo = {}

    def fn(*key):
        if key not in memo:
            memo[key] = rand_rat(rng)
        return memo[key]
    return fn


def admissible(rng, n, attempt):
    """Draw points until ``attempt(a, x, q)`` evaluates without a vanishing denominator."""
    for _ in range(1000):
        a, x, q = rand_point(rng, n)
        try:
            return attempt(a, x, q)
        except ZeroDivisionError:
            continue
    raise AssertionError("no admissible point")


# -- 1. Bailey inversion ---------------------------------------------------------

INVERSION_BOXES = {
    1: [(26,)],
    2: [(8, 8), (4, 8), (8, 4), (6, 10), (5, 5)],
    3: [(3, 3, 4), (2, 2, 8), (8, 2, 2), (2, 3, 3), (1, 2, 8)],
}


def inverse_checks(system, N, a, x, q):
    F_entry, G_entry = pair(system, a, x, q)
    F = TriMatrix.from_function(N, F_entry)
    G = TriMatrix.from_function(N, G_entry)
    return (F @ G).deviations(TriMatrix.identity(N)), invert_lower_triangular(F).deviations(G)


def test_c1_bailey_inversion():
    with criterion("C1", "Bailey inversion F*G = I and forward substitution = G", 60) as notes:
        configs = [("one", 1), ("an", 1), ("an", 2), ("an", 3), ("cn", 1), ("cn", 2), ("cn", 3)]
        checked = 0
        for system, n in configs:
            rng = random.Random(f"c1:{system}:{n}")
            for t in range(20):
                N = INVERSION_BOXES[n][t % len(INVERSION_BOXES[n])]
                assert box_size(N) <= 81
                dim = 0 if system == "one" else n
                fg, inv = admissible(rng, dim, lambda a, x, q: inverse_checks(system, N, a, x, q))
                assert fg == [] and inv == [], (system, N)
                checked += 1
        notes.append(f"{checked} points over {len(configs)} (system, n) pairs")


def test_c1_longest_one_variable_chain():
    # the single largest box, N = 80, once per system; kept out of the timed sweep
    a, q = mpq(3, 7), mpq(1, 3)
    for system, x in (("one", ()), ("an", (mpq(2, 5),)), ("cn", (mpq(-3, 4),))):
        assert inverse_checks(system, (80,), a, x, q) == ([], [])


# -- 2. Kernel specialization ----------------------------------------------------

def test_c2_kernel_specialization():
    boxes = {1: [(2,)], 2: [(2, 2)], 3: [(1, 1, 1), (2, 1, 1), (1, 2, 1)]}
    with criterion("C2", "f_An(q^m) = F_An and g_Cn(q^m) = F_Cn entries", 30) as notes:
        entries = 0
        for n in (1, 2, 3):
            rng = random.Random(f"c2:{n}")
            for t in range(20):
                N = boxes[n][t % len(boxes[n])]

                def attempt(a, x, q):
                    count = 0
                    for M in iter_box(N):
                        y = tuple(q ** v for v in M)
                        for k in iter_box(M):
                            assert f_An(y, a, x, q, k) == F_An(a, x, q, M, k)
                            assert g_Cn(y, a, x, q, k) == F_Cn(a, x, q, M, k)
                            count += 1
                    return count

                entries += admissible(rng, n, attempt)
        notes.append(f"{entries} entry pairs")


# -- 3. Product lemmas -------------------------------------------------------------

def lemma_indices(rng, which, n):
    k = tuple(rng.randint(0, 3) for _ in range(n))
    if which == "magiclemma2":
        return (k, tuple(rng.randint(0, c) for c in k))
    if which == "milne_3_12":
        return (k,)
    j = tuple(rng.randint(0, c) for c in k)
    return (k, j, tuple(rng.randint(0, c - d) for c, d in zip(k, j)))


def test_c3_product_lemmas():
    with criterion("C3", "product lemmas magiclemma2, milne_3_12, elem1", 30) as notes:
        for which in ("magiclemma2", "milne_3_12", "elem1"):
            rng = random.Random(f"c3:{which}")
            done = 0
            while done < 50:
                n = (2, 3)[done % 2]
                _, x, q = rand_point(rng, n)
                point = ParamPoint(n, q, {}, {"x": x})
                try:
                    ok = check_product_lemma(which, point, lemma_indices(rng, which, n))
                except ZeroDivisionError:
                    continue
                assert ok, which
                done += 1
        notes.append("50 configurations each")


# -- 4. Expansion engine -----------------------------------------------------------

def test_c4_expansion_engine():
    boxes = {1: [(1,), (2,)], 2: [(1, 1), (2, 1), (1, 2), (2, 2)]}
    with criterion("C4", "expand(): lhs = rhs for random K, h, beta over A_n and C_n pairs", 60) as notes:
        for system in ("an", "cn"):
            for n in (1, 2):
                rng = random.Random(f"c4:{system}:{n}")
                for t in range(20):
                    N = boxes[n][t % len(boxes[n])]
                    cells = list(iter_box(N))
                    beta = SeqSpec({tuple(j): rand_rat(rng) for j in rng.sample(cells, rng.randint(1, len(cells)))}, n)
                    K, h = rand_function(rng), rand_function(rng)

                    def attempt(a, x, q):
                        return expand(kernel_family(system, a, x, q), pair(system, a, x, q)[1],
                                      lambda M: K(tuple(M)), lambda j, M: h(tuple(j), tuple(M)), beta, N)

                    lhs, rhs = admissible(rng, n, attempt)
                    assert lhs == rhs, (system, N)
        notes.append("20 trials per (system, n)")


# -- 5. Terminating theorem suite --------------------------------------------------

TERMINATING_BOXES = {1: [(3,), (8,), (35,)], 2: [(2, 2), (1, 3), (5, 5)], 3: [(1, 1, 1), (2, 1, 2), (2, 2, 3)]}
TERMINATING_IDS = [i for i in IDS if "terminating" in builtin_identity(i).regimes]


def test_c5_terminating_suite():
    with criterion("C5", "terminating identities, exact equality", 600) as notes:
        required = {"liu_main1", "liu_gen1", "wang_ma1", "wang_ma2", "an_trans1", "an_result5a", "an_result5b",
                    "an_cntrans1", "an_cntrans2", "cn_antrans3", "dn_result5", "liu_app1", "liu3", "an_liu3",
                    "an3p2_1", "an3p2_2", "dn3p2_1", "dn3p2", "pfaff_saalschutz"}
        assert required <= set(TERMINATING_IDS)
        runs = 0
        for id in TERMINATING_IDS:
            spec = builtin_identity(id)
            for n in ((1,) if spec.n == 1 else (1, 2, 3)):
                for N in TERMINATING_BOXES[n]:
                    assert box_size(N) <= 36
                    report = verify_terminating(id, n, N, beta="random", trials=20, seed=5)
                    assert report.ok and report.passed == 20, (id, N, report.failures)
                    runs += 1
        notes.append(f"{len(TERMINATING_IDS)} ids, {runs} (id, box) runs x 20 trials")


def test_c5_dsl_agrees_with_hand_formulas():
    """The DSL evaluators against independently written formulas, side by side."""
    for id, oracle in hw.SEQUENCE_ORACLES.items():
        spec = builtin_identity(id)
        form = spec.form("terminating")
        for N in ([(3,)] if spec.n == 1 else [(2,), (2, 1), (1, 1, 1)]):
            done = 0
            for t in range(60):
                inputs = sample_inputs(spec.document.doc, len(N), N[0] if spec.n == 1 else N,
                                       trial_rng("c5-oracle", id, N, t), beta="random", key=f"{id}:{t}")
                seq = next(iter(inputs.seqs.values()), None)
                ext = next(iter(inputs.externs.values()), None)
                try:
                    got = (form.lhs(inputs.point, **inputs.kwargs()), form.rhs(inputs.point, **inputs.kwargs()))
                    expected = oracle(oracle_point(inputs), N, seq, lattice(ext) if ext else None)
                except ZeroDivisionError:
                    continue
                assert got == expected, (id, N)
                done += 1
                if done == 2:
                    break
            assert done == 2, (id, N)


# -- 6. Printed reductions ---------------------------------------------------------

PRINTED = [("wang_ma2", "rogers_delta"), ("an_result5a", "milne_6phi5_delta"),
           ("an_result5b", "milne_terminating_delta"), ("dn_result5", "bhatnagar_6phi5")]


def test_c6_reductions():
    with criterion("C6", "printed beta=delta reductions and n=1 counterparts", 120) as notes:
        for id, name in PRINTED:
            for n in ((1,) if builtin_identity(id).n == 1 else (1, 2, 3)):
                report = verify_reduction(id, name, n=n, regime="terminating", trials=10, seed=6)
                assert report.ok, (id, name, n, report.failures)
        for id in sorted(COUNTERPARTS):
            for N in (2, 4):
                report = reduce_to_n1(id, N=N, trials=5, seed=6)
                assert report.ok, (id, N, report.failures)
        notes.append(f"{len(PRINTED)} printed reductions, {len(COUNTERPARTS)} n=1 counterparts")


# -- 7. Proof replay ---------------------------------------------------------------

def test_c7_proof_replay(monkeypatch):
    with criterion("C7", "proof replays through the registered 3phi2 sums", 120) as notes:
        assert len(REPLAYS) == 5
        for theorem in sorted(REPLAYS):
            report = replay_proof(theorem, n=2, trials=10, seed=7)
            assert report.ok and report.passed == 10, (theorem, report.failures)
        # control: a wrong substitution must not replay
        good = REPLAYS["an_result5a"]
        wrong = dataclasses.replace(good, substitution=lambda e, q, k, j: (e["a"] * q ** sum(k),
                                                                             e["A"] * q ** sum(j),
                                                                             e["b"] * q ** sum(j)))
        monkeypatch.setitem(REPLAYS, "an_result5a", wrong)
        assert not replay_proof("an_result5a", n=2, trials=3, seed=7).ok
        notes.append("5 theorems x 10 points, wrong-substitution control fails")


# -- 8. Non-terminating numeric suite ----------------------------------------------

def test_c8_numeric_suite():
    plan = TruncationPlan(M=8, K=8, escalations=3, tau=mpq(1, 10 ** 20))
    assert plan.levels()[-1] == (64, 64)
    with criterion("C8", "non-terminating identities, residual < 1e-20 at M=K=64", 300) as notes:
        runs = [("wang_ma2", {}), ("cn_nt6p5", {"n": 2})]
        runs += [("cn_app1", {"n": 1, "H": H}) for H in ("cd", "gh_jk", "pow_ef")]
        for id, kw in runs:
            for q in (mpq(1, 3), mpq(1, 2)):
                report = verify_truncated(id, plan=plan, trials=5, seed=8, q=q, **kw)
                assert report.ok and report.passed == 5, (id, kw, q, report.sequences)
                for seq in report.sequences:
                    assert len(seq) == 4
        for id, kw in (("wang_ma2", {}), ("cn_app1", {"n": 1, "H": "cd"})):
            mutated = verify_truncated(id, plan=plan, trials=2, seed=8, q=mpq(1, 3), mutated=True, **kw)
            assert not mutated.ok, id
        notes.append("5 points per (identity, q); mutated rhs fails")


def test_c8_printed_condition_is_enforced():
    point = ParamPoint(2, mpq(1, 2), {"a": mpq(4), "b": mpq(1, 2), "d": mpq(1, 3)},
                       {"x": (mpq(1, 3), mpq(2, 5)), "c": (mpq(1, 2), mpq(3))})
    from qrs.errors import ConvergenceConditionViolated

    with pytest.raises(ConvergenceConditionViolated, match="aq/bCd"):
        verify_truncated("cn_nt6p5", point)


# -- 9. DSL --------------------------------------------------------------------------

def test_c9_dsl():
    with criterion("C9", "shipped documents, pretty/parse round trip, malformed diagnostics", 30) as notes:
        docs = shipped_documents()
        for kind, name in docs:
            text = source(name, kind)
            doc = parse_document(text)
            compile_document(doc)
            assert parse_document(pretty(doc)) == doc == document(name, kind)
        for id in TERMINATING_IDS:
            report = verify_terminating(id, 1, (2,), trials=2, seed=9)
            assert report.ok, id
        assert len(MALFORMED) >= 20
        for name, text, error, pos, fragment in MALFORMED:
            with pytest.raises(error) as info:
                compile_document(parse_document(text))
            exc = info.value.with_source(text)
            assert exc.position == pos, name
            assert f"at {pos[0]}:{pos[1]}" in exc.render(), name
        notes.append(f"{len(docs)} documents, {len(MALFORMED)} malformed inputs")


# -- 10. Determinism -----------------------------------------------------------------

def _verify_all(hash_seed):
    env = dict(os.environ, PYTHONHASHSEED=str(hash_seed))
    env.pop("QRS_SEED", None)
    proc = subprocess.run([sys.executable, "-c", "import sys; from qrs.cli import main; sys.exit(main())",
                           "verify", "all", "--seed", "1", "--json"],
                          capture_output=True, text=True, env=env, check=False)
    return proc.returncode, proc.stdout


def _strip_timing(text):
    return [line for line in text.splitlines() if '"wall_ms"' not in line]


def test_c10_determinism():
    with criterion("C10", "verify all --seed 1 twice gives identical reports apart from wall_ms", None) as notes:
        code1, out1 = _verify_all(1)
        code2, out2 = _verify_all(2)
        assert code1 == code2 == 0
        assert _strip_timing(out1) == _strip_timing(out2)
        reports = json.loads(out1)
        assert len(reports) >= 23
        notes.append(f"{len(reports)} reports compared")
