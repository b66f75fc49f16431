import dataclasses
import json

import pytest
from gmpy2 import mpq

import handwritten as hw
from conftest import lattice, oracle_point
from qrs.errors import ConfigError, UnknownIdentity, UnknownReduction
from qrs.identities import (IDS, REDUCTIONS, REPLAYS, builtin_identity, format_residual, reduce_to_n1, replay_proof,
                            verify_reduction, verify_terminating)
from qrs.identities.registry import COUNTERPARTS, NUMERIC_INELIGIBLE, compiled
from qrs.identities.replay import Replay
from qrs.identities.report import Failure, VerificationReport
from qrs.identities.sampling import RandomFunction, sample_distinct, sample_inputs, sample_q, trial_rng
from qrs.kernels import ParamPoint
from qrs.seqspec import SeqSpec

TERMINATING = [i for i in IDS if "terminating" in builtin_identity(i).regimes]


# -- registry ------------------------------------------------------------------

def test_registry_size_and_lookup():
    assert len(IDS) == 23 == len(set(IDS))
    assert builtin_identity("liu3").n == 1
    assert builtin_identity("an_result5a").anchor == "Th. 2.3"
    assert "milne_6phi5_delta" in builtin_identity("an_result5a").reductions
    assert builtin_identity("cn_nt6p5").nonterminating_only
    with pytest.raises(UnknownIdentity):
        builtin_identity("nope")


def test_numeric_eligibility_flags():
    for i in NUMERIC_INELIGIBLE:
        assert not builtin_identity(i).numeric_eligible
    for i in ("wang_ma2", "an_result5a", "cn_nt6p5", "cn_app1"):
        assert builtin_identity(i).numeric_eligible


def test_counterparts_are_one_variable():
    for id, (target, regime) in COUNTERPARTS.items():
        assert builtin_identity(id).n == "n"
        assert builtin_identity(id).counterpart == target
        if target in IDS:
            assert builtin_identity(target).n == 1
            assert regime in builtin_identity(target).regimes


# -- sampling ------------------------------------------------------------------

def test_sampling_is_seeded():
    a = [sample_q(trial_rng(1, "x", t)) for t in range(20)]
    b = [sample_q(trial_rng(1, "x", t)) for t in range(20)]
    assert a == b
    assert all(0 < abs(v) < 1 and v.denominator <= 9 for v in a)
    xs = sample_distinct(trial_rng("d"), 3)
    assert len(set(xs)) == 3


def test_random_function_keys_on_exponents():
    f = RandomFunction("k")
    y1 = type("Y", (), {"exps": (1, 2)})()
    assert f(y1) == f(type("Y", (), {"exps": (1, 2)})())
    assert RandomFunction("k", constant=mpq(3))(y1) == 3
    with pytest.raises(TypeError):
        f((mpq(1, 2),))


def test_sample_inputs_respects_fixed():
    doc = compiled("an_result5a").doc
    inputs = sample_inputs(doc, 2, (1, 2), trial_rng(0), fixed={"a": mpq(2, 7), "x2": mpq(1, 5), "q": mpq(1, 3)})
    assert inputs.point.q == mpq(1, 3)
    assert inputs.point.scalars["a"] == mpq(2, 7)
    assert inputs.point.vectors["x"][1] == mpq(1, 5)
    assert inputs.ints["N"] == (1, 2)
    assert inputs.seqs["beta"].is_delta()


# -- dual-path agreement -------------------------------------------------------

def _dual_cases():
    out = []
    for id in hw.SEQUENCE_ORACLES:
        spec = builtin_identity(id)
        boxes = [(2,), (4,)] if spec.n == 1 else [(2,), (2, 1), (1, 1, 1)]
        out += [(id, N) for N in boxes]
    return out


@pytest.mark.parametrize("id,N", _dual_cases())
def test_dsl_sides_match_hand_formulas(id, N):
    spec = builtin_identity(id)
    form = spec.form("terminating")
    n = len(N)
    agreed = 0
    for t in range(40):
        rng = trial_rng("dual", id, N, t)
        inputs = sample_inputs(spec.document.doc, n, N[0] if spec.n == 1 else N, rng, beta="random", key=f"{id}:{t}")
        seq = next(iter(inputs.seqs.values()), None)
        ext = next(iter(inputs.externs.values()), None)
        try:
            got = (form.lhs(inputs.point, **inputs.kwargs()), form.rhs(inputs.point, **inputs.kwargs()))
            expected = hw.SEQUENCE_ORACLES[id](oracle_point(inputs), N, seq, lattice(ext) if ext else None)
        except ZeroDivisionError:
            continue
        assert got == expected
        assert got[0] == got[1]
        agreed += 1
        if agreed == 3:
            break
    assert agreed == 3


@pytest.mark.parametrize("N", [(2,), (1, 1), (2, 1)])
def test_cn_app1_matches_hand_formula(N):
    spec = builtin_identity("cn_app1")
    form = spec.form("terminating")
    agreed = 0
    for t in range(40):
        inputs = sample_inputs(spec.document.doc, len(N), N, trial_rng("app1", N, t), key=f"app1:{t}")
        try:
            got = (form.lhs(inputs.point, **inputs.kwargs()), form.rhs(inputs.point, **inputs.kwargs()))
            expected = hw.cn_app1(oracle_point(inputs), N, lattice(inputs.externs["H"]))
        except ZeroDivisionError:
            continue
        assert got == expected and got[0] == got[1]
        agreed += 1
        if agreed == 3:
            break
    assert agreed == 3


@pytest.mark.parametrize("N", [(2,), (1, 1), (2, 1)])
def test_cn_nt6p5_terminating_specialisation(N):
    """At c_r = q^(-N_r) the 6phi5 sum terminates; the document's truncated series must agree."""
    form = compiled("cn_nt6p5").form("nonterminating")
    done = 0
    for t in range(40):
        inputs = sample_inputs(compiled("cn_nt6p5").doc, len(N), N, trial_rng("nt6p5", N, t))
        q = inputs.point.q
        c = tuple(q ** (-v) for v in N)
        point = inputs.point.replace(c=c)
        P = oracle_point(inputs)
        try:
            lhs, rhs = hw.cn_nt6p5_terminating(P, N)
            got = form.rhs(point, K=max(N) + 3, M=8)
            direct = hw.cn_nt6p5_rhs(P, c, N)
        except ZeroDivisionError:
            continue
        assert lhs == rhs == got == direct
        done += 1
        if done == 3:
            break
    assert done == 3


def test_liu_app1_matches_hand_formula():
    spec = builtin_identity("liu_app1")
    form = spec.form("terminating")
    done = 0
    for t in range(40):
        inputs = sample_inputs(spec.document.doc, 1, 3, trial_rng("liu_app1", t))
        P = oracle_point(inputs)
        try:
            got = (form.lhs(inputs.point, **inputs.kwargs()), form.rhs(inputs.point, **inputs.kwargs()))
            expected = hw.liu_app1(P, (3,), inputs.ints["l"], P["A"], P["B"])
        except ZeroDivisionError:
            continue
        assert got == expected and got[0] == got[1]
        done += 1
        if done == 3:
            break
    assert done == 3


# -- terminating driver --------------------------------------------------------

def test_verify_an_result5a_example():
    report = verify_terminating("an_result5a", n=2, N=(1, 1), beta="delta", trials=3, seed=4)
    assert report.ok and report.passed == 3
    assert set(report.residuals) == {"0"}


def test_verify_wang_ma2_zero_box():
    report = verify_terminating("wang_ma2", n=1, N=(0,), trials=5)
    assert report.ok


def test_verify_an_liu3_random_sequence():
    report = verify_terminating("an_liu3", n=2, N=(2, 1), beta="random", trials=5, seed=2)
    assert report.ok


def test_verify_with_pinned_point():
    point = ParamPoint(2, mpq(1, 3), {"a": mpq(2, 7), "b": mpq(-3, 5), "A": mpq(5, 4)}, {"x": (mpq(1), mpq(1, 5))})
    assert verify_terminating("an_result5b", 2, (1, 2), point=point).ok


def test_verify_bailey_entries():
    for id in ("an_bailey_inverse", "cn_bailey_inverse"):
        report = verify_terminating(id, 2, (2, 1), trials=2)
        assert report.ok and report.residuals == ["0", "0"]


@pytest.mark.parametrize("kwargs,message", [
    ({"n": 0}, "dimension must be"),
    ({"n": 2, "N": (1,)}, "does not have 2 components"),
    ({"n": 1, "N": (-1,)}, "non-negative"),
])
def test_config_errors(kwargs, message):
    with pytest.raises(ConfigError, match=message):
        verify_terminating("an_result5a", **kwargs)


def test_nonterminating_only_is_rejected():
    with pytest.raises(ConfigError):
        verify_terminating("cn_nt6p5", 2, (1, 1))


def test_beta_file_shape_checked():
    with pytest.raises(ConfigError):
        verify_terminating("an_result5a", 2, (1, 1), beta=SeqSpec({(0, 0, 0): 1}))


def test_report_determinism_and_schema():
    r1 = verify_terminating("an_cntrans2", 2, (1, 1), beta="random", trials=4, seed=9).to_json()
    r2 = verify_terminating("an_cntrans2", 2, (1, 1), beta="random", trials=4, seed=9).to_json()
    r1.pop("wall_ms"), r2.pop("wall_ms")
    assert r1 == r2
    assert set(r1) == {"id", "anchor", "regime", "n", "box", "trials", "failures", "residuals", "seed", "version"}
    assert set(r1["trials"]) == {"attempted", "resampled", "passed"}


def test_report_failures_are_capped():
    report = VerificationReport("x", "Th. 1", "terminating", 1, [1])
    for i in range(9):
        report.attempted += 1
        report.add_failure({"q": "1/2"}, str(i), "0")
    assert len(report.failures) == 5 and not report.ok
    assert report.to_json()["failures"][0] == Failure({"q": "1/2"}, "0", "0").to_json()
    assert report.summary().startswith("FAIL")


@pytest.mark.parametrize("value,text", [(mpq(0), "0"), (mpq(1, 3), "3.33333333333333333333333333333E-1"),
                                        (mpq(-2), "2.00000000000000000000000000000E+0")])
def test_format_residual(value, text):
    assert format_residual(value) == text


# -- reductions ----------------------------------------------------------------

@pytest.mark.parametrize("id,name", [("wang_ma2", "rogers_delta"), ("an_result5a", "milne_6phi5_delta"),
                                     ("an_result5b", "milne_terminating_delta"), ("dn_result5", "bhatnagar_6phi5")])
def test_printed_reductions_terminating(id, name):
    report = verify_reduction(id, name, regime="terminating", trials=3, seed=1)
    assert report.ok, report.failures


def test_reduction_lookup_errors():
    with pytest.raises(UnknownReduction):
        verify_reduction("an_result5a", "nope")
    with pytest.raises((UnknownReduction, ConfigError)):
        verify_reduction("an_result5a", "rogers_delta")


@pytest.mark.parametrize("id", sorted(COUNTERPARTS))
def test_n1_reductions(id):
    kwargs = {"N": 4} if id == "an_liu3" else {}
    report = reduce_to_n1(id, trials=2, seed=3, **kwargs)
    assert report.ok, report.failures


# -- proof replays ---------------------------------------------------------------

@pytest.mark.parametrize("theorem", sorted(REPLAYS))
def test_replay(theorem):
    report = replay_proof(theorem, n=2, trials=3, seed=5)
    assert report.ok, report.failures


def test_replay_with_wrong_substitution_fails(monkeypatch):
    good = REPLAYS["an_result5a"]
    wrong = dataclasses.replace(good, substitution=lambda e, q, k, j: (e["a"] * q ** sum(k), e["A"] * q ** sum(j),
                                                                         e["b"] * q ** sum(j)))
    monkeypatch.setitem(REPLAYS, "an_result5a", wrong)
    report = replay_proof("an_result5a", n=2, trials=3, seed=5)
    assert not report.ok
