import pytest
from gmpy2 import mpq

from qrs.errors import ConfigError, ConvergenceConditionViolated, ConvergenceNotObserved
from qrs.kernels import ParamPoint
from qrs.numeric import TruncationPlan, judge, mutate, numeric_document, numeric_ids, verify_truncated
from qrs.dsl import compile_document, parse_document
from qrs.identities.registry import compiled, source
from qrs.identities.sampling import sample_inputs, trial_rng

PLAN = TruncationPlan()


def test_plan_levels():
    assert PLAN.levels() == [(8, 8), (16, 16), (32, 32), (64, 64)]
    assert TruncationPlan(M=4, K=2, escalations=1).levels() == [(4, 2), (8, 4)]


@pytest.mark.parametrize("kwargs", [{"M": 0}, {"K": -1}, {"factor": 1}, {"escalations": -1}, {"tau": mpq(0)}])
def test_plan_rejects_bad_values(kwargs):
    with pytest.raises(ConfigError):
        TruncationPlan(**kwargs)


@pytest.mark.parametrize("residuals,verdict", [
    (["1/10", "1/10^3", "1/10^10", "1/10^30"], "passed"),
    (["1/10", "1/20", "1/10^30", "1/10^40"], "inconclusive"),
    (["1", "1/10", "1/100", "1/1000"], "failed"),
    (["0", "0", "0", "0"], "passed"),
    (["1/10^25", "1/10^40", "1/10^39", "0"], "passed"),
])
def test_judge(residuals, verdict):
    values = [mpq(1, 10 ** int(r.split("^")[1])) if "^" in r else mpq(r) for r in residuals]
    assert judge(values, PLAN) == verdict


def test_eligible_ids():
    ids = numeric_ids()
    assert {"wang_ma2", "cn_nt6p5", "cn_app1"} <= set(ids)
    assert "an_trans1" not in ids


@pytest.mark.parametrize("q", [mpq(1, 3), mpq(1, 2)])
def test_wang_ma2_rogers_case(q):
    report = verify_truncated("wang_ma2", trials=2, seed=1, q=q)
    assert report.ok, report.failures
    for seq in report.sequences:
        assert len(seq) == 4


def test_cn_app1_one_variable():
    report = verify_truncated("cn_app1", n=1, H="cd", trials=1, seed=2)
    assert report.ok and report.id == "cn_app1[H=cd]"


def test_mutation_is_caught():
    report = verify_truncated("wang_ma2", trials=2, seed=1, mutated=True)
    assert not report.ok


def test_mutate_changes_only_rhs():
    doc = compiled("wang_ma2").doc
    bad = mutate(doc)
    assert bad.form("nonterminating").lhs == doc.form("nonterminating").lhs
    assert bad.form("nonterminating").rhs != doc.form("nonterminating").rhs


def test_violated_condition_is_rejected():
    point = ParamPoint(1, mpq(1, 2), {"a": mpq(1, 3), "b": mpq(4), "A": mpq(1, 3), "y": mpq(2)}, {})
    with pytest.raises(ConvergenceConditionViolated, match=r"\|y\|"):
        verify_truncated("wang_ma2", point)


def test_q_outside_disc():
    point = ParamPoint(1, mpq(3, 2), {"a": mpq(1, 3), "b": mpq(1, 4), "A": mpq(1, 3), "y": mpq(1, 5)}, {})
    with pytest.raises(ConvergenceConditionViolated):
        verify_truncated("wang_ma2", point)


def test_pinned_point_single_trial():
    point = ParamPoint(1, mpq(1, 3), {"a": mpq(1, 3), "b": mpq(1, 5), "A": mpq(2), "y": mpq(1, 7)}, {})
    report = verify_truncated("wang_ma2", point, trials=9)
    assert report.attempted == 1 and report.ok


def test_ineligible_and_unknown_h():
    with pytest.raises(ConfigError):
        numeric_document("an_trans1")
    with pytest.raises(ConfigError):
        numeric_document("liu3")
    with pytest.raises(ConfigError):
        numeric_document("cn_app1", H="nope")


def test_inconclusive_can_raise():
    # two escalations from a tiny cutoff with a huge tolerance: nothing to shrink below
    plan = TruncationPlan(M=1, K=0, escalations=1, tau=mpq(10) ** 30)
    report = verify_truncated("cn_app1", n=1, plan=plan, trials=2, seed=0)
    if report.inconclusive:
        with pytest.raises(ConvergenceNotObserved):
            verify_truncated("cn_app1", n=1, plan=plan, trials=2, seed=0, raise_on_inconclusive=True)
    else:
        assert report.ok


@pytest.mark.parametrize("H", ["one", "cd", "gh_jk", "pow_ef"])
def test_cn_app1_each_h(H):
    report = verify_truncated("cn_app1", n=1, H=H, trials=2, seed=3)
    assert report.ok, report.sequences


@pytest.mark.parametrize("H", ["cd", "gh_jk", "pow_ef"])
def test_lattice_h_matches_products(H):
    # Hm(m) is the exact value of H(q^m); the truncated products must approach it
    text = source(f"h_{H}", "fragments").replace("dim n\n", "dim n\nints m[n]\n")
    text += "\nform nonterminating { lhs = H(qvec(m)); rhs = Hm(m); }\n"
    doc = compile_document(parse_document(text))
    inputs = sample_inputs(doc.doc, 2, (2, 1), trial_rng("hm", H), fixed={"m": (2, 1), "q": mpq(1, 3)})
    form = doc.form("nonterminating")
    exact = form.rhs(inputs.point, **inputs.kwargs())
    approx = form.lhs(inputs.point, **inputs.kwargs(), M=200, tau=mpq(1, 10 ** 40))
    assert exact != 0
    assert abs(approx - exact) < mpq(1, 10 ** 30) * max(1, abs(exact))
