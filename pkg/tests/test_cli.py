import io
import json

import pytest

from qrs import cli
from qrs.identities.registry import source
from qrs.identities.report import VerificationReport


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_list():
    code, out, _ = run("list")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "23 identities"
    assert len(lines) == 24
    row = next(l for l in lines if l.startswith("an_result5a "))
    assert "Th. 2.3" in row
    row = next(l for l in lines if l.startswith("cn_nt6p5 "))
    assert "nonterminating-only" in row


def test_list_json():
    code, out, _ = run("list", "--json")
    entries = json.loads(out)
    assert code == 0 and len(entries) == 23
    assert {"id", "anchor"} <= set(entries[0])


def test_verify_example():
    code, out, _ = run("verify", "an_result5a", "--n", "2", "--N", "1,1", "--trials", "20", "--seed", "7",
                       "--beta", "delta", "--jobs", "1")
    assert code == 0
    assert out.startswith("PASS")


def test_verify_all_terminating():
    code, out, _ = run("verify", "all", "--regime", "terminating", "--trials", "5", "--seed", "1", "--jobs", "1")
    assert code == 0
    assert out.strip().splitlines()[-1].endswith("reports passed")
    assert "FAIL" not in out


@pytest.mark.parametrize("argv,message", [
    (("verify", "an_result5a", "--n", "0"), "dimension must be ≥ 1"),
    (("verify", "nope"), "unknown identity 'nope'"),
    (("verify", "liu3", "--n", "2"), "one-variable identity"),
    (("verify", "an_result5a", "--N", "1,x"), ""),
    (("verify", "an_result5a", "--reduction", "nope"), "nope"),
    (("verify", "wang_ma2", "--regime", "nonterminating", "--param", "y=2", "--jobs", "1"), "convergence"),
    (("invert", "--system", "an", "--n", "2", "--param", "x1=1/2", "--param", "x2=1/2"), "pairwise distinct"),
    (("bogus",), ""),
])
def test_configuration_errors_exit_2(argv, message):
    code, _, err = run(*argv)
    assert code == 2
    assert err.startswith("qrs: error:")
    assert message in err


def test_failure_exits_1(monkeypatch):
    def failing(id, **kw):
        report = VerificationReport(id, "Th. 0", "terminating", 1, [1], attempted=1)
        report.add_failure({}, "1", "2")
        return report

    monkeypatch.setattr(cli, "verify_terminating", failing)
    code, out, _ = run("verify", "wang_ma2", "--jobs", "1")
    assert code == 1 and out.startswith("FAIL")


def test_numeric_and_modes():
    assert run("verify", "cn_app1", "--regime", "nonterminating", "--H", "pow_ef", "--trials", "1")[0] == 0
    assert run("verify", "an_result5a", "--reduction", "milne_6phi5_delta", "--trials", "2")[0] == 0
    assert run("verify", "an_result5a", "--replay", "--trials", "2")[0] == 0
    code, out, _ = run("verify", "an_trans1", "--n1", "--trials", "2")
    assert code == 0 and "wang_ma1" in out


def test_seed_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("QRS_SEED", "11")
    _, out, _ = run("verify", "an_cntrans2", "--trials", "2", "--beta", "random", "--json")
    assert json.loads(out)["seed"] == 11
    monkeypatch.delenv("QRS_SEED")
    _, again, _ = run("verify", "an_cntrans2", "--trials", "2", "--beta", "random", "--json", "--seed", "11")
    a, b = json.loads(out), json.loads(again)
    a.pop("wall_ms"), b.pop("wall_ms")
    assert a == b


def test_report_file(tmp_path):
    path = tmp_path / "report.json"
    code, _, _ = run("verify", "wang_ma2", "--trials", "3", "--seed", "2", "--out", str(path))
    report = json.loads(path.read_text())
    assert code == 0
    assert set(report) == {"id", "anchor", "regime", "n", "box", "trials", "failures", "residuals", "seed",
                           "wall_ms", "version"}
    assert report["trials"] == {"attempted": 3, "resampled": report["trials"]["resampled"], "passed": 3}


def test_beta_from_file(tmp_path):
    path = tmp_path / "beta.json"
    path.write_text(json.dumps({"0,1": "1/2", "1,0": "-3"}))
    code, out, _ = run("verify", "an_result5a", "--N", "1,1", "--beta", str(path), "--trials", "2")
    assert code == 0, out


def test_invert_examples():
    code, out, _ = run("invert", "--system", "an", "--n", "2", "--N", "2,1", "--seed", "3")
    assert code == 0 and "identity confirmed, 0 deviations" in out
    code, out, _ = run("invert", "--system", "cn", "--n", "1", "--N", "3")
    assert code == 0 and "one-variable reduction confirmed" in out
    code, out, _ = run("invert", "--system", "one", "--N", "5")
    assert code == 0


def test_fuzz():
    code, out, _ = run("fuzz", "an_result5a", "--seed", "1", "--rounds", "2")
    assert code == 0 and out.strip().endswith("2/2 fuzz runs passed")


def test_parse(tmp_path):
    good = tmp_path / "liu3.qid"
    good.write_text(source("liu3"))
    code, out, _ = run("parse", str(good))
    assert code == 0 and "ok" in out

    empty = tmp_path / "empty.qid"
    empty.write_text("")
    code, out, _ = run("parse", str(empty))
    assert code == 2 and "expected identity document" in out

    unbound = tmp_path / "unbound.qid"
    unbound.write_text(source("liu3").replace("lhs = ", "lhs = zz * ", 1))
    code, out, _ = run("parse", str(unbound))
    assert code == 2 and "BindError" in out and "zz" in out
