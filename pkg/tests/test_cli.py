import io
import json
import subprocess
import sys

import pytest

from cqcomplete.cli import EXIT_BUDGET, EXIT_NO, EXIT_USAGE, EXIT_YES, main


@pytest.fixture
def run(capsys, scenarios_dir):
    def _run(*argv, doc="school.cq"):
        args = list(argv)
        if doc:
            args += ["--file", str(scenarios_dir / doc)]
        code = main(args)
        out = capsys.readouterr()
        return code, out.out, out.err

    return _run


def test_check(run):
    assert run("check", "-q", "q_ppb")[:2] == (EXIT_YES, "complete\n")
    code, out, _ = run("check", "-q", "q_pbl_spec")
    assert (code, out) == (EXIT_YES, "complete\n")
    code, out, _ = run("check", "-q", "q_pbl")
    assert (code, out) == (EXIT_NO, "incomplete\n")


def test_generalize(run):
    code, out, _ = run("generalize", "-q", "q_pbl")
    assert code == EXIT_YES
    assert out == "q(N) :- pupil(N,C,S), school(S,primary,merano).\n"
    code, out, _ = run("generalize", "-q", "q_conn", doc="conn.cq")
    assert (code, out) == (EXIT_NO, "none\n")


def test_generalize_trace_json(run):
    code, out, _ = run("generalize", "-q", "q_pbl", "--trace", "--json", "--no-timing")
    data = json.loads(out)
    assert data["command"] == "generalize" and data["verdict"] == "mcg"
    assert [s["removed"] for s in data["trace"]] == [["learns(N,L)"], []]
    assert data["elapsed_ms"] is None and data["budget_exhausted"] is False
    assert data["queries"][0]["body"][0]["relation"] == "pupil"


def test_specialize(run):
    code, out, _ = run("specialize", "-q", "q_conn", "--k", "0", doc="conn.cq")
    assert (code, out) == (EXIT_YES, "q(X) :- conn(X,X).\n")
    code, out, _ = run("specialize", "-q", "q_pbl", "--k", "0", "--as", "q_pbl")
    assert out == "q_pbl(N) :- learns(N,english), pupil(N,C,S), school(S,primary,merano).\n"


def test_specialize_budget(run):
    code, out, err = run("specialize", "-q", "q_l", "--k", "4", "--max-extensions", "2", doc="learners.cq")
    assert code == EXIT_BUDGET
    assert "budget exhausted" in err and "partial" in out
    code, out, _ = run("specialize", "-q", "q_l", "--k", "4", "--max-unifiers", "1", "--json", doc="learners.cq")
    assert code == EXIT_BUDGET and json.loads(out)["budget_exhausted"] is True


def test_specialize_explain(run):
    code, out, _ = run("specialize", "-q", "q_pbl", "--k", "0", "--explain", "--json")
    (q,) = json.loads(out)["queries"]
    assert q["extension_size"] == 0
    assert {row["statement"] for row in q["matching"]} == {"c1", "c2", "c3"}


def test_contains_and_minimize(run, tmp_path):
    assert run("contains", "-q", "q_self", "-Q", "q_cyc2", doc="conn.cq")[:2] == (EXIT_YES, "contained\n")
    assert run("contains", "-q", "q_cyc2", "-Q", "q_self", doc="conn.cq")[:2] == (EXIT_NO, "not contained\n")
    doc = tmp_path / "m.cq"
    doc.write_text("q0(X) :- r(X,a), r(X,Y).\n")
    code = main(["minimize", "-q", "q0", "--file", str(doc)])
    assert code == EXIT_YES


def test_eval(run, tmp_path):
    data = tmp_path / "d.cq"
    data.write_text("pupil(john,1,goethe). pupil(mary,2,dante).\nschool(goethe,primary,merano).\n")
    code, out, _ = run("eval", "-q", "q_ppb", "--data", str(data))
    assert (code, out) == (EXIT_YES, "(john)\n")
    empty = tmp_path / "e.cq"
    empty.write_text("% nothing\n")
    assert run("eval", "-q", "q_ppb", "--data", str(empty))[1] == "none\n"


def test_satisfies(run, tmp_path):
    ideal, avail = tmp_path / "i.cq", tmp_path / "a.cq"
    ideal.write_text("school(goethe,primary,merano). pupil(john,1,goethe).\n")
    avail.write_text("school(goethe,primary,merano).\n")
    code, out, _ = run("satisfies", "--ideal", str(ideal), "--available", str(avail))
    assert code == EXIT_NO
    assert "c1: satisfied" in out and "c2: violated" in out
    assert "missing pupil(john,1,goethe)." in out


def test_bound(run):
    code, out, _ = run("bound", "-q", "q_pbl")
    assert code == EXIT_YES and "bound 774" in out and "suggested k 771" in out
    code, out, _ = run("bound", "-q", "q_conn", doc="conn.cq")
    assert code == EXIT_NO and "cyclic" in out


def test_verify(run):
    code, out, _ = run("verify", "--k", "0")
    assert code == EXIT_YES and out.rstrip().endswith("agree")
    code, out, _ = run("verify", "-q", "q_conn", "--k", "1", doc="conn.cq")
    assert code == EXIT_YES and "MISMATCH" not in out


def test_usage_errors(run, tmp_path):
    assert run("check", "-q", "missing")[0] == EXIT_USAGE
    bad = tmp_path / "bad.cq"
    bad.write_text("q(X) :- r(X")
    code, _, err = run("check", "-q", "q", "--file", str(bad), doc=None)
    assert code == EXIT_USAGE and "parse error" in err
    assert run("check", "-q", "q", "--file", str(tmp_path / "nope.cq"), doc=None)[0] == EXIT_USAGE


def test_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("q(X) :- r(X).\ncomplete r(X).\n"))
    assert main(["check", "-q", "q", "--stdin"]) == EXIT_YES
    assert capsys.readouterr().out == "complete\n"


def test_outputs_are_deterministic(scenarios_dir):
    cmd = [sys.executable, "-m", "cqcomplete.cli", "specialize", "-q", "q_l", "--k", "3", "--json", "--no-timing"]
    cmd += ["--file", str(scenarios_dir / "learners.cq")]
    runs = {subprocess.run(cmd, capture_output=True, check=False).stdout for _ in range(2)}
    assert len(runs) == 1
