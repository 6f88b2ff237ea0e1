import json
from pathlib import Path

import jsonschema
import pytest

from tabterm import corpus_path
from tabterm.cli import run_cli

SCHEMA = json.loads((Path(__file__).resolve().parents[1] / "docs" / "report-schema.json").read_text())


def cli(capsys, *argv):
    code = run_cli([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def src(name):
    return corpus_path(name if name.endswith(".tlp") else name + ".tlp")


def strip_timing(doc):
    doc = dict(doc)
    doc.pop("timing", None)
    doc["runs"] = [{k: v for k, v in r.items() if k != "seconds"} for r in doc["runs"]]
    return doc


@pytest.mark.parametrize("name,code", [("reachable", 0), ("grammar_r", 0), ("path", 1),
                                       ("exaconstr", 1), ("pq_loop", 1), ("grammar_pr", 1)])
def test_check_exit_codes_and_schema(capsys, name, code):
    c, out, _ = cli(capsys, "check", src(name))
    assert c == code
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)


def test_check_require_quasi(capsys):
    assert cli(capsys, "check", src("exaconstr"), "--require", "quasi")[0] == 0
    assert cli(capsys, "check", src("exaconstr"), "--require", "lg")[0] == 1


def test_check_deterministic(capsys):
    a = json.loads(cli(capsys, "check", src("reachable"))[1])
    b = json.loads(cli(capsys, "check", src("reachable"))[1])
    assert strip_timing(a) == strip_timing(b)


def test_input_errors(capsys, tmp_path):
    assert cli(capsys, "check", tmp_path / "missing.tlp")[0] == 2
    bad = tmp_path / "bad.tlp"
    bad.write_text("p(a :- q.")
    code, _, err = cli(capsys, "check", bad)
    assert code == 2 and "bad.tlp" in err
    assert cli(capsys, "run", src("path"), "--max-steps", "0")[0] == 2
    assert cli(capsys, "run", src("path"), "--query", "path(")[0] == 2
    assert cli(capsys, "check", src("path"), "-k", "-1")[0] == 2
    assert cli(capsys, "frobnicate")[0] == 2


def test_missing_modes_and_default_mode(capsys, tmp_path):
    f = tmp_path / "p.tlp"
    f.write_text(":- table p/1.\np(a).\n:- query p(X).")
    assert cli(capsys, "run", f)[0] == 2
    code, out, _ = cli(capsys, "run", f, "--default-mode", "all-out")
    assert code == 0 and json.loads(out)["runs"][0]["answers"] == ["p(a)"]


def test_no_query(capsys, tmp_path):
    f = tmp_path / "p.tlp"
    f.write_text(":- mode p(i).\np(a).")
    assert cli(capsys, "run", f)[0] == 2


def test_run_reachable_and_trace(capsys, tmp_path):
    trace, fdot, cdot = tmp_path / "t.jsonl", tmp_path / "f.dot", tmp_path / "c.dot"
    code, out, _ = cli(capsys, "run", src("reachable"), "--trace", trace,
                       "--forest-dot", fdot, "--call-graph-dot", cdot)
    assert code == 0
    run = json.loads(out)["runs"][0]
    assert run["status"] == "Completed" and len(run["trees"]) == 2
    recs = [json.loads(line) for line in trace.read_text().splitlines()]
    assert {r["event"] for r in recs} == {"node", "answer"}
    assert sum(r["event"] == "answer" for r in recs) == 4
    roots = [r for r in recs if r["event"] == "node" and r["kind"] == "root"]
    assert len(roots) == 2
    assert fdot.read_text().startswith("digraph forest") and cdot.read_text().startswith("digraph callgraph")


def test_run_path_exhausts(capsys):
    code, out, _ = cli(capsys, "run", src("path"), "--query", "path(a,[e(a,b),e(b,a)],Y,L)")
    assert code == 1
    run = json.loads(out)["runs"][0]
    assert run["status"] == "Exhausted(answers)" and len(run["trees"]) == 2


def test_transform(capsys):
    code, out, _ = cli(capsys, "transform", src("path"))
    assert code == 0 and ":- table path/4, path__a/4." in out and "path__a(X1,X2,X3,X4)." in out


def test_graph_outputs(capsys):
    code, out, _ = cli(capsys, "graph", src("reachable"))
    assert code == 0 and out.startswith("digraph") and "shape=box" in out
    code, out, _ = cli(capsys, "graph", src("path"), "--call-graph")
    assert code == 0 and out.startswith("digraph callgraph")
    code, out, _ = cli(capsys, "graph", src("reachable"), "--forest")
    assert code == 0 and out.startswith("digraph forest")


def test_certify(capsys, tmp_path):
    code, out, _ = cli(capsys, "certify", src("exaconstr"), corpus_path("exaconstr_cert.json"))
    assert code == 0 and json.loads(out)["ok"] is True
    bad = tmp_path / "zero.json"
    doc = json.loads(Path(corpus_path("exaconstr_cert.json")).read_text())
    doc["pred_coeffs"]["path/3"] = [0, 0, 0]
    bad.write_text(json.dumps(doc))
    code, out, _ = cli(capsys, "certify", src("exaconstr"), bad)
    assert code == 1 and not json.loads(out)["ok"]
    assert cli(capsys, "certify", src("path"), corpus_path("exaconstr_cert.json"))[0] == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert cli(capsys, "certify", src("exaconstr"), junk)[0] == 2


@pytest.mark.parametrize("name,verdict", [("reachable", "lg"), ("grammar_r", "lg"),
                                          ("path", "quasi"), ("exapq", "quasi")])
def test_certify_accepts_check_certificates(capsys, tmp_path, name, verdict):
    doc = json.loads(cli(capsys, "check", src(name))[1])
    cert = tmp_path / "c.json"
    cert.write_text(json.dumps(doc[verdict]["certificate"]))
    assert cli(capsys, "certify", src(name), cert)[0] == 0


def test_output_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert cli(capsys, "check", src("reachable"), "-o", out)[0] == 0
    jsonschema.validate(json.loads(out.read_text()), SCHEMA)


def test_color_env(capsys, monkeypatch):
    monkeypatch.setenv("TABTERM_COLOR", "1")
    _, _, err = cli(capsys, "run", src("reachable"))
    assert "\033[32m" in err
    monkeypatch.setenv("TABTERM_COLOR", "0")
    _, _, err = cli(capsys, "run", src("reachable"))
    assert "\033[" not in err
