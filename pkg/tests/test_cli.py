from __future__ import annotations

import json
import subprocess
import sys

import pytest

from repairkit.cli import main


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return {
        "ex1": write("ex1.facts", "R(a,b)\nR(c,b)\nR(c,d)\nR(e,d)\nR(e,f)\n"),
        "worked": write("w.facts", "R(a,b)\nR(c,b)\nR(c,d)\n"),
        "keys": write("k.cst", "key R : 1\nkey R : 2\n"),
        "q": write("q.q", "R(a,b)\n"),
        "false": write("false.q", "false\n"),
        "dir": tmp_path,
        "write": write,
    }


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cqa_exit_codes(files, capsys):
    code, out, _ = run(capsys, "cqa", "--db", files["ex1"], "--constraints", files["keys"], "--query", files["q"])
    assert code == 1 and out.strip() == "false"
    qt = files["write"]("any.q", "R(?x,?y)\n")
    code, out, _ = run(capsys, "cqa", "--db", files["ex1"], "--constraints", files["keys"], "--query", qt)
    assert code == 0 and out.strip() == "true"


def test_cqa_json_report(files, capsys):
    code, out, _ = run(capsys, "cqa", "--json", "--db", files["ex1"], "--constraints", files["keys"],
                       "--query", files["q"])
    assert code == 1 and json.loads(out)["cqa"] is False


def test_count_json(files, capsys):
    code, out, _ = run(capsys, "count", "--json", "--db", files["ex1"], "--constraints", files["keys"],
                       "--query", files["q"])
    rep = json.loads(out)
    assert code == 0
    assert (rep["repairs_total"], rep["repairs_falsifying"], rep["repairs_satisfying"]) == ("4", "2", "2")
    assert int(rep["repairs_total"]) == int(rep["repairs_falsifying"]) + int(rep["repairs_satisfying"])
    assert set(rep["timings_ms"]) == {"parse", "hypergraph", "decompose", "dp"}


def test_count_false_query(files, capsys):
    code, out, _ = run(capsys, "count", "--json", "--db", files["worked"], "--constraints", files["keys"],
                       "--query", files["false"])
    assert json.loads(out)["repairs_total"] == "2"


def test_reports_are_deterministic(files, capsys):
    outs = []
    for _ in range(2):
        _, out, _ = run(capsys, "count", "--json", "--db", files["ex1"], "--constraints", files["keys"],
                        "--query", files["q"])
        rep = json.loads(out)
        rep.pop("timings_ms")
        outs.append(json.dumps(rep))
    assert outs[0] == outs[1]


def test_trace_goes_to_stderr(files, capsys):
    _, out, err = run(capsys, "count", "--trace", "--db", files["worked"], "--constraints", files["keys"],
                      "--query", files["false"])
    assert "g({}, {R(c,b)}, b0, b1) = 1" in err
    assert "f(" not in out


def test_parse_error_exit_2(files, capsys):
    bad = files["write"]("bad.facts", "R(a,b)\nR(a\n")
    code, _, err = run(capsys, "count", "--db", bad, "--query", files["q"])
    assert code == 2 and "bad.facts:2:" in err


def test_schema_error_exit_2(files, capsys):
    bad = files["write"]("bad.cst", "# c\nkey R : 7\n")
    code, _, err = run(capsys, "count", "--db", files["ex1"], "--constraints", bad, "--query", files["q"])
    assert code == 2 and "bad.cst:2:" in err
    badq = files["write"]("bad.q", "S(?x)\n")
    code, _, err = run(capsys, "count", "--db", files["ex1"], "--query", badq)
    assert code == 0  # unknown relations are allowed: the query is simply false
    badq = files["write"]("bad2.q", "R(?x)\n")
    code, _, err = run(capsys, "count", "--db", files["ex1"], "--query", badq)
    assert code == 2 and "bad2.q:1:" in err


def test_missing_file_exit_2(files, capsys):
    code, _, err = run(capsys, "count", "--db", str(files["dir"] / "nope.facts"), "--query", files["q"])
    assert code == 2


def test_size_guard_exit_3(files, capsys):
    big = files["write"]("big.facts", "".join(f"R(k,v{i})\n" for i in range(26)))
    k1 = files["write"]("k1.cst", "key R : 1\n")
    code, _, err = run(capsys, "count", "--db", big, "--constraints", k1, "--query", files["q"])
    assert code == 3 and "refused" in err


def test_gen_then_compare_tw(files, capsys):
    out_dir = str(files["dir"] / "gen")
    code, out, _ = run(capsys, "gen", "bipartite", "3", "--out", out_dir)
    assert code == 0 and out.count("bipartite3.") == 3
    base = f"{out_dir}/bipartite3"
    code, out, _ = run(capsys, "gaifman", "--json", "--compare-tw", "--db", base + ".facts",
                       "--constraints", base + ".cst", "--query", base + ".q")
    m = json.loads(out)
    assert (m["tw_H"], m["tw_G"]) == (3, 0)


def test_gaifman_emit_and_stats(files, capsys):
    code, out, _ = run(capsys, "gaifman", "--emit-mso", "--db", files["ex1"], "--constraints", files["keys"],
                       "--query", files["q"])
    assert code == 0 and out.startswith(";; depfails/2") and "(define Phi" in out
    code, out, _ = run(capsys, "gaifman", "--stats", "--db", files["ex1"], "--constraints", files["keys"],
                       "--query", files["q"])
    assert json.loads(out)["relations"]["depfails"] == 8


def test_graph_tw_oracle(files, capsys):
    args = ["--db", files["ex1"], "--constraints", files["keys"]]
    code, out, _ = run(capsys, "graph", "--json", *args, "--query", files["q"])
    assert json.loads(out) == {"nodes": 5, "conflict_edges": 4, "solution_edges": 1}
    code, out, _ = run(capsys, "graph", "--dot", *args)
    assert out.startswith("graph primal {")
    export = str(files["dir"] / "t.td")
    code, out, _ = run(capsys, "tw", "--json", "--exact-max", "12", "--export", export, *args)
    assert json.loads(out)["width"] == 1 and json.loads(out)["exact"] == 1
    assert open(export).read().startswith("root 0")
    code, out, _ = run(capsys, "oracle", "--json", *args, "--query", files["q"])
    assert json.loads(out)["repairs_satisfying"] == "2"


def test_threads_env(files, capsys, monkeypatch):
    monkeypatch.setenv("REPAIRKIT_THREADS", "1")
    code, out, _ = run(capsys, "count", "--db", files["ex1"], "--constraints", files["keys"], "--query", files["q"])
    assert code == 0 and "repairs total:      4" in out
    monkeypatch.setenv("REPAIRKIT_THREADS", "x")
    with pytest.raises(SystemExit):
        main(["count", "--db", files["ex1"], "--constraints", files["keys"], "--query", files["q"]])


def test_module_entry_point(files):
    p = subprocess.run([sys.executable, "-m", "repairkit", "cqa", "--db", files["ex1"], "--constraints",
                        files["keys"], "--query", files["q"]], capture_output=True, text=True)
    assert p.returncode == 1 and p.stdout.strip() == "false"
