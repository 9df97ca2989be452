import json
import subprocess
import sys

import pytest

from polyground.absdomain import parse_abstract_atom
from polyground.cli import main
from polyground.order import equiv

from conftest import load, program_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_rejects_head_condition(capsys):
    code, out, _ = run(capsys, "check", "examples/p2.tlp")
    assert code == 1
    assert "head condition violated" in out


def test_check_accepts_and_reports_recursion(capsys):
    code, out, _ = run(capsys, "check", program_path("p3.tlp"))
    assert code == 0 and "polymorphic" in out
    code, out, _ = run(capsys, "check", program_path("append.tlp"), "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["ok"] and data["monomorphic"]


@pytest.mark.parametrize("name", ["reflexive_violation.tlp", "flat_range_violation.tlp"])
def test_condition_violations_exit_1(capsys, name):
    code, _, err = run(capsys, "check", program_path(name))
    assert code == 1 and err


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", "list#(int#) + list#(0)", "--sig", "examples/lists.tlp")
    assert code == 0 and out.strip() == "list#(int#)"


def test_abstract(capsys):
    code, out, _ = run(capsys, "abstract", "n([e(7)])", "--sig", program_path("nests.tlp"))
    assert code == 0 and out.strip() == "nest#(int#,0)"


def test_labels(capsys):
    code, out, _ = run(capsys, "labels", "list(int)", "list(int)", "int", "[7,X]",
                       "--sig", program_path("lists.tlp"))
    assert code == 0 and out.strip() == "{7, X}"
    code, out, _ = run(capsys, "labels", "list(int)", "list(int)", "int", "[7,X]",
                       "--sig", program_path("lists.tlp"), "--vars-only")
    assert out.strip() == "{X}"


def test_unify(capsys):
    code, out, _ = run(capsys, "unify", "list#(X)", "list#(Y)+Z", "--sig", program_path("lists.tlp"),
                       "--format", "json")
    assert code == 0 and len(json.loads(out)) == 2
    code, out, _ = run(capsys, "unify", "int#", "list#(Y)", "--sig", program_path("lists.tlp"))
    assert code == 0 and out.strip() == "not unifiable"


def test_graph(capsys):
    code, out, _ = run(capsys, "graph", program_path("tables.tlp"))
    assert code == 0 and "table(U): nrs <U, bal, str> rec <> arity 3" in out
    code, out, _ = run(capsys, "graph", program_path("nests.tlp"), "--type", "nest(int)", "--format", "json")
    data = json.loads(out)
    assert "list(nest(int))" in data["recursive"]


def test_analyze_json_round_trips(capsys):
    code, out, _ = run(capsys, "analyze", "examples/append.tlp", "--format", "json", "--check-correctness", "4")
    assert code == 0
    data = json.loads(out)
    _, sig, env = load("append.tlp")
    atoms = [parse_abstract_atom(s) for s in data["predicates"]["append"]]
    want = ["append(list#(0),V1,V1)", "append(list#(V2),V1,V1+list#(V2))"]
    for a, w in zip(atoms, want):
        assert equiv(a, parse_abstract_atom(w), env, sig.preds["append"])
    (q,) = data["queries"]
    assert q["readback"][0]["C"]["reading"] == "C: list spine ground, elements possibly variable"
    assert data["correctness"]["ok"]


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["analyze", "append.tlp", "--max-iters", "0"],
    ["analyze", "append.tlp", "--format", "xml"],
    ["check", "/nonexistent/dir/none.tlp"],
    ["normalize", "list#(int#)"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == 2


def test_rejections_exit_1(capsys):
    assert run(capsys, "normalize", "list#(int#", "--sig", program_path("lists.tlp"))[0] == 1
    assert run(capsys, "normalize", "tree#(int#)", "--sig", program_path("lists.tlp"))[0] == 1
    assert run(capsys, "analyze", program_path("append.tlp"), "--max-iters", "1")[0] == 1


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "polyground.cli", "normalize", "list#(X)+list#(int#)",
                          "--sig", "lists.tlp"], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "list#(X+int#)"
