import pytest

from polyground.parser import parse_program, parse_term, parse_type
from polyground.syntax import TParam
from polyground.typecheck import (
    GOAL,
    ProgramTypingError,
    TypingError,
    check_clause,
    check_program,
    check_query,
    compile_query,
    infer_term_type,
    recursion_mode,
    term_has_type,
)

from conftest import load

T = parse_type


def test_infer_term_type(lists):
    _, sig, _ = lists
    from polyground.parser import add_literals
    assert infer_term_type({"X": T("int")}, parse_term("[X]"), sig) == T("list(int)")
    assert infer_term_type({"X": T("list(W)")}, parse_term("[X]"), sig) == T("list(list(W))")
    seven = parse_term("7")
    add_literals(sig, seven)
    assert infer_term_type({}, seven, sig) == T("int")


@pytest.mark.parametrize("name", ["p1.tlp", "p2.tlp"])
def test_head_condition_rejections(name):
    prog, sig, _ = load(name)
    with pytest.raises(ProgramTypingError) as e:
        check_program(prog, sig)
    first = e.value.errors[0]
    assert first.rule == "Head" and "head condition violated" in str(first)
    assert str(first.clause) == "p([X]) :- p(X)."


def test_p3_accepted_and_polymorphic():
    prog, sig, _ = load("p3.tlp")
    js = check_program(prog, sig)
    mode = recursion_mode(prog, js, sig)
    assert not mode.monomorphic
    assert str(mode.witness) == "p(X) :- p([X])."
    # the call is typed at list(list(U)), the head at list(U)
    assert js[0].theta(0)["U"] == T("list(U)")


@pytest.mark.parametrize("name", ["append.tlp", "tables.tlp", "nests_flatten.tlp"])
def test_monomorphic_programs(name):
    prog, sig, _ = load(name)
    assert recursion_mode(prog, check_program(prog, sig), sig).monomorphic


def test_facts_only_is_monomorphic():
    prog, sig = parse_program("type k.\nfunc a : -> k.\npred q : k.\nq(a).")
    assert recursion_mode(prog, check_program(prog, sig), sig).monomorphic


def test_ill_typed_body_atom_reported_as_atom():
    prog, sig = parse_program(
        "type list(U).\nfunc nil : -> list(U).\nfunc cons : U, list(U) -> list(U).\n"
        "pred p : list(U).\npred q : int.\np(X) :- q(X), q([]).")
    with pytest.raises(TypingError) as e:
        check_clause(prog.clauses[0], sig)
    assert e.value.rule == "Atom"


def test_judgement_contents():
    prog, sig, _ = load("append.tlp")
    j = check_clause(prog.clauses[1], sig)
    assert j.var_types["X"] == TParam("U")
    assert j.var_types["Xs"] == T("list(U)")
    assert j.head_types == (T("list(U)"),) * 3


def test_query_typing_and_goal_clause():
    prog, sig, _ = load("append.tlp")
    q = prog.queries[0]
    j = check_query(q, sig)
    assert [j.var_types[v] for v in ("A", "B", "C")] == [T("T1"), T("T1"), T("list(T1)")]
    clause, types = compile_query(q, sig)
    assert clause.head.pred == GOAL and [a.name for a in clause.head.args] == ["A", "B", "C"]
    assert types == (T("T1"), T("T1"), T("list(T1)"))


def test_term_has_type(lists):
    _, sig, _ = lists
    assert term_has_type(parse_term("[X]"), T("list(U)"), sig)
    assert term_has_type(parse_term("[[X]]"), T("list(list(int))"), sig)
    assert not term_has_type(parse_term("[nil]"), T("list(int)"), sig)
    assert term_has_type(parse_term("X"), T("list(int)"), sig)
