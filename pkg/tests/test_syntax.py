import pytest

from polyground.parser import ParseError, parse_atom, parse_program, parse_term, parse_type
from polyground.syntax import (
    App,
    Atom,
    TCtor,
    TParam,
    Var,
    apply_subst,
    format_term,
    mgu,
    rename_apart,
    term_vars,
    variant_key,
)

from conftest import load

NIL = App("nil")


def cons(h, t):
    return App("cons", (h, t))


def test_nil_declaration(lists):
    _, sig, _ = lists
    f = sig.funcs["nil"]
    assert f.arg_types == () and f.range == TCtor("list", (TParam("U"),))


def test_undeclared_predicate_is_error():
    with pytest.raises(ParseError, match="undeclared predicate p"):
        parse_program("p(X).")


def test_append_has_two_clauses():
    prog, _, _ = load("append.tlp")
    assert len(prog.clauses) == 2
    assert str(prog.clauses[1]) == "append([X|Xs],Ys,[X|Zs]) :- append(Xs,Ys,Zs)."
    assert len(prog.queries) == 1


def test_parse_error_location():
    with pytest.raises(ParseError) as e:
        parse_program("type list(U).\nfunc nil : -> list(U)\nfunc cons : U -> list(U).")
    assert e.value.line == 3


def test_arity_mismatch_detected():
    with pytest.raises(ParseError, match="arity"):
        parse_program("type list(U).\nfunc nil : -> list(U).\npred p : list(U).\np(nil(X)).")


def test_transparency_enforced():
    with pytest.raises(ParseError, match="transparency"):
        parse_program("type k.\nfunc f : U -> k.")


def test_list_sugar_roundtrip():
    t = parse_term("[a,X|T]")
    assert t == cons(App("a"), cons(Var("X"), Var("T")))
    assert format_term(t) == "[a,X|T]"
    assert format_term(parse_term("[]")) == "[]"


def test_parse_type_and_atom():
    assert parse_type("list(nest(V))") == TCtor("list", (TCtor("nest", (TParam("V"),)),))
    assert parse_atom("p(X, [])") == Atom("p", (Var("X"), NIL))


def test_literals_have_builtin_types():
    _, sig = parse_program('type t.\npred q : int, str.\nq(7, "a").')
    assert sig.funcs["7"].range == TCtor("int")
    assert sig.funcs['"a"'].range == TCtor("str")


def test_substitution_examples():
    t = cons(Var("X"), Var("Y"))
    assert apply_subst(t, {"X": App("7"), "Y": NIL}) == cons(App("7"), NIL)
    assert apply_subst(t, {}) == t
    assert apply_subst(Var("X"), {"X": Var("X")}) == Var("X")


def test_mgu_examples():
    assert mgu(Atom("p", (Var("X"),)), Atom("p", (App("7"),))) == {"X": App("7")}
    assert mgu(Atom("p", (Var("X"),)), Atom("p", (cons(Var("X"), NIL),))) is None
    got = mgu(Atom("append", (NIL, Var("Ys"), Var("Ys"))), Atom("append", (NIL, NIL, Var("Z"))))
    assert got == {"Ys": NIL, "Z": NIL}


def test_mgu_is_idempotent_and_unifies():
    a = Atom("q", (Var("X"), cons(Var("Y"), Var("X"))))
    b = Atom("q", (cons(Var("Z"), NIL), Var("W")))
    th = mgu(a, b)
    assert apply_subst(a, th) == apply_subst(b, th)
    assert apply_subst(apply_subst(a, th), th) == apply_subst(a, th)


def test_rename_apart():
    p = Atom("p", (Var("X"),))
    (r,) = rename_apart([p], avoid=p)
    assert r != p and variant_key(r) == variant_key(p)
    r1, r2 = rename_apart([p, Atom("q", (Var("X"),))])
    assert set(term_vars(r1)).isdisjoint(term_vars(r2))
    assert rename_apart([]) == []
