import pytest

from polyground.absdomain import (
    AbstractSyntaxError,
    AbstractTypeError,
    abstract,
    abstract_term,
    abstract_type_check,
    apply_abstract_subst,
    canonicalize_vars,
    eq_acplus,
    infer_abstract_type,
    is_normal,
    normalize,
    parse_abstract,
    parse_abstract_atom,
    shape_size,
)
from polyground.parser import add_literals, parse_term, parse_type

from conftest import load

P = parse_abstract


@pytest.fixture
def nenv():
    _, sig, env = load("nests.tlp")
    return env


@pytest.fixture
def tenv():
    return load("tables.tlp")[2]


def alpha(env, text, norm=True):
    t = parse_term(text)
    add_literals(env.sig, t)
    a = abstract_term(t, env)
    return str(normalize(a, env)) if norm else str(a)


def test_abstract_arities(nenv, tenv):
    assert nenv.abstract_signature()["list"] == 1
    assert nenv.abstract_signature()["nest"] == 2
    assert tenv.abstract_signature()["table"] == 3


def test_alpha_raw(nenv):
    assert alpha(nenv, "7", norm=False) == "int#"
    assert alpha(nenv, "[7]", norm=False) == "list#(0)+list#(int#)"
    assert alpha(nenv, "e(7)", norm=False) == "nest#(int#,0)"
    assert alpha(nenv, "X", norm=False) == "X"


def test_alpha_of_n_is_acplus_equal_to_displayed_form(nenv):
    # the displayed form drops the list#(0) summand contributed by nil
    t = parse_term("n([e(7)])")
    add_literals(nenv.sig, t)
    assert eq_acplus(abstract_term(t, nenv), P("nest#(0,list#(nest#(int#,0)))"), nenv)


def test_alpha_normalized(nenv):
    assert alpha(nenv, "[7]") == "list#(int#)"
    assert alpha(nenv, "n([e(7)])") == "nest#(int#,0)"
    assert alpha(nenv, "[[X],[7]]") == "list#(list#(X+int#))"


@pytest.mark.parametrize("raw,norm", [
    ("list#(int#) + list#(0)", "list#(int#)"),
    ("nest#(0, list#(nest#(int#,0)))", "nest#(int#,0)"),
    ("X + X", "X"),
    ("0", "0"),
    ("nest#(X, Y+list#(Z+nest#(int#,W)))", "Z+nest#(X+int#,W+Y)"),
])
def test_normalize(nenv, raw, norm):
    out = normalize(P(raw), nenv)
    assert str(out) == norm
    assert is_normal(out, nenv)


def test_eq_acplus(nenv):
    assert eq_acplus(P("list#(int#)+list#(0)"), P("list#(int#)"), nenv)
    assert eq_acplus(P("nest#(X,0)+Y"), P("Y+nest#(X,0)"), nenv)
    assert not eq_acplus(P("int#"), P("0"), nenv)


def test_canonicalize(tenv, nenv):
    assert str(canonicalize_vars(P("table#(X,bal#,X)"), tenv)) == "table#(V1,bal#,V1)"
    assert str(canonicalize_vars(P("list#(X+Y)"), nenv)) == "list#(V1)"
    assert str(canonicalize_vars(P("list#(int#)"), nenv)) == "list#(int#)"


def test_apply_abstract_subst(nenv):
    out = apply_abstract_subst(P("list#(X)+Y"), {"X": P("int#"), "Y": P("list#(0)")}, nenv)
    assert str(out) == "list#(int#)"
    assert apply_abstract_subst(P("list#(X)"), {}, nenv) == normalize(P("list#(X)"), nenv)
    assert str(apply_abstract_subst(P("X"), {"X": P("0")}, nenv)) == "0"


def test_abstract_typing(nenv):
    assert abstract_type_check(P("list#(int#)"), parse_type("list(int)"), nenv)
    assert abstract_type_check(P("nest#(int#,0)"), parse_type("nest(int)"), nenv)
    assert not abstract_type_check(P("int#"), parse_type("list(U)"), nenv)
    assert not abstract_type_check(P("list#(int#)"), parse_type("list(U)"), nenv)
    assert infer_abstract_type(P("nest#(X,Y)"), nenv) is not None
    assert infer_abstract_type(P("int#+list#(0)"), nenv) is None


def test_abstract_checks_type(nenv):
    t = parse_term("[7]")
    add_literals(nenv.sig, t)
    assert str(abstract(t, parse_type("list(int)"), nenv)) == "list#(0)+list#(int#)"
    with pytest.raises(AbstractTypeError):
        abstract(t, parse_type("nest(int)"), nenv)


def test_text_syntax_round_trip(nenv):
    for s in ["0", "X", "list#(X+int#)", "nest#(0,Y+list#(nest#(int#,0)))"]:
        assert P(str(P(s))) == P(s)
    assert str(parse_abstract_atom("append(list#(0), Y, Y)")) == "append(list#(0),Y,Y)"
    with pytest.raises(AbstractSyntaxError):
        P("list#(")


def test_normalize_rejects_mixed_constructors(nenv):
    with pytest.raises(AbstractTypeError):
        normalize(P("int#+list#(0)"), nenv)


def test_shape_size(nenv, tenv):
    assert shape_size(parse_type("int"), nenv) == 1
    assert shape_size(parse_type("list(int)"), nenv) == 2
    assert shape_size(parse_type("nest(int)"), nenv) == 3
    assert shape_size(parse_type("table(int)"), tenv) == 4
