import pytest

from polyground.absdomain import normalize, parse_abstract, parse_abstract_atom, substitute
from polyground.order import equiv, le, match

from conftest import load

P = parse_abstract


@pytest.fixture
def env():
    return load("nests.tlp")[2]


def test_le_example_from_substitution(env):
    a, b = P("list#(int#)"), P("list#(X)+Y")
    # the stated witness is valid
    assert normalize(substitute(b, {"X": P("int#"), "Y": P("list#(0)")}), env) == a
    theta = match(a, b, env)
    assert theta is not None
    assert normalize(substitute(b, theta), env) == a
    # the computed witness is the greatest one
    assert str(theta["X"]) == "int#" and str(theta["Y"]) == "list#(int#)"


def test_le_trivial(env):
    a = normalize(P("nest#(int#,list#(X))"), env)
    assert str(a) == "X+nest#(int#,0)"
    assert le(a, a, env)
    # the greatest witness absorbs what X may add without changing the term
    assert str(match(a, a, env)["X"]) == "X+nest#(int#,0)"
    assert not le(P("X"), P("int#"), env)
    assert le(P("int#"), P("X"), env)


def test_equiv(env):
    assert equiv(P("list#(X+Y)"), P("list#(Z)"), env)
    a = P("nest#(X,Y)")
    assert equiv(a, a, env)
    assert not equiv(P("int#"), P("0"), env)


def test_le_with_extraction(env):
    # Y occupies the recursive slot, so a nest node placed there is extracted
    theta = match(P("nest#(int#+X,Z)"), P("nest#(W,Y)"), env)
    assert theta is not None
    assert str(normalize(substitute(P("nest#(W,Y)"), theta), env)) == "nest#(X+int#,Z)"


def test_le_atoms(env):
    a = parse_abstract_atom("q(list#(int#), int#)")
    b = parse_abstract_atom("q(list#(X), X)")
    assert le(a, b, env)
    assert not le(parse_abstract_atom("q(list#(int#), 0)"), b, env)
    assert not le(a, parse_abstract_atom("r(list#(X), X)"), env)


def test_ill_typed_pattern_does_not_match(env):
    assert not le(P("int#"), P("list#(X)"), env)
