import time

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from polyground.absdomain import (
    AAtom,
    abstract_atom,
    abstract_term,
    abstract_vars,
    normalize,
    parse_abstract,
    parse_abstract_atom,
    rename_abstract,
    substitute,
)
from polyground.order import le
from polyground.syntax import Atom, Var, apply_subst, mgu, rename_apart, term_vars
from polyground.unify import apply_unifier, common_instances, unify

from conftest import load
from oracles import brute_force_unifiers
from strategies import INT, MIXED_ENV, SAMPLE_TYPES, abstract_join, concrete_term, list_of, nest_of

P, PA = parse_abstract, parse_abstract_atom


@pytest.fixture
def env():
    return load("nests.tlp")[2]


def show(ths):
    return sorted(sorted((k, str(v)) for k, v in th.items()) for th in ths)


def test_syntactic_case(env):
    assert show(unify(PA("p(X)"), PA("p(list#(int#))"), env)) == [[("X", "list#(int#)")]]


def test_ground_identical(env):
    a = PA("p(nest#(int#,0))")
    assert unify(a, a, env) == [{}]
    assert common_instances(a, a, env) == [a]


def test_non_unifiable(env):
    assert unify(P("int#"), P("list#(X)"), env) == []
    assert common_instances(PA("p(list#(int#))"), PA("p(list#(0))"), env) == []


def test_list_example_covers_stated_unifier(env):
    us = unify(PA("p(list#(X)+Y)"), PA("p(list#(int#))"), env)
    target = {"X": P("int#"), "Y": P("list#(0)")}
    assert any(le((target["X"], target["Y"]), (u["X"], u["Y"]), env) for u in us)
    names, sols = brute_force_unifiers((P("list#(X)+Y"),), (P("list#(int#)"),), env)
    for s in sols:
        assert any(le(tuple(s[x] for x in names), tuple(u[x] for x in names), env) for u in us)


def test_common_instances_example(env):
    got = {str(a) for a in common_instances(PA("p(list#(X)+Y)"), PA("p(list#(int#))"), env)}
    assert got == {"p(list#(int#))"}


def test_shared_variable_generalization(env):
    us = unify(P("list#(X)+Y"), P("Z+list#(int#)"), env)
    names, sols = brute_force_unifiers((P("list#(X)+Y"),), (P("Z+list#(int#)"),), env)
    assert sols
    for s in sols:
        assert any(le(tuple(s[x] for x in names), tuple(u[x] for x in names), env) for u in us)


def test_apply_unifier_shapes(env):
    th = {"X": P("int#")}
    assert str(apply_unifier(P("list#(X)"), th, env)) == "list#(int#)"
    assert str(apply_unifier(PA("p(X)"), th, env)) == "p(int#)"


# -- randomized --------------------------------------------------------------

_SMALL_TYPES = [INT, list_of(INT), nest_of(INT), list_of(list_of(INT))]


@st.composite
def abstract_pair(draw):
    ty = draw(st.sampled_from(_SMALL_TYPES))
    a = normalize(draw(abstract_join(ty, 2, n_vars=2, max_summands=2)), MIXED_ENV)
    b = normalize(draw(abstract_join(ty, 2, n_vars=2, max_summands=2)), MIXED_ENV)
    (b,) = rename_abstract([b], avoid=a)
    return (a,), (b,)


@settings(max_examples=300)
@given(abstract_pair())
def test_unifiers_sound_and_complete_against_oracle(pair):
    t1, t2 = pair
    assume(len(abstract_vars(t1)) <= 3 and len(abstract_vars(t2)) <= 3)
    us = unify(t1, t2, MIXED_ENV)
    for u in us:
        assert normalize(substitute(t1, u), MIXED_ENV) == normalize(substitute(t2, u), MIXED_ENV)
    names, sols = brute_force_unifiers(t1, t2, MIXED_ENV, max_join=2 if len(abstract_vars((t1, t2))) <= 4 else 1)
    for s in sols:
        assert any(le(tuple(s[x] for x in names), tuple(u.get(x) for x in names), MIXED_ENV) for u in us), s


def _generalize(t, flags, counter):
    """Replace the subterms picked by ``flags`` (pre-order) with fresh variables."""
    from polyground.syntax import App

    i = counter[0]
    counter[0] += 1
    if isinstance(t, Var):
        return t
    if flags[i % len(flags)]:
        return Var(f"G{i}")
    return App(t.func, tuple(_generalize(a, flags, counter) for a in t.args))


@st.composite
def concrete_pair(draw):
    ty = draw(st.sampled_from(_SMALL_TYPES))
    a1 = Atom("q", (draw(concrete_term(ty, 3, n_vars=2)),))
    a2 = Atom("q", (draw(concrete_term(ty, 3, n_vars=2)),))
    (a2,) = rename_apart([a2], avoid=a1)
    flags = draw(st.lists(st.sampled_from([False, False, False, True]), min_size=1, max_size=8))
    g1 = Atom("q", tuple(_generalize(t, flags, [0]) for t in a1.args))
    g2 = Atom("q", tuple(_generalize(t, flags[::-1], [0]) for t in a2.args))
    (g2,) = rename_apart([g2], avoid=g1)
    return a1, a2, g1, g2


@settings(max_examples=200)
@given(concrete_pair())
def test_abstract_unification_correct_and_optimal(data):
    a1, a2, g1, g2 = data
    theta = mgu(a1, a2)
    assume(theta is not None)
    env = MIXED_ENV
    A1 = normalize(abstract_atom(g1, env), env)
    A2 = normalize(abstract_atom(g2, env), env)
    assume(len(abstract_vars(A1.args)) <= 3 and len(abstract_vars(A2.args)) <= 3)
    # g_i is more general than a_i, so A_i describes a_i
    assert le(abstract_atom(a1, env), A1, env) and le(abstract_atom(a2, env), A2, env)
    us = unify(A1, A2, env)
    inst = abstract_atom(apply_subst(a1, theta), env)
    assert any(le(inst, apply_unifier(A1, u, env), env) for u in us)
    # whatever a common instance describes is described by both inputs
    for ci in common_instances(A1, A2, env):
        if le(inst, ci, env):
            assert le(inst, A1, env) and le(inst, A2, env)
