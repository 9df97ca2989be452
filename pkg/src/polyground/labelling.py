"""Labelling functions over the grammar of a flat type.

``labels(env, phi, start, target, t)`` returns every subterm ``s`` of ``t``
with ``start(t) ->* target(s)`` in the grammar of ``phi``, following
derivations through the recursive types of ``phi`` and stopping at its
non-recursive subterm types.
"""

from __future__ import annotations

from .syntax import App, Var, match_type, subst_type
from .typegraph import TypeEnv


class LabelError(Exception):
    pass


def _check_query(env: TypeEnv, phi, start, target):
    rec = env.recursive_types(phi)
    if start not in rec:
        raise LabelError(f"start {start} is not a recursive type of {phi}")
    if target not in rec and not env.is_nrs(target, phi):
        raise LabelError(f"target {target} is neither recursive nor a non-recursive subterm type of {phi}")
    return rec


def _children(env: TypeEnv, nt, t: App):
    f = env.sig.funcs.get(t.func)
    if f is None or len(f.arg_types) != len(t.args):
        raise LabelError(f"{t} is not a term of type {nt}")
    theta = match_type(f.range, nt)
    if theta is None:
        raise LabelError(f"{t} is not a term of type {nt}")
    return [subst_type(a, theta) for a in f.arg_types]


def labels(env: TypeEnv, phi, start, target, t) -> frozenset:
    rec = _check_query(env, phi, start, target)
    out = set()

    def walk(nt, s):
        if nt == target:
            out.add(s)
        if isinstance(s, Var):
            return
        for ty, arg in zip(_children(env, nt, s), s.args):
            if ty in rec:
                walk(ty, arg)
            elif ty == target:
                out.add(arg)

    walk(start, t)
    return frozenset(out)


def zeta(env: TypeEnv, phi, start, target, t) -> frozenset:
    return frozenset(s for s in labels(env, phi, start, target, t) if isinstance(s, Var))


def derivation_labels(env: TypeEnv, phi, start, target, t) -> frozenset:
    """Labels by exhaustive search over all derivations of the full grammar.

    Unlike :func:`labels` this does not stop at non-recursive subterm types;
    it explores every nonterminal reachable in ``G(phi)``.
    """
    g = env.grammar(phi)
    nts = set(g.nonterminals)
    out = set()
    seen = set()
    todo = [(start, t)]
    while todo:
        nt, s = todo.pop()
        if (nt, s) in seen:
            continue
        seen.add((nt, s))
        if nt == target:
            out.add(s)
        if isinstance(s, Var):
            continue
        for p in g.productions_of(nt):
            if p.func == s.func and len(p.rhs) == len(s.args):
                for ty, arg in zip(p.rhs, s.args):
                    if ty in nts:
                        todo.append((ty, arg))
    return frozenset(out)


def abstract_role(env: TypeEnv, sigma, a):
    """Content of the role ``sigma`` in a normal abstract term ``a``.

    ``a`` must have a node (or be a join of variables) of some flat type φ.
    For σ = φ this is the join of top-level variables; for a non-recursive
    subterm type it is the whole slot; for another recursive type it is the
    slot's variables.
    """
    from .absdomain import AVar, join

    top = [s for s in a.items if isinstance(s, AVar)]
    nodes = a.nodes
    if not nodes:
        return join(*top)
    nd = nodes[0]
    prof = env.profile(nd.ctor)
    if sigma == prof.tau:
        return join(*top)
    if sigma not in prof.slots:
        raise LabelError(f"{sigma} is not a role of {prof.tau}")
    return nd.args[prof.slots.index(sigma)]
