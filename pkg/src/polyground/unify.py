"""Complete sets of AC+-unifiers for abstract terms, tuples and atoms.

A unifier is assembled in two layers.  First every variable receives a
node skeleton (a prefix-closed part of the largest normal term of its
type); the skeletons are searched jointly so that both sides end up with
the same nodes.  Then variables are placed: a *marker* is a variable
coordinate inside some skeleton, and a fresh variable may be put at a set
of markers exactly when, at every coordinate of the instantiated terms, it
shows up on the left iff it shows up on the right.  Each union-irreducible
such set gets its own fresh variable, which makes the second layer unitary.
"""

from __future__ import annotations

from itertools import product

from .absdomain import (
    AAtom,
    abstract_vars,
    build_from_atoms,
    canonicalize_vars,
    normalize,
    rename_abstract,
    substitute,
    tuple_atoms,
)
from .order import Relocator, as_tuple, coord_owner, host_ctors, joint_typer, le, local_tree, occurrences
from .syntax import fresh_name, unify_types
from .typegraph import TypeEnv

_MAX_PATTERNS = 4096


class UnificationLimit(RuntimeError):
    """The pattern search grew beyond the configured bound."""


def _skeletons(tree):
    """All prefix-closed subsets of the tree's node positions."""
    kids = {}
    for q in tree.nodes:
        if q:
            kids.setdefault(q[:-1], []).append(q)

    def below(q):
        opts = [below(c) for c in sorted(kids.get(q, ()))]
        out = []
        for combo in product(*[[frozenset()] + o for o in opts]):
            s = {q}
            for part in combo:
                s |= part
            out.append(frozenset(s))
        return out

    if () not in tree.nodes:
        return [frozenset()]
    return [frozenset()] + below(())


class _Side:
    def __init__(self, terms, env, rel):
        self.atoms = tuple_atoms(terms, env)
        self.nodes = frozenset(a for a in self.atoms if a[0] == "n")
        self.hosts = host_ctors(self.atoms)
        self.occ = occurrences(self.atoms)
        self.rel = rel

    def starts(self, x):
        return [self.rel.start(o, self.hosts.get(o[0])) for o in self.occ.get(x, ())]


def unify(o1, o2, env: TypeEnv, decl=None, minimize=True):
    """A complete set of AC+-unifiers of two joins, tuples or abstract atoms.

    Returns a list of substitutions (dicts from variable names to joins);
    the empty list means the inputs do not unify.
    """
    t1, p1 = as_tuple(o1)
    t2, p2 = as_tuple(o2)
    if p1 != p2 or len(t1) != len(t2):
        return []
    if decl is None and p1 is not None:
        decl = env.sig.preds.get(p1)
    t1 = normalize(t1, env)
    t2 = normalize(t2, env)
    typer, _ = joint_typer(env, t1, t2, decl=decl)
    if typer is None:
        return []
    rel = Relocator(env)
    s1, s2 = _Side(t1, env, rel), _Side(t2, env, rel)
    names = abstract_vars((t1, t2))
    trees = {x: local_tree(typer.type_of_var(x), env) for x in names}
    starts1 = {x: s1.starts(x) for x in names}
    starts2 = {x: s2.starts(x) for x in names}

    def images(x, starts, skel):
        out = set()
        for s in starts:
            for q in skel:
                im = rel.node_image(trees[x], s, q)
                if im is not None:
                    out.add(im)
        return frozenset(out)

    options = {}
    for x in names:
        opts = []
        for sk in _skeletons(trees[x]):
            i1, i2 = images(x, starts1[x], sk), images(x, starts2[x], sk)
            opts.append((sk, i1, i2))
        options[x] = opts
    full1 = {x: images(x, starts1[x], trees[x].nodes) for x in names}
    full2 = {x: images(x, starts2[x], trees[x].nodes) for x in names}
    rest1, rest2 = [frozenset()] * (len(names) + 1), [frozenset()] * (len(names) + 1)
    for i in range(len(names) - 1, -1, -1):
        rest1[i] = rest1[i + 1] | full1[names[i]]
        rest2[i] = rest2[i + 1] | full2[names[i]]

    results = []

    def search(i, chosen, n1, n2):
        if not (n1 <= s2.nodes | n2 | rest2[i] and n2 <= s1.nodes | n1 | rest1[i]):
            return
        if i == len(names):
            if s1.nodes | n1 == s2.nodes | n2:
                theta = _place_variables(names, chosen, trees, starts1, starts2, typer, rel, env)
                if theta is not None:
                    results.append(theta)
            return
        x = names[i]
        for sk, i1, i2 in options[x]:
            if not (i1 <= s2.nodes | n2 | i2 | rest2[i + 1] and i2 <= s1.nodes | n1 | i1 | rest1[i + 1]):
                continue
            chosen[x] = sk
            search(i + 1, chosen, n1 | i1, n2 | i2)
        chosen.pop(x, None)

    search(0, {}, frozenset(), frozenset())
    for th in results:
        lhs = normalize(substitute(t1, th), env)
        rhs = normalize(substitute(t2, th), env)
        assert lhs == rhs, f"unsound unifier {th}"
    if minimize:
        results = _minimize(results, names, env)
    return results


def _place_variables(names, chosen, trees, starts1, starts2, typer, rel, env):
    markers, mtype = [], {}
    a_side, b_side = {}, {}
    for x in names:
        tree, sk = trees[x], chosen[x]
        for coord in tree.coords:
            owner = coord_owner(coord)
            if owner is not None and owner not in sk:
                continue
            if owner is None and coord != ((), None):
                continue
            m = (x, coord)
            markers.append(m)
            mtype[m] = tree.coord_types[coord]
            for s in starts1[x]:
                a_side.setdefault(rel.coord_image(tree, s, coord), set()).add(m)
            for s in starts2[x]:
                b_side.setdefault(rel.coord_image(tree, s, coord), set()).add(m)
    coords = set(a_side) | set(b_side)
    hits_a = {m: set() for m in markers}
    hits_b = {m: set() for m in markers}
    for g in coords:
        for m in a_side.get(g, ()):
            hits_a[m].add(g)
        for m in b_side.get(g, ()):
            hits_b[m].add(g)

    patterns = _consistent_patterns(markers, coords, a_side, b_side, hits_a, hits_b)
    patterns = [p for p in patterns if _typable(p, mtype, typer)]
    keep = _irreducible(patterns)
    fresh = {p: fresh_name("_Z") for p in keep}
    theta = {}
    for x in names:
        tree, sk = trees[x], chosen[x]
        atoms = {("n", q, tree.nodes[q]) for q in sk}
        for p, z in fresh.items():
            for (y, coord) in p:
                if y == x:
                    atoms.add(("v", coord[0], coord[1], z))
        theta[x] = build_from_atoms(atoms, env)
    return theta


def _consistent_patterns(markers, coords, a_side, b_side, hits_a, hits_b):
    """Marker sets closed under 'hits a coordinate on one side iff on the other'.

    Generated by seeded search that adds one needed marker per step; every
    consistent set is a union of the sets produced here.
    """
    out = set()
    seen = set()

    def violation(p):
        ga, gb = set(), set()
        for m in p:
            ga |= hits_a[m]
            gb |= hits_b[m]
        for g in sorted(ga ^ gb, key=repr):
            need = b_side.get(g, set()) if g in ga else a_side.get(g, set())
            return need
        return None

    def grow(p):
        if p in seen:
            return
        seen.add(p)
        if len(seen) > _MAX_PATTERNS:
            raise UnificationLimit("too many variable-placement patterns")
        need = violation(p)
        if need is None:
            out.add(p)
            return
        for m in sorted(need, key=repr):
            grow(p | {m})

    for m in markers:
        grow(frozenset([m]))
    return sorted(out, key=lambda p: (len(p), sorted(map(repr, p))))


def _typable(pattern, mtype, typer):
    theta = dict(typer.theta)
    ts = [typer.resolve(mtype[m]) for m in pattern]
    return all(unify_types(ts[0], t, theta) for t in ts[1:])


def _irreducible(patterns):
    keep = []
    for p in patterns:
        parts = [q for q in patterns if q < p]
        union = frozenset().union(*parts) if parts else frozenset()
        if union != p:
            keep.append(p)
    return keep


def _minimize(results, names, env):
    if len(results) < 2:
        return results
    tuples = [tuple(th[x] for x in names) for th in results]
    keep = []
    for i, ti in enumerate(tuples):
        dominated = False
        for j, tj in enumerate(tuples):
            if i == j:
                continue
            if le(ti, tj, env):
                # equivalent unifiers: keep the first
                if le(tj, ti, env) and j > i:
                    continue
                dominated = True
                break
        if not dominated:
            keep.append(results[i])
    return keep


def apply_unifier(o, theta, env: TypeEnv):
    t, p = as_tuple(o)
    out = normalize(substitute(t, theta), env)
    if p is not None:
        return AAtom(p, out)
    if len(t) == 1 and not isinstance(o, tuple):
        return out[0]
    return out


def common_instances(a1, a2, env: TypeEnv, decl=None):
    """Normalized instances ``a1 θ`` for θ in a complete set of unifiers.

    ``a2`` is renamed apart from ``a1`` first.
    """
    t2, p2 = as_tuple(a2)
    (t2,) = rename_abstract([t2], avoid=as_tuple(a1)[0])
    a2 = AAtom(p2, t2) if p2 is not None else (t2 if isinstance(a2, tuple) else t2[0])
    out = []
    for th in unify(a1, a2, env, decl):
        inst = canonicalize_vars(apply_unifier(a1, th, env), env)
        if inst not in out:
            out.append(inst)
    return out
