"""Instantiation order on abstract terms modulo AC+.

Normal terms are handled as sets of atoms (see
:func:`polyground.absdomain.term_atoms`).  Substituting a normal term for a
variable acts atom by atom: each atom of the substituted term is relocated
to a coordinate of the host, and a node that lands in a recursive slot is
dissolved by extraction.  Because relocation commutes with unions, the
greatest substitution compatible with a target term can be computed one
atom at a time, which makes matching exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .absdomain import (
    AAtom,
    AJoin,
    AbstractTyper,
    _extraction,
    abstract_vars,
    build_from_atoms,
    normalize,
    rename_abstract,
    substitute,
    tuple_atoms,
)
from .syntax import TParam, match_type, subst_type
from .typegraph import TypeEnv

_TREE_DEPTH_CAP = 64


@dataclass(frozen=True)
class LocalTree:
    """Largest node skeleton of a normal term of a given type.

    ``nodes`` maps a local position to its constructor; ``slot_types`` maps
    a variable coordinate ``(pos, slot)`` to the type of the join there.
    """

    nodes: dict
    coords: tuple
    coord_types: dict


def local_tree(ty, env: TypeEnv) -> LocalTree:
    nodes, coords, ctypes = {}, [((), None)], {((), None): ty}

    def grow(pos, t, depth):
        if isinstance(t, TParam):
            return
        if depth > _TREE_DEPTH_CAP:
            raise RecursionError(f"normal-term shape of {ty} is too deep")
        prof = env.profile(t.name)
        theta = match_type(env.sig.flat_type(t.name), t)
        nodes[pos] = t.name
        m1 = len(prof.nrs)
        for i, rho in enumerate(prof.slots):
            st = subst_type(rho, theta)
            if i < m1:
                coords.append((pos + (i,), None))
                ctypes[(pos + (i,), None)] = st
                grow(pos + (i,), st, depth + 1)
            else:
                coords.append((pos, i))
                ctypes[(pos, i)] = st

    grow((), ty, 0)
    return LocalTree(nodes, tuple(coords), ctypes)


def coord_owner(coord):
    """Local node that must exist for a variable coordinate (None for the root join)."""
    pos, slot = coord
    if slot is not None:
        return pos
    return pos[:-1] if pos else None


class Relocator:
    """Maps local atoms of a substituted term to coordinates of the host."""

    def __init__(self, env: TypeEnv):
        self.env = env
        self.ex = _extraction(env)
        self._m1 = {}

    def m1(self, c):
        r = self._m1.get(c)
        if r is None:
            r = len(self.env.profile(c).nrs)
            self._m1[c] = r
        return r

    def start(self, occ, host_ctor):
        pos, slot = occ
        if slot is None:
            return ("j", pos)
        return ("r", pos, slot, host_ctor)

    def step(self, state, c, k):
        """Enter slot ``k`` of a local node with constructor ``c`` placed at ``state``."""
        if state[0] == "j":
            pos = state[1]
            if k < self.m1(c):
                return ("j", pos + (k,))
            return ("r", pos, k, c)
        _, pos, j, d = state
        dest = self.ex.dest(d, j)[k]
        if dest is None:
            return ("j", pos)
        if dest < self.m1(d):
            return ("j", pos + (dest,))
        return ("r", pos, dest, d)

    def walk(self, tree: LocalTree, state, lpos):
        for n in range(len(lpos)):
            state = self.step(state, tree.nodes[lpos[:n]], lpos[n])
        return state

    def node_image(self, tree, state0, lpos):
        st = self.walk(tree, state0, lpos)
        if st[0] == "j":
            return ("n", st[1], tree.nodes[lpos])
        return None

    def coord_image(self, tree, state0, coord):
        """Global variable coordinate ``(pos, slot)`` of a local one."""
        lpos, slot = coord
        st = self.walk(tree, state0, lpos)
        if slot is not None:
            st = self.step(st, tree.nodes[lpos], slot)
        if st[0] == "j":
            return (st[1], None)
        return (st[1], st[2])


def occurrences(atoms):
    """Variable name -> list of coordinates where it occurs."""
    out = {}
    for at in atoms:
        if at[0] == "v":
            out.setdefault(at[3], []).append((at[1], at[2]))
    for v in out:
        out[v].sort(key=lambda c: (c[0], -1 if c[1] is None else c[1]))
    return out


def host_ctors(atoms):
    return {at[1]: at[2] for at in atoms if at[0] == "n"}


def as_tuple(x):
    """(tuple of joins, predicate or None) for a join, tuple or abstract atom."""
    if isinstance(x, AAtom):
        return x.args, x.pred
    if isinstance(x, AJoin):
        return (x,), None
    return tuple(x), None


def _from_tuple(ts, like):
    if isinstance(like, AAtom):
        return AAtom(like.pred, ts)
    if isinstance(like, AJoin):
        return ts[0]
    return ts


def joint_typer(env: TypeEnv, *tuples, decl=None):
    """Type several equal-length tuples position-wise against shared types."""
    typer = AbstractTyper(env)
    n = len(tuples[0])
    types = typer.instance_of_decl(decl) if decl is not None else tuple(typer.fresh() for _ in range(n))
    for tup in tuples:
        if len(tup) != n:
            return None, None
        for a, t in zip(tup, types):
            if not typer.check(a, t):
                return None, None
    return typer, types


def match(a, b, env: TypeEnv, decl=None):
    """A substitution θ with ``b θ =AC+ a``, or None.

    ``a`` and ``b`` are joins, tuples of joins or abstract atoms.  Variables
    of ``a`` are treated as constants.  The returned θ is the greatest such
    substitution (largest images), keyed by the variables of ``b``.
    """
    at, ap = as_tuple(a)
    bt, bp = as_tuple(b)
    if ap != bp or len(at) != len(bt):
        return None
    at = normalize(at, env)
    bt = normalize(bt, env)
    avars = set(abstract_vars(at))
    b_names = abstract_vars(bt)
    (bt_r,) = rename_abstract([bt], avoid=at)
    renamed = abstract_vars(bt_r)
    back = dict(zip(renamed, b_names))

    typer, _ = joint_typer(env, at, bt_r, decl=decl)
    if typer is None:
        return None
    A = tuple_atoms(at, env)
    Batoms = tuple_atoms(bt_r, env)
    nodes_b = {x for x in Batoms if x[0] == "n"}
    if not nodes_b <= A:
        return None
    hosts = host_ctors(Batoms)
    occ = occurrences(Batoms)
    rel = Relocator(env)
    a_by_coord = {}
    for x in A:
        if x[0] == "v":
            a_by_coord.setdefault((x[1], x[2]), set()).add(x[3])

    covered = set(nodes_b)
    theta = {}
    for x in renamed:
        tree = local_tree(typer.type_of_var(x), env)
        starts = [rel.start(o, hosts.get(o[0])) for o in occ[x]]
        keep = set()
        for lpos in sorted(tree.nodes, key=len):
            if lpos and lpos[:-1] not in keep:
                continue
            imgs = [rel.node_image(tree, s, lpos) for s in starts]
            if all(im is None or im in A for im in imgs):
                keep.add(lpos)
                covered.update(im for im in imgs if im is not None)
        local_atoms = {("n", p, tree.nodes[p]) for p in keep}
        for coord in tree.coords:
            owner = coord_owner(coord)
            if owner is not None and owner not in keep:
                continue
            gcoords = [rel.coord_image(tree, s, coord) for s in starts]
            common = None
            for g in gcoords:
                here = a_by_coord.get(g, set())
                common = set(here) if common is None else common & here
                if not common:
                    break
            for r in sorted(common or ()):
                local_atoms.add(("v", coord[0], coord[1], r))
                covered.update(("v", g[0], g[1], r) for g in gcoords)
        theta[back[x]] = build_from_atoms(local_atoms, env)
    if covered != A:
        return None
    assert normalize(substitute(bt, theta), env) == at, "matching produced an unsound substitution"
    return theta


def le(a, b, env: TypeEnv, decl=None) -> bool:
    """``a ≤ b``: ``a`` is an AC+-instance of ``b``."""
    return match(a, b, env, decl) is not None


def equiv(a, b, env: TypeEnv, decl=None) -> bool:
    return le(a, b, env, decl) and le(b, a, env, decl)


def le_subst(theta1, theta2, names, env: TypeEnv) -> bool:
    """θ1 ≤ θ2 on ``names``: one σ with x θ2 σ = x θ1 for every listed variable."""
    from .absdomain import avar

    t1 = tuple(theta1.get(x, avar(x)) for x in names)
    t2 = tuple(theta2.get(x, avar(x)) for x in names)
    return le(t1, t2, env)
