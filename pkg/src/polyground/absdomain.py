"""Abstract terms: set expressions over 0, + and one c# symbol per type constructor.

An abstract term is an :class:`AJoin`, a sorted duplicate-free tuple of
summands, each an :class:`AVar` or an :class:`ANode` whose arguments are
again joins.  Associativity, commutativity, idempotence and the unit law
hold structurally; distributivity and extraction are applied by
:func:`normalize`.

Textual syntax: ``0`` is the empty join, ``+`` joins, ``c#(a1,...,am)``
is a node and ``c#`` abbreviates ``c#()``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable

from .syntax import App, TCtor, TParam, Var, fresh_name, match_type, resolve_type, subst_type, unify_types
from .typegraph import TypeEnv


class AbstractTypeError(Exception):
    pass


@dataclass(frozen=True)
class AVar:
    name: str
    key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (0, self.name))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ANode:
    ctor: str
    args: tuple = ()
    key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "key", (1, self.ctor, tuple(a.key for a in self.args)))

    def __str__(self):
        if not self.args:
            return f"{self.ctor}#"
        return f"{self.ctor}#({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class AJoin:
    items: tuple = ()
    key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "key", tuple(s.key for s in self.items))

    def __str__(self):
        if not self.items:
            return "0"
        return "+".join(map(str, self.items))

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    @property
    def vars(self):
        return [s for s in self.items if isinstance(s, AVar)]

    @property
    def nodes(self):
        return [s for s in self.items if isinstance(s, ANode)]


EMPTY = AJoin(())


def join(*parts) -> AJoin:
    """Join summands and/or joins, flattening, deduplicating and sorting."""
    seen = {}
    for p in parts:
        for s in (p.items if isinstance(p, AJoin) else (p,)):
            seen.setdefault(s, s)
    return AJoin(tuple(sorted(seen, key=lambda s: s.key)))


def avar(name) -> AJoin:
    return AJoin((AVar(name),))


def node(ctor, *args) -> AJoin:
    return AJoin((ANode(ctor, tuple(args)),))


def abstract_vars(a) -> list:
    """Variable names in order of first occurrence (joins or tuples of joins)."""
    out, seen = [], set()

    def go(x):
        if isinstance(x, AJoin):
            for s in x.items:
                go(s)
        elif isinstance(x, AVar):
            if x.name not in seen:
                seen.add(x.name)
                out.append(x.name)
        elif isinstance(x, ANode):
            for arg in x.args:
                go(arg)
        else:
            for y in x:
                go(y)

    go(a)
    return out


def substitute(a, theta) -> AJoin:
    """Replace variables without normalizing."""
    if isinstance(a, tuple):
        return tuple(substitute(x, theta) for x in a)
    parts = []
    for s in a.items:
        if isinstance(s, AVar):
            parts.append(theta.get(s.name, s))
        else:
            parts.append(ANode(s.ctor, tuple(substitute(x, theta) for x in s.args)))
    return join(*parts)


def rename_abstract(items, avoid=()):
    """Rename each abstract term/tuple apart from ``avoid`` and from each other."""
    taken = set(abstract_vars(avoid))
    out = []
    for it in items:
        ren = {}
        for v in abstract_vars(it):
            n = fresh_name("_A")
            while n in taken:
                n = fresh_name("_A")
            ren[v] = avar(n)
        out.append(substitute(it, ren))
    return out


# --------------------------------------------------------------------------
# text syntax

_ATOK = re.compile(r"\s*(?:(?P<ctor>[a-z][A-Za-z0-9_]*|\d+|\"[^\"]*\")#|(?P<pred>[a-z][A-Za-z0-9_$]*)|(?P<var>[A-Z_][A-Za-z0-9_]*)|(?P<zero>0)|(?P<p>[()+,.]))")


class AbstractSyntaxError(ValueError):
    pass


def _atokens(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _ATOK.match(text, pos)
        if not m or m.end() == pos:
            raise AbstractSyntaxError(f"unexpected input at column {pos + 1}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), pos + 1))
        pos = m.end()
    out.append(("eof", "", pos + 1))
    return out


class _AReader:
    def __init__(self, text):
        self.toks = _atokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, text=None):
        k, v, col = self.toks[self.i]
        if (kind and k != kind) or (text is not None and v != text):
            want = text if text is not None else kind
            raise AbstractSyntaxError(f"expected {want!r} at column {col}, found {v or 'end of input'!r}")
        self.i += 1
        return v

    def term(self):
        parts = [self.summand()]
        while self.peek()[:2] == ("p", "+"):
            self.take()
            parts.append(self.summand())
        return join(*parts)

    def summand(self):
        k, v, col = self.peek()
        if k == "zero":
            self.take()
            return EMPTY
        if k == "var":
            self.take()
            return AVar(v)
        if k == "ctor":
            self.take()
            args = []
            if self.peek()[:2] == ("p", "("):
                self.take()
                if self.peek()[:2] != ("p", ")"):
                    args.append(self.term())
                    while self.peek()[:2] == ("p", ","):
                        self.take()
                        args.append(self.term())
                self.take("p", ")")
            return ANode(v, tuple(args))
        if k == "p" and v == "(":
            self.take()
            t = self.term()
            self.take("p", ")")
            return t
        raise AbstractSyntaxError(f"expected an abstract term at column {col}, found {v or 'end of input'!r}")

    def atom(self):
        pred = self.take("pred")
        args = []
        if self.peek()[:2] == ("p", "("):
            self.take()
            args.append(self.term())
            while self.peek()[:2] == ("p", ","):
                self.take()
                args.append(self.term())
            self.take("p", ")")
        return AAtom(pred, tuple(args))

    def end(self):
        if self.peek()[:2] == ("p", "."):
            self.take()
        self.take("eof")


def parse_abstract(text: str) -> AJoin:
    r = _AReader(text)
    t = r.term()
    r.end()
    return t


@dataclass(frozen=True)
class AAtom:
    pred: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(map(str, self.args))})"


def parse_abstract_atom(text: str) -> AAtom:
    r = _AReader(text)
    a = r.atom()
    r.end()
    return a


# --------------------------------------------------------------------------
# abstraction


def abstract_term(t, env: TypeEnv) -> AJoin:
    """α: abstract a concrete term (variables map to themselves)."""
    if isinstance(t, Var):
        return avar(t.name)
    f = env.sig.funcs.get(t.func)
    if f is None:
        raise AbstractTypeError(f"undeclared function symbol {t.func}")
    c = f.range.name
    prof = env.profile(c)
    tau = env.sig.flat_type(c)
    slots = [[] for _ in prof.slots]
    top = []
    for ty, arg in zip(f.arg_types, t.args):
        a = abstract_term(arg, env)
        if ty == tau:
            top.append(a)
        else:
            slots[prof.slots.index(ty)].append(a)
    return join(ANode(c, tuple(join(*s) for s in slots)), *top)


def abstract_atom(atom, env: TypeEnv) -> AAtom:
    return AAtom(atom.pred, tuple(abstract_term(t, env) for t in atom.args))


def abstract(t, tau, env: TypeEnv) -> AJoin:
    """α(t), after checking that ``t`` is typed at ``tau``."""
    from .typecheck import term_has_type

    if not term_has_type(t, tau, env.sig):
        raise AbstractTypeError(f"{t} is not of type {tau}")
    return abstract_term(t, env)


# --------------------------------------------------------------------------
# normal forms


class Extraction:
    """Where the slots of an extracted node go.

    For a constructor ``d`` and one of its recursive slots ``j`` holding type
    ``c(u)Θ``, ``dest(d, j)[k]`` is the slot of ``d`` receiving slot ``k`` of
    an extracted ``c#`` node, or ``None`` for the top-level join.
    """

    def __init__(self, env: TypeEnv):
        self.env = env
        self._cache = {}

    def dest(self, d, j):
        key = (d, j)
        r = self._cache.get(key)
        if r is None:
            r = self._compute(d, j)
            self._cache[key] = r
        return r

    def _compute(self, d, j):
        env = self.env
        prof_d = env.profile(d)
        phi = env.sig.flat_type(d)
        sigma = prof_d.slots[j]
        theta = match_type(env.sig.flat_type(sigma.name), sigma)
        out = []
        for rho in env.profile(sigma.name).slots:
            t = subst_type(rho, theta)
            if t == phi:
                out.append(None)
            elif t in prof_d.slots:
                out.append(prof_d.slots.index(t))
            else:  # pragma: no cover - excluded by the subterm-type structure
                raise AbstractTypeError(f"extraction for {d}/{j}: {t} has no slot")
        return tuple(out)


def _extraction(env):
    ex = getattr(env, "_extraction", None)
    if ex is None:
        ex = Extraction(env)
        env._extraction = ex
    return ex


def normalize(a, env: TypeEnv):
    """Normal form modulo AC+ (works on joins, tuples of joins and abstract atoms)."""
    if isinstance(a, AAtom):
        return AAtom(a.pred, tuple(normalize(x, env) for x in a.args))
    if isinstance(a, tuple):
        return tuple(normalize(x, env) for x in a)
    return _normalize(a, env, _extraction(env))


def _normalize(a: AJoin, env, ex) -> AJoin:
    top = [s for s in a.items if isinstance(s, AVar)]
    pending = [s for s in a.items if isinstance(s, ANode)]
    if not pending:
        return a
    ctor = pending[0].ctor
    if ctor not in env.sig.ctors:
        raise AbstractTypeError(f"undeclared constructor {ctor}#")
    prof = env.profile(ctor)
    m1 = len(prof.nrs)
    slots = [[] for _ in prof.slots]

    def absorb(nd):
        if nd.ctor != ctor:
            raise AbstractTypeError(f"cannot join {ctor}# with {nd.ctor}#")
        if len(nd.args) != len(slots):
            raise AbstractTypeError(f"{nd.ctor}# expects {len(slots)} arguments, got {len(nd.args)}")
        for i, arg in enumerate(nd.args):
            slots[i].extend(arg.items)

    for nd in pending:
        absorb(nd)
    changed = True
    while changed:
        changed = False
        for j in range(m1, len(slots)):
            inner = [s for s in slots[j] if isinstance(s, ANode)]
            if not inner:
                continue
            changed = True
            slots[j] = [s for s in slots[j] if isinstance(s, AVar)]
            dest = ex.dest(ctor, j)
            for nd in inner:
                want = prof.slots[j].name
                if nd.ctor != want or len(nd.args) != len(dest):
                    raise AbstractTypeError(f"{nd} cannot occupy a {prof.slots[j]} slot of {ctor}#")
                for k, arg in enumerate(nd.args):
                    i = dest[k]
                    if i is None:
                        for s in arg.items:
                            if isinstance(s, AVar):
                                top.append(s)
                            else:
                                absorb(s)
                    else:
                        slots[i].extend(arg.items)
    args = []
    for i, items in enumerate(slots):
        j = join(*items)
        args.append(_normalize(j, env, ex) if i < m1 else j)
    return join(ANode(ctor, tuple(args)), *top)


def is_normal(a: AJoin, env: TypeEnv) -> bool:
    nodes = a.nodes
    if len(nodes) > 1:
        return False
    if not nodes:
        return True
    nd = nodes[0]
    m1 = len(env.profile(nd.ctor).nrs)
    for i, arg in enumerate(nd.args):
        if i < m1:
            if not is_normal(arg, env):
                return False
        elif arg.nodes:
            return False
    return True


def eq_acplus(a, b, env: TypeEnv) -> bool:
    return normalize(a, env) == normalize(b, env)


def apply_abstract_subst(a, theta, env: TypeEnv):
    if isinstance(a, AAtom):
        return AAtom(a.pred, tuple(apply_abstract_subst(x, theta, env) for x in a.args))
    return normalize(substitute(a, theta), env)


# --------------------------------------------------------------------------
# typing


class AbstractTyper:
    """Joint type inference for abstract terms.

    Variables share one type across everything passed to :meth:`check`;
    ``0`` may take any type.
    """

    def __init__(self, env: TypeEnv):
        self.env = env
        self.theta = {}
        self.var_types = {}

    def fresh(self):
        return TParam(fresh_name("_T"))

    def instance_of_decl(self, types):
        from .syntax import type_params
        ren = {p: self.fresh() for p in sorted(type_params(types))}
        return tuple(subst_type(t, ren) for t in types)

    def check(self, a: AJoin, ty) -> bool:
        for s in a.items:
            if isinstance(s, AVar):
                vt = self.var_types.get(s.name)
                if vt is None:
                    self.var_types[s.name] = ty
                elif not unify_types(vt, ty, self.theta):
                    return False
            else:
                if s.ctor not in self.env.sig.ctors:
                    return False
                prof = self.env.profile(s.ctor)
                if len(s.args) != prof.abstract_arity:
                    return False
                flat = self.env.sig.flat_type(s.ctor)
                ren = {p.name: self.fresh() for p in flat.args}
                if not unify_types(subst_type(flat, ren), ty, self.theta):
                    return False
                for arg, rho in zip(s.args, prof.slots):
                    if not self.check(arg, subst_type(rho, ren)):
                        return False
        return True

    def resolve(self, t):
        return resolve_type(t, self.theta)

    def type_of_var(self, name):
        return self.resolve(self.var_types[name])


def infer_abstract_type(a: AJoin, env: TypeEnv):
    """Most general type of ``a``, or None if it is ill-typed."""
    ty = AbstractTyper(env)
    t = ty.fresh()
    if not ty.check(a, t):
        return None
    return ty.resolve(t)


def abstract_type_check(a: AJoin, tau, env: TypeEnv) -> bool:
    """True iff ``a`` can be typed at exactly ``tau`` (parameters of ``tau`` fixed)."""
    from .syntax import type_params
    return _check_rigid(AbstractTyper(env), a, tau, type_params(tau))


def _check_rigid(typer, a, ty, rigid):
    for s in a.items:
        if isinstance(s, AVar):
            vt = typer.var_types.get(s.name)
            if vt is None:
                typer.var_types[s.name] = ty
            elif not unify_types(vt, ty, typer.theta, rigid):
                return False
        else:
            if s.ctor not in typer.env.sig.ctors:
                return False
            prof = typer.env.profile(s.ctor)
            if len(s.args) != prof.abstract_arity:
                return False
            flat = typer.env.sig.flat_type(s.ctor)
            ren = {p.name: typer.fresh() for p in flat.args}
            if not unify_types(subst_type(flat, ren), ty, typer.theta, rigid):
                return False
            for arg, rho in zip(s.args, prof.slots):
                if not _check_rigid(typer, arg, subst_type(rho, ren), rigid):
                    return False
    return True


# --------------------------------------------------------------------------
# coordinates of normal terms
#
# A normal term is determined by its set of atoms:
#   ("n", pos, ctor)        a node at join position pos
#   ("v", pos, None, x)     variable x in the join at pos
#   ("v", pos, j, x)        variable x in recursive slot j of the node at pos
# Positions are tuples of slot indices; non-recursive slot i of the node at
# pos is the join at pos + (i,).  A tuple of terms puts argument i at (i,).


def term_atoms(a: AJoin, env: TypeEnv, pos=()) -> set:
    out = set()
    _collect(a, env, pos, out)
    return out


def tuple_atoms(terms, env: TypeEnv) -> set:
    out = set()
    for i, t in enumerate(terms):
        _collect(t, env, (i,), out)
    return out


def _collect(a, env, pos, out):
    for s in a.items:
        if isinstance(s, AVar):
            out.add(("v", pos, None, s.name))
        else:
            out.add(("n", pos, s.ctor))
            m1 = len(env.profile(s.ctor).nrs)
            for i, arg in enumerate(s.args):
                if i < m1:
                    _collect(arg, env, pos + (i,), out)
                else:
                    for v in arg.items:
                        if not isinstance(v, AVar):
                            raise AbstractTypeError("term is not in normal form")
                        out.add(("v", pos, i, v.name))


def build_from_atoms(atoms, env: TypeEnv, pos=()) -> AJoin:
    by_pos = {}
    for at in atoms:
        by_pos.setdefault(at[1], []).append(at)
    return _build(by_pos, env, pos)


def build_tuple_from_atoms(atoms, env: TypeEnv, n) -> tuple:
    by_pos = {}
    for at in atoms:
        by_pos.setdefault(at[1], []).append(at)
    return tuple(_build(by_pos, env, (i,)) for i in range(n))


def _build(by_pos, env, pos):
    here = by_pos.get(pos, ())
    parts = []
    rec = {}
    ctor = None
    for at in here:
        if at[0] == "n":
            if ctor is not None and ctor != at[2]:
                raise AbstractTypeError(f"two constructors at position {pos}")
            ctor = at[2]
        elif at[2] is None:
            parts.append(AVar(at[3]))
        else:
            rec.setdefault(at[2], []).append(AVar(at[3]))
    if ctor is not None:
        prof = env.profile(ctor)
        m1 = len(prof.nrs)
        args = []
        for i in range(prof.abstract_arity):
            if i < m1:
                args.append(_build(by_pos, env, pos + (i,)))
            else:
                args.append(join(*rec.get(i, ())))
        parts.append(ANode(ctor, tuple(args)))
    elif rec:
        raise AbstractTypeError(f"recursive slot without a node at {pos}")
    return join(*parts)


def var_coordinates(atoms) -> dict:
    """Map each variable to the frozenset of coordinates ``(pos, slot)`` where it occurs."""
    out = {}
    for at in atoms:
        if at[0] == "v":
            out.setdefault(at[3], set()).add((at[1], at[2]))
    return {v: frozenset(c) for v, c in out.items()}


# --------------------------------------------------------------------------
# variable canonicalization


def canonicalize_vars(a, env: TypeEnv, prefix="V"):
    """Merge variables occurring at identical coordinates and rename canonically.

    Accepts a normal term, a tuple of normal terms or an abstract atom.  The
    result is ≈-equivalent to the input and has at most one variable per
    nonempty set of coordinates.
    """
    if isinstance(a, AAtom):
        return AAtom(a.pred, canonicalize_vars(a.args, env, prefix))
    if isinstance(a, tuple):
        atoms = tuple_atoms(a, env)
    else:
        atoms = term_atoms(a, env)
    coords = var_coordinates(atoms)
    classes = sorted(set(coords.values()), key=lambda cs: sorted(map(_coord_key, cs)))
    names = {cs: f"{prefix}{i + 1}" for i, cs in enumerate(classes)}
    new_atoms = set()
    for at in atoms:
        if at[0] == "v":
            new_atoms.add(("v", at[1], at[2], names[coords[at[3]]]))
        else:
            new_atoms.add(at)
    if isinstance(a, tuple):
        return build_tuple_from_atoms(new_atoms, env, len(a))
    return build_from_atoms(new_atoms, env)


def _coord_key(c):
    pos, slot = c
    return (len(pos), pos, -1 if slot is None else slot)


def shape_size(ty, env: TypeEnv) -> int:
    """Number of variable coordinates in the largest normal term of type ``ty``."""
    if isinstance(ty, TParam):
        return 1
    prof = env.profile(ty.name)
    theta = match_type(env.sig.flat_type(ty.name), ty)
    n = 1 + len(prof.rec_other)
    for rho in prof.nrs:
        n += shape_size(subst_type(rho, theta), env)
    return n
