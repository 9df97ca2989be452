"""Concrete syntax of the typed logic language: types, terms, atoms, clauses.

Everything here is an immutable value.  Variables and type parameters are
plain strings; fresh names come from one process-wide counter.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union


class TypeError_(Exception):
    """Raised for ill-formed declarations or ill-typed objects."""


# --------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TParam:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TCtor:
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(str, self.args))})"


TypeTerm = Union[TParam, TCtor]


def type_key(t: TypeTerm):
    """Sort key realising the type order: parameters before constructor types,
    then lexicographic on symbol names and arguments."""
    if isinstance(t, TParam):
        return (0, t.name)
    return (1, t.name, tuple(type_key(a) for a in t.args))


def type_params(t) -> set:
    """Parameters of a type or of a sequence of types."""
    if isinstance(t, TParam):
        return {t.name}
    out = set()
    for a in (t.args if isinstance(t, TCtor) else t):
        out |= type_params(a)
    return out


def subst_type(t: TypeTerm, theta: Mapping[str, TypeTerm]) -> TypeTerm:
    if isinstance(t, TParam):
        return theta.get(t.name, t)
    if not t.args:
        return t
    return TCtor(t.name, tuple(subst_type(a, theta) for a in t.args))


def is_flat(t: TypeTerm) -> bool:
    if not isinstance(t, TCtor):
        return False
    names = [a.name for a in t.args if isinstance(a, TParam)]
    return len(names) == len(t.args) and len(set(names)) == len(names)


def is_syntactic_subterm(s: TypeTerm, t: TypeTerm) -> bool:
    if s == t:
        return True
    return isinstance(t, TCtor) and any(is_syntactic_subterm(s, a) for a in t.args)


def type_depth(t: TypeTerm) -> int:
    if isinstance(t, TParam) or not t.args:
        return 1
    return 1 + max(type_depth(a) for a in t.args)


def _resolve_type(t, theta):
    while isinstance(t, TParam) and t.name in theta:
        t = theta[t.name]
    return t


def unify_types(a: TypeTerm, b: TypeTerm, theta: dict, rigid=frozenset()) -> bool:
    """Extend ``theta`` (triangular form) to unify ``a`` and ``b``.

    Parameters named in ``rigid`` behave as constants.  Returns False on
    clash or occurs-check failure; ``theta`` may then be partially updated,
    so callers pass a copy when they need to back out.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = _resolve_type(x, theta)
        y = _resolve_type(y, theta)
        if x == y:
            continue
        if isinstance(x, TParam) and x.name not in rigid:
            if _type_occurs(x.name, y, theta):
                return False
            theta[x.name] = y
        elif isinstance(y, TParam) and y.name not in rigid:
            if _type_occurs(y.name, x, theta):
                return False
            theta[y.name] = x
        elif isinstance(x, TCtor) and isinstance(y, TCtor):
            if x.name != y.name or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
        else:
            return False
    return True


def _type_occurs(name, t, theta):
    t = _resolve_type(t, theta)
    if isinstance(t, TParam):
        return t.name == name
    return any(_type_occurs(name, a, theta) for a in t.args)


def resolve_type(t: TypeTerm, theta: Mapping[str, TypeTerm]) -> TypeTerm:
    """Fully apply a triangular type substitution."""
    t = _resolve_type(t, theta)
    if isinstance(t, TParam) or not t.args:
        return t
    return TCtor(t.name, tuple(resolve_type(a, theta) for a in t.args))


def match_type(pattern: TypeTerm, t: TypeTerm, theta: Optional[dict] = None):
    """One-way matching: a substitution on ``pattern``'s parameters, or None."""
    theta = {} if theta is None else theta
    if isinstance(pattern, TParam):
        if pattern.name in theta:
            return theta if theta[pattern.name] == t else None
        theta[pattern.name] = t
        return theta
    if not isinstance(t, TCtor) or t.name != pattern.name or len(t.args) != len(pattern.args):
        return None
    for p, a in zip(pattern.args, t.args):
        if match_type(p, a, theta) is None:
            return None
    return theta


def is_type_variant(a: TypeTerm, b: TypeTerm) -> bool:
    """True iff ``a`` and ``b`` are equal up to an injective renaming of parameters."""
    m = match_type(a, b)
    if m is None:
        return False
    images = list(m.values())
    return all(isinstance(v, TParam) for v in images) and len(set(images)) == len(images)


# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    func: str
    args: tuple = ()

    def __str__(self):
        return format_term(self)


Term = Union[Var, App]


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if t.func == "cons" and len(t.args) == 2:
        items, tail = [], t
        while isinstance(tail, App) and tail.func == "cons" and len(tail.args) == 2:
            items.append(format_term(tail.args[0]))
            tail = tail.args[1]
        if isinstance(tail, App) and tail.func == "nil" and not tail.args:
            return "[" + ",".join(items) + "]"
        return "[" + ",".join(items) + "|" + format_term(tail) + "]"
    if t.func == "nil" and not t.args:
        return "[]"
    if not t.args:
        return t.func
    return f"{t.func}({','.join(format_term(a) for a in t.args)})"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(format_term(a) for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    head: Atom
    body: tuple = ()
    line: int = field(default=0, compare=False)

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class Program:
    clauses: tuple = ()
    queries: tuple = ()  # each query is a tuple of atoms

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)


@dataclass(frozen=True)
class FuncDecl:
    name: str
    arg_types: tuple
    range: TypeTerm

    def __str__(self):
        return f"{self.name} : {', '.join(map(str, self.arg_types))} -> {self.range}"


@dataclass
class Signature:
    """Declared constructors, functions and predicates.

    ``ctors`` maps a type constructor to the tuple of its canonical parameter
    names; function declarations are stored with their range rewritten onto
    those canonical names whenever the range is flat.
    """

    ctors: dict = field(default_factory=dict)
    funcs: dict = field(default_factory=dict)
    preds: dict = field(default_factory=dict)

    def ctor_arity(self, name):
        return len(self.ctors[name])

    def flat_type(self, ctor: str) -> TCtor:
        return TCtor(ctor, tuple(TParam(u) for u in self.ctors[ctor]))

    def funcs_with_range(self, ctor: str):
        return [f for f in self.funcs.values() if isinstance(f.range, TCtor) and f.range.name == ctor]


# --------------------------------------------------------------------------
# Substitutions and unification


_fresh_counter = itertools.count(1)
_fresh_lock = threading.Lock()


def fresh_name(prefix="_G") -> str:
    with _fresh_lock:
        return f"{prefix}{next(_fresh_counter)}"


def term_vars(t) -> list:
    """Variables in order of first occurrence (terms, atoms, clauses, tuples)."""
    out = []
    seen = set()
    for v in _iter_vars(t):
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _iter_vars(t) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, (App, Atom)):
        for a in t.args:
            yield from _iter_vars(a)
    elif isinstance(t, Clause):
        yield from _iter_vars(t.head)
        for b in t.body:
            yield from _iter_vars(b)
    elif isinstance(t, (tuple, list)):
        for a in t:
            yield from _iter_vars(a)


def apply_subst(t, theta: Mapping[str, Term]):
    """Simultaneous replacement of variables in a term, atom, clause or tuple."""
    if not theta:
        return t
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if isinstance(t, App):
        if not t.args:
            return t
        return App(t.func, tuple(apply_subst(a, theta) for a in t.args))
    if isinstance(t, Atom):
        return Atom(t.pred, tuple(apply_subst(a, theta) for a in t.args))
    if isinstance(t, Clause):
        return Clause(apply_subst(t.head, theta), tuple(apply_subst(b, theta) for b in t.body), t.line)
    if isinstance(t, (tuple, list)):
        return type(t)(apply_subst(a, theta) for a in t)
    raise TypeError(f"cannot substitute into {t!r}")


def _walk(t, theta):
    while isinstance(t, Var) and t.name in theta:
        t = theta[t.name]
    return t


def _occurs(name, t, theta):
    t = _walk(t, theta)
    if isinstance(t, Var):
        return t.name == name
    return any(_occurs(name, a, theta) for a in t.args)


def _fully(t, theta):
    t = _walk(t, theta)
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.func, tuple(_fully(a, theta) for a in t.args))


def mgu(left, right) -> Optional[dict]:
    """Most general unifier of two atoms or equal-length tuples of atoms/terms.

    Returns an idempotent substitution, or None if none exists (the occurs
    check is always performed).
    """
    pairs = _pairs(left, right)
    if pairs is None:
        return None
    theta = {}
    while pairs:
        a, b = pairs.pop()
        a = _walk(a, theta)
        b = _walk(b, theta)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a.name, b, theta):
                return None
            theta[a.name] = b
        elif isinstance(b, Var):
            if _occurs(b.name, a, theta):
                return None
            theta[b.name] = a
        else:
            if a.func != b.func or len(a.args) != len(b.args):
                return None
            pairs.extend(zip(a.args, b.args))
    return {k: _fully(v, theta) for k, v in theta.items()}


def _pairs(left, right):
    if isinstance(left, Atom) and isinstance(right, Atom):
        if left.pred != right.pred or len(left.args) != len(right.args):
            return None
        return list(zip(left.args, right.args))
    if isinstance(left, (tuple, list)) and isinstance(right, (tuple, list)):
        if len(left) != len(right):
            return None
        out = []
        for a, b in zip(left, right):
            sub = _pairs(a, b)
            if sub is None:
                return None
            out.extend(sub)
        return out
    return [(left, right)]


def rename_apart(items: Iterable, avoid=()) -> list:
    """Rename each item with fresh variables, distinct from ``avoid`` and
    from each other."""
    taken = set(term_vars(avoid))
    out = []
    for item in items:
        theta = {}
        for v in term_vars(item):
            name = fresh_name()
            while name in taken:
                name = fresh_name()
            theta[v] = Var(name)
        out.append(apply_subst(item, theta))
    return out


def variant_key(t):
    """Canonical representative modulo variable renaming."""
    theta = {v: Var(f"_V{i}") for i, v in enumerate(term_vars(t))}
    return apply_subst(t, theta)
