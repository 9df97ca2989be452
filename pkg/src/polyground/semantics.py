"""Concrete and abstract fixpoint semantics.

The concrete side is the s-semantics immediate-consequence operator, used as
a test oracle and truncated after a fixed number of steps.  The abstract
side replaces every term of a program by its abstraction and iterates an
operator that resolves bodies by AC+-unification.  Abstract interpretations
are kept as antichains of canonical atoms (only maximal elements survive).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .absdomain import (
    AAtom,
    AJoin,
    ANode,
    AVar,
    abstract_atom,
    abstract_term,
    canonicalize_vars,
    normalize,
    rename_abstract,
    substitute,
)
from .order import le
from .syntax import Atom, Clause, Program, Signature, apply_subst, mgu, rename_apart, variant_key
from .typecheck import GOAL, check_program, compile_query
from .typegraph import TypeEnv
from .unify import unify

DEFAULT_MAX_ITERS = 1000


class FixpointDiverged(RuntimeError):
    """The abstract iteration did not stabilise within the cap."""


# --------------------------------------------------------------------------
# concrete s-semantics


def concrete_tp(program, interp):
    """One step of the s-semantics operator; ``interp`` is an iterable of atoms."""
    by_pred = {}
    for a in interp:
        by_pred.setdefault(a.pred, []).append(a)
    out = {}
    for a in interp:
        out.setdefault(variant_key(a), a)
    for c in program.clauses:
        for head in _resolve_concrete(c, by_pred):
            out.setdefault(variant_key(head), variant_key(head))
    return frozenset(out.values())


def _resolve_concrete(clause, by_pred):
    partial = [({}, ())]
    for b in clause.body:
        nxt = []
        for theta, used in partial:
            goal = apply_subst(b, theta)
            for fact in by_pred.get(b.pred, ()):
                (f,) = rename_apart([fact], avoid=(clause, used))
                s = mgu(goal, f)
                if s is None:
                    continue
                comp = {k: apply_subst(v, s) for k, v in theta.items()}
                for k, v in s.items():
                    comp.setdefault(k, v)
                nxt.append((comp, used + (f,)))
        partial = nxt
    return [apply_subst(clause.head, theta) for theta, _ in partial]


def concrete_iterates(program, k):
    """``TP↑k(∅)`` as a frozenset of atoms in variant-canonical form."""
    interp = frozenset()
    for _ in range(k):
        interp = concrete_tp(program, interp)
    return interp


# --------------------------------------------------------------------------
# abstract programs


@dataclass(frozen=True)
class AClause:
    head: AAtom
    body: tuple = ()

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class AbstractProgram:
    clauses: tuple
    decls: dict = field(default_factory=dict, compare=False, hash=False)


def abstract_program(program, sig: Signature, env: TypeEnv = None, judgements=None) -> AbstractProgram:
    """Replace every term of every clause by its abstraction.

    The program must be well-typed; pass ``judgements`` to skip re-checking.
    """
    env = env or TypeEnv(sig)
    if judgements is None:
        judgements = check_program(program, sig)
    clauses = []
    for c in program.clauses:
        head = normalize(abstract_atom(c.head, env), env)
        body = tuple(normalize(abstract_atom(b, env), env) for b in c.body)
        clauses.append(AClause(head, body))
    return AbstractProgram(tuple(clauses), dict(sig.preds))


# --------------------------------------------------------------------------
# abstract interpretations


class Antichain:
    """≤-maximal canonical abstract atoms, grouped by predicate."""

    def __init__(self, env: TypeEnv, decls=None, atoms=()):
        self.env = env
        self.decls = decls or {}
        self.by_pred = {}
        for a in atoms:
            self.add(a)

    def add(self, atom: AAtom) -> bool:
        """Insert ``atom``; True iff the antichain changed."""
        atom = canonicalize_vars(normalize(atom, self.env), self.env)
        decl = self.decls.get(atom.pred)
        cur = self.by_pred.setdefault(atom.pred, [])
        if atom in cur:
            return False
        for e in cur:
            if le(atom, e, self.env, decl):
                return False
        cur[:] = [e for e in cur if not le(e, atom, self.env, decl)]
        cur.append(atom)
        cur.sort(key=str)
        return True

    def atoms(self, pred=None):
        if pred is not None:
            return list(self.by_pred.get(pred, ()))
        return [a for p in sorted(self.by_pred) for a in self.by_pred[p]]

    def snapshot(self):
        return frozenset(self.atoms())

    def __len__(self):
        return sum(len(v) for v in self.by_pred.values())

    def __iter__(self):
        return iter(self.atoms())


def _compose(theta, sigma, env):
    out = {k: normalize(substitute(v, sigma), env) for k, v in theta.items()}
    for k, v in sigma.items():
        out.setdefault(k, v)
    return out


def _apply_atom(atom, theta, env):
    return AAtom(atom.pred, normalize(substitute(atom.args, theta), env))


def clause_consequences(clause: AClause, interp: Antichain, env: TypeEnv, decls):
    """Heads of ``clause`` instantiated by unifiers of its body with ``interp``."""
    partial = [{}]
    for b in clause.body:
        nxt = []
        for theta in partial:
            goal = _apply_atom(b, theta, env)
            for fact in interp.atoms(b.pred):
                (f,) = rename_abstract([fact.args], avoid=(clause.head.args, goal.args))
                for sigma in unify(goal.args, f, env, decl=decls.get(b.pred)):
                    nxt.append(_compose(theta, sigma, env))
        partial = nxt
        if not partial:
            return []
    return [_apply_atom(clause.head, theta, env) for theta in partial]


def abstract_tp(aprog: AbstractProgram, interp: Antichain, env: TypeEnv) -> Antichain:
    out = Antichain(env, aprog.decls, interp.atoms())
    for c in aprog.clauses:
        for h in clause_consequences(c, interp, env, aprog.decls):
            out.add(h)
    return out


@dataclass
class FixpointResult:
    interpretation: Antichain
    iterations: int


def lfp_abstract(aprog: AbstractProgram, env: TypeEnv, max_iters: int = DEFAULT_MAX_ITERS) -> FixpointResult:
    """Iterate the abstract operator from the empty interpretation until stable."""
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    cur = Antichain(env, aprog.decls)
    for i in range(1, max_iters + 1):
        nxt = abstract_tp(aprog, cur, env)
        if nxt.snapshot() == cur.snapshot():
            return FixpointResult(nxt, i)
        cur = nxt
    raise FixpointDiverged(f"abstract fixpoint not reached after {max_iters} iterations")


# --------------------------------------------------------------------------
# description and correctness


def describes(a, t, env: TypeEnv, decl=None) -> bool:
    """``a ∝ t``: the abstract term/atom ``a`` describes the concrete ``t``."""
    if isinstance(t, Atom):
        if not isinstance(a, AAtom) or a.pred != t.pred:
            return False
        return le(abstract_atom(t, env), a, env, decl)
    return le(abstract_term(t, env), a, env, decl)


@dataclass(frozen=True)
class CorrectnessReport:
    ok: bool
    k: int
    concrete_atoms: int
    abstract_atoms: int
    undescribed: tuple = ()

    def __str__(self):
        if self.ok:
            return (f"correct: all {self.concrete_atoms} atoms of TP^{self.k} are described "
                    f"by the {self.abstract_atoms} abstract atoms")
        return "undescribed: " + ", ".join(map(str, self.undescribed))


def check_correctness(program, sig: Signature, k: int, env: TypeEnv = None, max_iters=DEFAULT_MAX_ITERS,
                      fixpoint: Antichain = None) -> CorrectnessReport:
    env = env or TypeEnv(sig)
    if fixpoint is None:
        fixpoint = lfp_abstract(abstract_program(program, sig, env), env, max_iters).interpretation
    concrete = sorted(concrete_iterates(program, k), key=str)
    bad = []
    for atom in concrete:
        decl = sig.preds.get(atom.pred)
        if not any(describes(a, atom, env, decl) for a in fixpoint.atoms(atom.pred)):
            bad.append(atom)
    return CorrectnessReport(not bad, k, len(concrete), len(fixpoint), tuple(bad))


# --------------------------------------------------------------------------
# queries and readback


@dataclass
class QueryAnalysis:
    query: tuple
    variables: tuple
    types: tuple
    answers: list


def analyze_query(program, sig: Signature, atoms, env: TypeEnv = None, max_iters=DEFAULT_MAX_ITERS):
    """Abstract answers to a query, as ``goal$`` atoms over the query variables."""
    env = env or TypeEnv(sig)
    goal, types = compile_query(atoms, sig)
    aprog = abstract_program(program, sig, env)
    gclause = AClause(normalize(abstract_atom(goal.head, env), env),
                      tuple(normalize(abstract_atom(b, env), env) for b in goal.body))
    decls = dict(aprog.decls)
    decls[GOAL] = types
    aprog = AbstractProgram(aprog.clauses + (gclause,), decls)
    res = lfp_abstract(aprog, env, max_iters)
    names = tuple(v.name for v in goal.head.args)
    return QueryAnalysis(tuple(atoms), names, types, res.interpretation.atoms(GOAL)), res


def role_readback(a: AJoin, ty, env: TypeEnv):
    """Which roles of a value of type ``ty`` may hold variables, read off a normal term.

    Returns a nested dict with ``top`` (variables in the top-level role),
    ``nrs`` (one entry per non-recursive subterm type) and ``rec`` (one
    entry per other recursive type).
    """
    from .syntax import TParam, match_type, subst_type

    top = any(isinstance(s, AVar) for s in a.items)
    out = {"type": str(ty), "empty": not a.items, "top_vars": top}
    if isinstance(ty, TParam) or not a.nodes:
        out["ground"] = not top and not a.nodes and not a.items
        out["ground"] = not _has_vars(a)
        return out
    nd = a.nodes[0]
    prof = env.profile(nd.ctor)
    theta = match_type(env.sig.flat_type(nd.ctor), ty) or {}
    m1 = len(prof.nrs)
    out["ctor"] = nd.ctor
    out["nrs"] = [dict(role_readback(nd.args[i], subst_type(prof.nrs[i], theta), env), slot=str(prof.nrs[i]))
                  for i in range(m1)]
    out["rec"] = [{"slot": str(prof.rec_other[i - m1]), "vars": bool(nd.args[i].items)}
                  for i in range(m1, len(nd.args))]
    out["ground"] = not _has_vars(a)
    return out


def _has_vars(a):
    for s in a.items:
        if isinstance(s, AVar):
            return True
        if any(_has_vars(x) for x in s.args):
            return True
    return False


def _value_phrase(rb):
    if rb["empty"]:
        return "no value"
    if rb["ground"]:
        return "ground"
    return "possibly variable"


def describe_readback(name, rb):
    """One-line reading such as ``C: list spine ground, elements possibly variable``."""
    if "ctor" not in rb:
        return f"{name}: {_value_phrase(rb)}"
    spine_vars = rb["top_vars"] or any(r["vars"] for r in rb["rec"])
    parts = [f"{rb['ctor']} spine {'possibly variable' if spine_vars else 'ground'}"]
    single = len(rb["nrs"]) == 1
    for slot in rb["nrs"]:
        label = "elements" if single else f"{slot['slot']} elements"
        parts.append(f"{label} {'none' if slot['empty'] else _value_phrase(slot)}")
    return f"{name}: " + ", ".join(parts)


def readback_answers(qa: QueryAnalysis, env: TypeEnv):
    """Per answer, per query variable: role readback and its one-line reading."""
    out = []
    for ans in qa.answers:
        row = {}
        for name, ty, val in zip(qa.variables, qa.types, ans.args):
            rb = role_readback(val, ty, env)
            row[name] = {"value": str(val), "roles": rb, "reading": describe_readback(name, rb)}
        out.append(row)
    return out
