"""Prescriptive type checking of clauses and queries.

Inference treats type parameters as unification variables.  A clause is
accepted when its head arguments have exactly the declared predicate types
(no instantiation) and every body atom is typed at some instance of its
predicate's declared types.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .syntax import (
    App,
    Atom,
    Clause,
    Signature,
    TCtor,
    TParam,
    Var,
    fresh_name,
    resolve_type,
    subst_type,
    term_vars,
    type_params,
    unify_types,
)


class TypingError(Exception):
    """A clause or query is ill-typed.

    ``rule`` names the typing rule that could not be applied: ``Head`` for
    head-condition failures, ``Atom`` for ill-typed body or query atoms,
    ``Func`` for ill-typed terms.
    """

    def __init__(self, rule, message, atom=None, clause=None):
        self.rule = rule
        self.atom = atom
        self.clause = clause
        self.message = message
        where = f" in clause at line {clause.line}" if clause is not None and clause.line else ""
        super().__init__(f"{message} ({rule}){where}")

    def as_json(self):
        return {
            "rule": self.rule,
            "message": self.message,
            "atom": str(self.atom) if self.atom is not None else None,
            "clause": str(self.clause) if self.clause is not None else None,
            "line": self.clause.line if self.clause is not None else None,
        }


class ProgramTypingError(Exception):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(str(e) for e in self.errors))


@dataclass(frozen=True)
class Judgement:
    """Result of typing one clause (or query, with ``head_types`` empty).

    ``gamma`` and each element of ``thetas`` are stored as sorted tuples of
    pairs so judgements compare and hash by value.
    """

    clause: object
    gamma: tuple
    head_types: tuple
    thetas: tuple

    @property
    def var_types(self):
        return dict(self.gamma)

    def theta(self, i):
        return dict(self.thetas[i])


_FRESH = "_T"


def _fresh_param():
    return TParam(fresh_name(_FRESH))


def _rename_decl(types, rigid=False):
    """Rename the parameters of declared types apart (unless kept rigid)."""
    if rigid:
        return tuple(types), {p: TParam(p) for p in type_params(types)}
    ren = {p: _fresh_param() for p in sorted(type_params(types))}
    return tuple(subst_type(t, ren) for t in types), ren


class _Inferer:
    def __init__(self, sig: Signature, gamma=None, rigid=frozenset()):
        self.sig = sig
        self.theta = {}
        self.rigid = set(rigid)
        self.gamma = dict(gamma or {})

    def var_type(self, name):
        t = self.gamma.get(name)
        if t is None:
            t = _fresh_param()
            self.gamma[name] = t
        return t

    def term(self, t):
        if isinstance(t, Var):
            return self.var_type(t.name)
        f = self.sig.funcs.get(t.func)
        if f is None:
            raise TypingError("Func", f"undeclared function symbol {t.func}")
        if len(f.arg_types) != len(t.args):
            raise TypingError("Func", f"{t.func} expects {len(f.arg_types)} arguments")
        decl, ren = _rename_decl((*f.arg_types, f.range))
        for arg, want in zip(t.args, decl[:-1]):
            got = self.term(arg)
            if not unify_types(got, want, self.theta, self.rigid):
                raise TypingError("Func", f"argument {arg} of {t.func} has type "
                                          f"{self.resolve(got)}, expected {self.resolve(want)}")
        return decl[-1]

    def atom_at(self, atom, decl):
        """Unify argument types of ``atom`` with ``decl``; False on failure."""
        for arg, want in zip(atom.args, decl):
            got = self.term(arg)
            if not unify_types(got, want, self.theta, self.rigid):
                return False
        return True

    def resolve(self, t):
        return resolve_type(t, self.theta)


def _pretty_params(types_in_order, keep):
    """Rename fresh inference parameters to T1, T2, ... (deterministically)."""
    taken = set(keep)
    ren = {}
    n = 0
    for t in types_in_order:
        for p in _params_in_order(t):
            if p.startswith(_FRESH) and p not in ren:
                n += 1
                while f"T{n}" in taken:
                    n += 1
                ren[p] = TParam(f"T{n}")
    return ren


def _params_in_order(t):
    if isinstance(t, TParam):
        yield t.name
    else:
        for a in t.args:
            yield from _params_in_order(a)


def infer_term_type(gamma, t, sig: Signature):
    """Most general type of ``t`` under ``gamma``; parameters in ``gamma`` are fixed."""
    rigid = set()
    for ty in gamma.values():
        rigid |= type_params(ty)
    inf = _Inferer(sig, gamma, rigid)
    missing = [v for v in term_vars(t) if v not in gamma]
    if missing:
        raise TypingError("Var", f"variable {missing[0]} has no type in the variable typing")
    ty = inf.resolve(inf.term(t))
    return subst_type(ty, _pretty_params([ty], rigid))


def _pred_decl(sig, atom, clause):
    decl = sig.preds.get(atom.pred)
    if decl is None:
        raise TypingError("Atom", f"undeclared predicate {atom.pred}", atom, clause)
    if len(decl) != len(atom.args):
        raise TypingError("Atom", f"{atom.pred} expects {len(decl)} arguments", atom, clause)
    return decl


def _run_clause(clause, sig, rigid_head):
    """One inference pass.  Returns (inferer, body declared-type renamings)."""
    head_decl = _pred_decl(sig, clause.head, clause)
    rigid = type_params(head_decl) if rigid_head else set()
    inf = _Inferer(sig, rigid=rigid)
    hdecl, _ = _rename_decl(head_decl, rigid=rigid_head)
    try:
        ok = inf.atom_at(clause.head, hdecl)
    except TypingError as e:
        raise TypingError("Head", f"head condition violated: {e.message}", clause.head, clause) from None
    if not ok:
        raise TypingError("Head", "head condition violated", clause.head, clause)
    renamings = []
    for b in clause.body:
        decl, ren = _rename_decl(_pred_decl(sig, b, clause))
        try:
            ok = inf.atom_at(b, decl)
        except TypingError as e:
            if rigid_head:
                raise TypingError("Head", f"head condition violated: {e.message}", clause.head, clause) from None
            raise TypingError("Atom", f"ill-typed body atom {b}: {e.message}", b, clause) from None
        if not ok:
            if rigid_head:
                raise TypingError("Head", f"head condition violated (forced by body atom {b})", clause.head, clause)
            raise TypingError("Atom", f"ill-typed body atom {b}", b, clause)
        renamings.append(ren)
    return inf, renamings, head_decl


def check_clause(clause: Clause, sig: Signature) -> Judgement:
    # a flexible pass first separates ill-typed body atoms from head failures
    _run_clause(clause, sig, rigid_head=False)
    inf, renamings, head_decl = _run_clause(clause, sig, rigid_head=True)
    return _judgement(clause, inf, renamings, head_decl, keep=type_params(head_decl))


def _judgement(clause, inf, renamings, head_decl, keep):
    names = term_vars(clause)
    gamma_types = [inf.resolve(inf.var_type(v)) for v in names]
    thetas_raw = [{p: inf.resolve(t) for p, t in ren.items()} for ren in renamings]
    order = list(gamma_types) + [t for th in thetas_raw for _, t in sorted(th.items())]
    pretty = _pretty_params(order, keep)
    gamma = tuple(sorted((v, subst_type(t, pretty)) for v, t in zip(names, gamma_types)))
    thetas = tuple(tuple(sorted((p, subst_type(t, pretty)) for p, t in th.items())) for th in thetas_raw)
    return Judgement(clause, gamma, tuple(head_decl), thetas)


def check_query(atoms, sig: Signature) -> Judgement:
    """One variable typing for the whole query, an independent instance per atom."""
    inf = _Inferer(sig)
    renamings = []
    for a in atoms:
        decl, ren = _rename_decl(_pred_decl(sig, a, None))
        try:
            ok = inf.atom_at(a, decl)
        except TypingError as e:
            raise TypingError("Atom", f"ill-typed query atom {a}: {e.message}", a) from None
        if not ok:
            raise TypingError("Atom", f"ill-typed query atom {a}", a)
        renamings.append(ren)
    return _judgement(tuple(atoms), inf, renamings, (), keep=set())


def check_program(program, sig: Signature):
    """Judgements for every clause; raises :class:`ProgramTypingError` listing all failures."""
    out, errors = [], []
    for c in program.clauses:
        try:
            out.append(check_clause(c, sig))
        except TypingError as e:
            errors.append(e)
    if errors:
        raise ProgramTypingError(errors)
    return out


GOAL = "goal$"


def compile_query(atoms, sig: Signature):
    """Clause ``goal$(x1..xk) :- atoms`` and the declared types of ``goal$``.

    The goal predicate carries the query variables so that answers can be
    read back from the fixpoint.
    """
    j = check_query(atoms, sig)
    names = term_vars(tuple(atoms))
    types = tuple(j.var_types[v] for v in names)
    return Clause(Atom(GOAL, tuple(Var(v) for v in names)), tuple(atoms)), types


# --------------------------------------------------------------------------
# recursion mode


@dataclass(frozen=True)
class RecursionMode:
    monomorphic: bool
    witness: object = None  # clause with a polymorphic recursive call
    call: object = None

    def __str__(self):
        if self.monomorphic:
            return "monomorphic"
        return f"polymorphic (call {self.call} in clause {self.witness})"


def call_graph(program):
    g = nx.DiGraph()
    for c in program.clauses:
        g.add_node(c.head.pred)
        for b in c.body:
            g.add_edge(c.head.pred, b.pred)
    return g


def recursion_mode(program, judgements, sig: Signature) -> RecursionMode:
    """Monomorphic iff every recursive call is typed at its predicate's declared types.

    A call to the head's own predicate must have exactly the head's types
    (free types of local variables may be chosen to make this so).  Calls to
    other predicates of the same strongly connected component must be typed
    at a renaming of the callee's declaration.
    """
    g = call_graph(program)
    comp = {}
    for i, scc in enumerate(nx.strongly_connected_components(g)):
        for p in scc:
            comp[p] = i
    for j in judgements:
        c = j.clause
        hp = c.head.pred
        for i, b in enumerate(c.body):
            if comp[b.pred] != comp[hp]:
                continue
            theta = j.theta(i)
            decl_params = type_params(sig.preds[b.pred])
            if b.pred == hp:
                ok = _is_identity(theta, decl_params)
            else:
                ok = _is_renaming(theta, decl_params)
            if not ok:
                return RecursionMode(False, c, b)
    return RecursionMode(True)


def _is_identity(theta, rigid):
    sub = {}
    for p, t in theta.items():
        if not unify_types(t, TParam(p), sub, rigid):
            return False
    return True


def _is_renaming(theta, rigid):
    images = [theta[p] for p in sorted(theta)]
    if not all(isinstance(t, TParam) for t in images):
        return False
    return len(set(images)) == len(images)


def term_has_type(t, tau, sig: Signature) -> bool:
    """Whether ``t`` can be typed at ``tau`` for some variable typing."""
    inf = _Inferer(sig, rigid=type_params(tau))
    try:
        got = inf.term(t)
    except TypingError:
        return False
    return unify_types(got, tau, inf.theta, inf.rigid)
