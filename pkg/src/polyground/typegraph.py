"""Type graphs, subterm-type relations and role profiles.

A :class:`TypeEnv` wraps a :class:`~polyground.syntax.Signature` and
memoizes everything derived from it.  The two well-formedness conditions
(Reflexive, Flat Range) are checked by :func:`check_conditions`.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass

import networkx as nx

from .syntax import Signature, TCtor, TParam, is_flat, is_syntactic_subterm, match_type, subst_type, type_depth, type_key


class ConditionError(Exception):
    """A declaration violates the Reflexive or Flat Range condition."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Violation:
    condition: str  # "Reflexive" or "Flat Range"
    declaration: str
    detail: str = ""

    def __str__(self):
        msg = f"{self.condition} Condition violated by {self.declaration}"
        return f"{msg}: {self.detail}" if self.detail else msg


@dataclass(frozen=True)
class Production:
    lhs: object
    func: str
    rhs: tuple

    def __str__(self):
        return f"{self.lhs} -> {self.func}({', '.join(map(str, self.rhs))})"


@dataclass(frozen=True)
class TypeGrammar:
    start: object
    nonterminals: tuple
    productions: tuple

    def productions_of(self, nt):
        return [p for p in self.productions if p.lhs == nt]


@dataclass(frozen=True)
class RoleProfile:
    tau: TCtor
    nrs: tuple
    rec_other: tuple

    @property
    def slots(self):
        return self.nrs + self.rec_other

    @property
    def abstract_arity(self):
        return len(self.nrs) + len(self.rec_other)

    def as_json(self):
        return {
            "type": str(self.tau),
            "nrs": [str(t) for t in self.nrs],
            "rec_other": [str(t) for t in self.rec_other],
            "abstract_arity": self.abstract_arity,
        }


def sort_types(types):
    return tuple(sorted(set(types), key=type_key))


DEFAULT_DEPTH_CAP = 64
_NODE_CAP = 20000


class TypeEnv:
    """Derived type information for one signature."""

    def __init__(self, sig: Signature, depth_cap: int = DEFAULT_DEPTH_CAP):
        self.sig = sig
        self.depth_cap = depth_cap
        self._lock = threading.Lock()
        self._grammars = {}
        self._profiles = {}
        self._recsets = {}

    # -- one step -------------------------------------------------------

    def productions(self, nt):
        """Productions ``nt -> f(τ1Θ, ..., τnΘ)`` for every f whose range matches nt."""
        if isinstance(nt, TParam):
            return []
        out = []
        for f in self.sig.funcs_with_range(nt.name):
            theta = match_type(f.range, nt)
            if theta is None:
                continue
            out.append(Production(nt, f.name, tuple(subst_type(a, theta) for a in f.arg_types)))
        return out

    def direct_subterm_types(self, phi):
        return sort_types(a for p in self.productions(phi) for a in p.rhs)

    # -- grammars -------------------------------------------------------

    def grammar(self, phi) -> TypeGrammar:
        with self._lock:
            g = self._grammars.get(phi)
        if g is not None:
            return g
        seen = {phi}
        prods = []
        todo = deque([phi])
        while todo:
            nt = todo.popleft()
            for p in self.productions(nt):
                prods.append(p)
                for a in p.rhs:
                    if a not in seen:
                        if type_depth(a) > self.depth_cap or len(seen) > _NODE_CAP:
                            raise ConditionError([Violation(
                                "Reflexive", f"grammar for {phi}",
                                f"closure does not terminate (reached {a})")])
                        seen.add(a)
                        todo.append(a)
        g = TypeGrammar(phi, sort_types(seen), tuple(prods))
        with self._lock:
            self._grammars[phi] = g
        return g

    def graph(self, phi) -> nx.DiGraph:
        g = self.grammar(phi)
        dg = nx.DiGraph()
        dg.add_nodes_from(g.nonterminals)
        for p in g.productions:
            for a in p.rhs:
                dg.add_edge(p.lhs, a)
        return dg

    def recursive_types(self, phi):
        """The set of σ with σ ⋈ φ (the SCC of φ in its type graph)."""
        with self._lock:
            r = self._recsets.get(phi)
        if r is not None:
            return r
        dg = self.graph(phi)
        r = frozenset(next(c for c in nx.strongly_connected_components(dg) if phi in c))
        with self._lock:
            self._recsets[phi] = r
        return r

    def nrs_types(self, phi):
        rec = self.recursive_types(phi)
        dg = self.graph(phi)
        return frozenset(s for t in rec for s in dg.successors(t) if s not in rec)

    def is_recursive(self, sigma, phi):
        return sigma in self.recursive_types(phi)

    def is_nrs(self, sigma, phi):
        return sigma in self.nrs_types(phi)

    # -- profiles -------------------------------------------------------

    def profile(self, ctor) -> RoleProfile:
        """Role profile of the flat type of ``ctor`` (a name or a flat TCtor)."""
        name = ctor.name if isinstance(ctor, TCtor) else ctor
        with self._lock:
            p = self._profiles.get(name)
        if p is not None:
            return p
        tau = self.sig.flat_type(name)
        rec = self.recursive_types(tau)
        p = RoleProfile(tau, sort_types(self.nrs_types(tau)), sort_types(rec - {tau}))
        with self._lock:
            self._profiles[name] = p
        return p

    def abstract_signature(self):
        return {c: self.profile(c).abstract_arity for c in sorted(self.sig.ctors)}

    def extra_transitive_nrs(self, ctor):
        """Types that a transitive reading of the NRS definition would add.

        These are reachable from the recursive component in two or more
        steps, are not one-step exits, and do not reach back.  An empty
        result means both readings agree for this constructor.
        """
        tau = self.sig.flat_type(ctor)
        rec = self.recursive_types(tau)
        dg = self.graph(tau)
        exits = self.nrs_types(tau)
        reach = set()
        for e in exits:
            reach |= nx.descendants(dg, e)
        return sort_types(reach - exits - rec)

    # -- output ---------------------------------------------------------

    def to_dot(self, phi):
        g = self.grammar(phi)
        ids = {nt: f"n{i}" for i, nt in enumerate(g.nonterminals)}
        lines = ["digraph types {"]
        for nt in g.nonterminals:
            style = ", penwidth=2" if nt == phi else ""
            lines.append(f'  {ids[nt]} [label="{nt}", shape=box{style}];')
        for p in g.productions:
            for i, a in enumerate(p.rhs, 1):
                lines.append(f'  {ids[p.lhs]} -> {ids[a]} [label="{p.func}/{i}"];')
        lines.append("}")
        return "\n".join(lines)

    def profiles_json(self):
        out = {}
        for c in sorted(self.sig.ctors):
            prof = self.profile(c).as_json()
            extra = self.extra_transitive_nrs(c)
            if extra:
                prof["transitive_reading_adds"] = [str(t) for t in extra]
            out[c] = prof
        return json.dumps(out, indent=2)


def condition_violations(sig: Signature, depth_cap: int = DEFAULT_DEPTH_CAP):
    """All violations of the Flat Range and Reflexive conditions."""
    out = []
    for f in sig.funcs.values():
        if not is_flat(f.range):
            out.append(Violation("Flat Range", f"{f.name} : {_fmt_decl(f)}", f"range {f.range} is not a flat type"))
    env = TypeEnv(sig, depth_cap)
    for c in sorted(sig.ctors):
        start = sig.flat_type(c)
        early = _early_reflexive(env, start)
        if early:
            out.append(Violation("Reflexive", _decls_for(sig, c),
                                 f"{early} is a subterm type of {start} but not a syntactic subterm"))
            continue
        # explore the ⊴ closure; every nonterminal checks its own descendants
        try:
            dg = env.graph(start)
        except ConditionError as e:
            out.append(Violation("Reflexive", _decls_for(sig, c), e.violations[0].detail))
            continue
        bad = _reflexive_failure(dg)
        if bad:
            sigma, tau = bad
            out.append(Violation("Reflexive", _decls_for(sig, c),
                                 f"{sigma} is a subterm type of {tau} but not a syntactic subterm"))
    return _dedup(out)


def check_conditions(sig: Signature, depth_cap: int = DEFAULT_DEPTH_CAP):
    v = condition_violations(sig, depth_cap)
    if v:
        raise ConditionError(v)


def _early_reflexive(env, start):
    """First type below ``start`` with the same head that is not a syntactic subterm of it."""
    seen = {start}
    todo = deque([start])
    while todo and len(seen) <= _NODE_CAP:
        for p in env.productions(todo.popleft()):
            for a in p.rhs:
                if a in seen:
                    continue
                if isinstance(a, TCtor) and a.name == start.name and not is_syntactic_subterm(a, start):
                    return a
                if type_depth(a) > env.depth_cap:
                    return None
                seen.add(a)
                todo.append(a)
    return None


def _reflexive_failure(dg):
    for tau in sorted(dg.nodes, key=type_key):
        if not isinstance(tau, TCtor):
            continue
        for sigma in sorted(nx.descendants(dg, tau), key=type_key):
            if isinstance(sigma, TCtor) and sigma.name == tau.name and not is_syntactic_subterm(sigma, tau):
                return sigma, tau
    return None


def _fmt_decl(f):
    return f"{', '.join(map(str, f.arg_types))} -> {f.range}".strip()


def _decls_for(sig, ctor):
    fs = sig.funcs_with_range(ctor)
    if not fs:
        return f"type {ctor}"
    return ", ".join(f"{f.name} : {_fmt_decl(f)}" for f in fs)


def _dedup(items):
    seen, out = set(), []
    for v in items:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out
