"""Reader for program files.

Statements end with '.'; '%' starts a line comment::

    type c(U1,...,Uk).
    func f : t1, ..., tn -> t.        % func f : -> t.  for constants
    pred p : t1, ..., tn.
    head :- b1, ..., bm.
    query a1, ..., am.

Lowercase identifiers name constructors, functions and predicates;
uppercase (or '_'-prefixed) identifiers are variables in terms and
parameters in types.  Integer literals have type ``int`` and double-quoted
strings have type ``str``; both types always exist.  ``[a,b|T]`` and
``[]`` are sugar for ``cons``/``nil``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    App,
    Atom,
    Clause,
    FuncDecl,
    Program,
    Signature,
    TCtor,
    TParam,
    Var,
    is_flat,
    subst_type,
    type_params,
)


class ParseError(Exception):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.msg = msg
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<arrow>->)
  | (?P<int>\d+)
  | (?P<str>"[^"\n]*")
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_$]*)
  | (?P<punct>[()\[\],|.:])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            toks.append(Tok(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Reader:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text):
        return self.tok.text == text and self.tok.kind in ("punct", "neck", "arrow")

    def expect(self, text):
        if not self.at(text):
            t = self.tok
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.next()

    def error(self, msg, tok=None):
        t = tok or self.tok
        return ParseError(msg, t.line, t.col)

    # types ------------------------------------------------------------

    def type_term(self):
        t = self.tok
        if t.kind == "var":
            self.next()
            return TParam(t.text)
        if t.kind != "atom":
            raise self.error(f"expected a type, found {t.text!r}")
        self.next()
        args = ()
        if self.at("("):
            self.next()
            args = tuple(self.comma_list(self.type_term, ")"))
            self.expect(")")
        return TCtor(t.text, args)

    def comma_list(self, item, closer):
        out = []
        if self.at(closer):
            return out
        out.append(item())
        while self.at(","):
            self.next()
            out.append(item())
        return out

    # terms ------------------------------------------------------------

    def term(self):
        t = self.tok
        if t.kind == "var":
            self.next()
            return Var(t.text), t
        if t.kind == "int":
            self.next()
            return App(t.text), t
        if t.kind == "str":
            self.next()
            return App(t.text), t
        if t.kind == "atom":
            self.next()
            args = ()
            if self.at("("):
                self.next()
                args = tuple(a for a, _ in self.comma_list(self.term, ")"))
                self.expect(")")
            return App(t.text, args), t
        if self.at("["):
            self.next()
            if self.at("]"):
                self.next()
                return App("nil"), t
            items = [self.term()[0]]
            while self.at(","):
                self.next()
                items.append(self.term()[0])
            tail = App("nil")
            if self.at("|"):
                self.next()
                tail = self.term()[0]
            self.expect("]")
            for it in reversed(items):
                tail = App("cons", (it, tail))
            return tail, t
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def atom(self):
        t = self.tok
        if t.kind != "atom":
            raise self.error(f"expected an atom, found {t.text or 'end of input'!r}")
        self.next()
        args = ()
        if self.at("("):
            self.next()
            args = tuple(a for a, _ in self.comma_list(self.term, ")"))
            self.expect(")")
        return Atom(t.text, args), t


class _Builder:
    """Collects declarations and checks arities while statements are read."""

    def __init__(self):
        self.sig = Signature()
        self.explicit_ctor = set()
        self.clauses = []
        self.queries = []

    def note_ctor(self, name, arity, tok, params=None):
        if name in self.sig.ctors:
            if len(self.sig.ctors[name]) != arity:
                raise ParseError(
                    f"type constructor {name} used with arity {arity}, declared with {len(self.sig.ctors[name])}",
                    tok.line, tok.col)
            if params is not None and name not in self.explicit_ctor:
                self.sig.ctors[name] = params
        else:
            self.sig.ctors[name] = params if params is not None else tuple(f"U{i + 1}" for i in range(arity))
        if params is not None:
            self.explicit_ctor.add(name)

    def note_type(self, t, tok):
        if isinstance(t, TCtor):
            self.note_ctor(t.name, len(t.args), tok)
            for a in t.args:
                self.note_type(a, tok)

    def declare_type(self, t, tok):
        if not isinstance(t, TCtor) or not is_flat(t):
            raise ParseError(f"type declaration must be c(U1,...,Uk) with distinct parameters: {t}", tok.line, tok.col)
        if t.name in self.explicit_ctor:
            raise ParseError(f"duplicate type declaration for {t.name}", tok.line, tok.col)
        self.note_ctor(t.name, len(t.args), tok, tuple(a.name for a in t.args))

    def declare_func(self, name, args, rng, tok):
        if name in self.sig.funcs:
            raise ParseError(f"duplicate declaration of function {name} (overloading is not allowed)", tok.line, tok.col)
        for t in (*args, rng):
            self.note_type(t, tok)
        if not type_params(args) <= type_params(rng):
            raise ParseError(f"declaration of {name} violates transparency: parameters of argument types must occur in {rng}",
                             tok.line, tok.col)
        if isinstance(rng, TCtor) and is_flat(rng) and rng.name not in self.explicit_ctor:
            # the first flat range fixes the canonical parameter names
            if not any(f.range.name == rng.name for f in self.sig.funcs.values() if isinstance(f.range, TCtor)):
                self.sig.ctors[rng.name] = tuple(a.name for a in rng.args)
        self.sig.funcs[name] = FuncDecl(name, tuple(args), rng)

    def declare_pred(self, name, args, tok):
        if name in self.sig.preds:
            raise ParseError(f"duplicate declaration of predicate {name}", tok.line, tok.col)
        for t in args:
            self.note_type(t, tok)
        self.sig.preds[name] = tuple(args)

    def literal(self, text, tok):
        if text in self.sig.funcs:
            return
        ty = "int" if text[0].isdigit() else "str"
        self.note_ctor(ty, 0, tok)
        self.sig.funcs[text] = FuncDecl(text, (), TCtor(ty))

    def check_term(self, t, tok):
        if isinstance(t, Var):
            return
        if t.func[0].isdigit() or t.func.startswith('"'):
            self.literal(t.func, tok)
            return
        f = self.sig.funcs.get(t.func)
        if f is None:
            raise ParseError(f"undeclared function symbol {t.func}", tok.line, tok.col)
        if len(f.arg_types) != len(t.args):
            raise ParseError(f"{t.func} has arity {len(f.arg_types)}, used with {len(t.args)} arguments", tok.line, tok.col)
        for a in t.args:
            self.check_term(a, tok)

    def check_atom(self, a, tok):
        decl = self.sig.preds.get(a.pred)
        if decl is None:
            raise ParseError(f"undeclared predicate {a.pred}", tok.line, tok.col)
        if len(decl) != len(a.args):
            raise ParseError(f"{a.pred} has arity {len(decl)}, used with {len(a.args)} arguments", tok.line, tok.col)
        for t in a.args:
            self.check_term(t, tok)

    def finish(self):
        for ty in LITERAL_TYPES:
            self.sig.ctors.setdefault(ty, ())
        # rewrite flat ranges onto the canonical parameter names of their constructor
        for name, f in list(self.sig.funcs.items()):
            rng = f.range
            if isinstance(rng, TCtor) and is_flat(rng):
                canon = self.sig.ctors[rng.name]
                ren = {a.name: TParam(c) for a, c in zip(rng.args, canon)}
                others = (type_params(f.arg_types) | type_params(rng)) - set(ren)
                clash = others & set(canon)
                for p in clash:
                    ren[p] = TParam(p + "'")
                self.sig.funcs[name] = FuncDecl(name, tuple(subst_type(t, ren) for t in f.arg_types), subst_type(rng, ren))
        return Program(tuple(self.clauses), tuple(self.queries)), self.sig


_KEYWORDS = ("type", "func", "pred", "query")
LITERAL_TYPES = ("int", "str")


def parse_program(source: str):
    """Parse program text into ``(Program, Signature)``."""
    r = _Reader(tokenize(source))
    b = _Builder()
    # declarations may follow their use, so clauses are checked after reading
    pending = []
    while r.tok.kind != "eof":
        t = r.tok
        # a keyword followed by '(' or '.' is an ordinary atom named like the keyword
        if t.kind == "atom" and t.text in _KEYWORDS and r.toks[r.i + 1].kind not in ("punct", "neck", "eof"):
            r.next()
            if t.text == "type":
                ty = r.type_term()
                b.declare_type(ty, t)
            elif t.text == "func":
                name = r.next()
                if name.kind not in ("atom", "int", "str"):
                    raise r.error("expected a function name", name)
                r.expect(":")
                args = []
                if not r.at("->"):
                    args = r.comma_list(r.type_term, "->")
                r.expect("->")
                rng = r.type_term()
                b.declare_func(name.text, args, rng, name)
            elif t.text == "pred":
                name = r.next()
                if name.kind != "atom":
                    raise r.error("expected a predicate name", name)
                args = []
                if r.at(":"):
                    r.next()
                    args = r.comma_list(r.type_term, ".")
                b.declare_pred(name.text, args, name)
            else:
                atoms = [r.atom()]
                while r.at(","):
                    r.next()
                    atoms.append(r.atom())
                pending.append(("query", atoms, t))
            r.expect(".")
            continue
        head = r.atom()
        body = []
        if r.at(":-"):
            r.next()
            body.append(r.atom())
            while r.at(","):
                r.next()
                body.append(r.atom())
        r.expect(".")
        pending.append(("clause", (head, body), t))

    for kind, payload, tok in pending:
        if kind == "clause":
            (head, htok), body = payload
            b.check_atom(head, htok)
            for a, atok in body:
                b.check_atom(a, atok)
            b.clauses.append(Clause(head, tuple(a for a, _ in body), tok.line))
        else:
            for a, atok in payload:
                b.check_atom(a, atok)
            b.queries.append(tuple(a for a, _ in payload))
    return b.finish()


def add_literals(sig: Signature, t):
    """Declare the literal constants occurring in ``t`` (a term or atom) in ``sig``."""
    if isinstance(t, Var):
        return
    if isinstance(t, App) and (t.func[0].isdigit() or t.func.startswith('"')):
        if t.func not in sig.funcs:
            ty = "int" if t.func[0].isdigit() else "str"
            sig.ctors.setdefault(ty, ())
            sig.funcs[t.func] = FuncDecl(t.func, (), TCtor(ty))
        return
    for a in t.args:
        add_literals(sig, a)


def parse_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def parse_term(text: str):
    r = _Reader(tokenize(text))
    t, _ = r.term()
    if r.tok.kind != "eof":
        raise r.error(f"trailing input {r.tok.text!r}")
    return t


def parse_type(text: str):
    r = _Reader(tokenize(text))
    t = r.type_term()
    if r.tok.kind != "eof":
        raise r.error(f"trailing input {r.tok.text!r}")
    return t


def parse_atom(text: str):
    r = _Reader(tokenize(text))
    a, _ = r.atom()
    if r.at("."):
        r.next()
    if r.tok.kind != "eof":
        raise r.error(f"trailing input {r.tok.text!r}")
    return a
