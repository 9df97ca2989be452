"""Command-line driver.

Exit status: 0 on success, 1 when the input is rejected (parse, condition
or typing errors, failed correctness checks), 2 on usage and I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from importlib import resources

from .absdomain import AbstractSyntaxError, AbstractTypeError, abstract_term, normalize, parse_abstract, parse_abstract_atom
from .labelling import LabelError, labels
from .parser import ParseError, add_literals, parse_program, parse_term, parse_type
from .semantics import (
    DEFAULT_MAX_ITERS,
    FixpointDiverged,
    abstract_program,
    analyze_query,
    check_correctness,
    lfp_abstract,
    readback_answers,
)
from .syntax import format_term
from .typecheck import ProgramTypingError, TypingError, check_program, check_query, recursion_mode
from .typegraph import ConditionError, TypeEnv, check_conditions
from .unify import unify

EXIT_OK, EXIT_REJECTED, EXIT_USAGE = 0, 1, 2
_ATOM_HEAD = re.compile(r"\s*[a-z][A-Za-z0-9_$]*\s*\(")


class UsageError(Exception):
    pass


def _read_program(path):
    """Read a program file; a missing path falls back to a bundled program of the same name."""
    if not os.path.exists(path):
        name = os.path.basename(path)
        bundled = resources.files("polyground") / "programs" / name
        if not bundled.is_file():
            raise UsageError(f"cannot read {path}: no such file")
        text = bundled.read_text(encoding="utf-8")
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return parse_program(text)


def _load(path, conditions=True):
    prog, sig = _read_program(path)
    if conditions:
        check_conditions(sig)
    return prog, sig, TypeEnv(sig)


def _emit(args, text_lines, payload):
    if getattr(args, "format", "text") == "json":
        print(json.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


# -- subcommands -------------------------------------------------------------


def cmd_check(args):
    prog, sig, env = _load(args.file)
    try:
        judgements = check_program(prog, sig)
        for q in prog.queries:
            check_query(q, sig)
    except ProgramTypingError as e:
        _emit(args, [str(x) for x in e.errors], {"ok": False, "errors": [x.as_json() for x in e.errors]})
        return EXIT_REJECTED
    except TypingError as e:
        _emit(args, [str(e)], {"ok": False, "errors": [e.as_json()]})
        return EXIT_REJECTED
    mode = recursion_mode(prog, judgements, sig)
    lines = [f"well-typed: {len(judgements)} clauses", f"recursion: {mode}"]
    payload = {"ok": True, "clauses": len(judgements), "monomorphic": mode.monomorphic,
               "witness": str(mode.witness) if mode.witness is not None else None}
    _emit(args, lines, payload)
    return EXIT_OK


def cmd_graph(args):
    prog, sig, env = _load(args.file)
    if args.type:
        phi = parse_type(args.type)
        if args.format == "json":
            payload = {
                "type": str(phi),
                "nonterminals": [str(t) for t in env.grammar(phi).nonterminals],
                "productions": [str(p) for p in env.grammar(phi).productions],
                "recursive": sorted(str(t) for t in env.recursive_types(phi)),
                "nrs": sorted(str(t) for t in env.nrs_types(phi)),
            }
            print(json.dumps(payload, indent=2))
        else:
            print(env.to_dot(phi))
        return EXIT_OK
    if args.format == "json":
        print(env.profiles_json())
    else:
        for c in sorted(sig.ctors):
            p = env.profile(c)
            nrs = ", ".join(map(str, p.nrs))
            rec = ", ".join(map(str, p.rec_other))
            print(f"{p.tau}: nrs <{nrs}> rec <{rec}> arity {p.abstract_arity}")
    return EXIT_OK


def cmd_abstract(args):
    _, sig, env = _load(args.sig)
    t = parse_term(args.term)
    add_literals(sig, t)
    a = abstract_term(t, env)
    print(normalize(a, env) if not args.raw else a)
    return EXIT_OK


def cmd_normalize(args):
    _, sig, env = _load(args.sig)
    print(normalize(parse_abstract(args.term), env))
    return EXIT_OK


def cmd_labels(args):
    _, sig, env = _load(args.sig)
    phi, start, target = parse_type(args.phi), parse_type(args.start), parse_type(args.target)
    t = parse_term(args.term)
    add_literals(sig, t)
    found = labels(env, phi, start, target, t)
    if args.vars_only:
        found = {s for s in found if not hasattr(s, "func")}
    print("{" + ", ".join(sorted(format_term(s) for s in found)) + "}")
    return EXIT_OK


def _parse_side(text):
    # "p(...)" is an abstract atom; constructor nodes always carry '#'
    if _ATOM_HEAD.match(text):
        return parse_abstract_atom(text)
    return parse_abstract(text)


def cmd_unify(args):
    _, sig, env = _load(args.sig)
    left, right = _parse_side(args.left), _parse_side(args.right)
    result = unify(left, right, env)
    if args.format == "json":
        print(json.dumps([{k: str(v) for k, v in sorted(th.items())} for th in result], indent=2))
    elif not result:
        print("not unifiable")
    else:
        for th in result:
            print("{" + ", ".join(f"{k} -> {v}" for k, v in sorted(th.items())) + "}")
    return EXIT_OK


def cmd_analyze(args):
    if args.max_iters < 1:
        raise UsageError("--max-iters must be positive")
    if args.check_correctness is not None and args.check_correctness < 0:
        raise UsageError("--check-correctness must be non-negative")
    prog, sig, env = _load(args.file)
    try:
        check_program(prog, sig)
    except ProgramTypingError as e:
        _emit(args, [str(x) for x in e.errors], {"ok": False, "errors": [x.as_json() for x in e.errors]})
        return EXIT_REJECTED
    res = lfp_abstract(abstract_program(prog, sig, env), env, args.max_iters)
    fix = res.interpretation
    lines = [f"fixpoint after {res.iterations} iterations:"] + [f"  {a}" for a in fix]
    payload = {"ok": True, "iterations": res.iterations,
               "predicates": {p: [str(a) for a in fix.atoms(p)] for p in sorted(fix.by_pred)}}
    status = EXIT_OK
    queries = []
    for q in prog.queries:
        qa, _ = analyze_query(prog, sig, q, env, args.max_iters)
        rows = readback_answers(qa, env)
        qtext = ", ".join(map(str, q))
        lines.append(f"query {qtext}:")
        for row in rows:
            lines.append("  answer: " + ", ".join(f"{v}={row[v]['value']}" for v in qa.variables))
            lines.extend(f"    {row[v]['reading']}" for v in qa.variables)
        queries.append({"query": qtext, "answers": [str(a) for a in qa.answers], "readback": rows})
    payload["queries"] = queries
    if args.check_correctness is not None:
        rep = check_correctness(prog, sig, args.check_correctness, env, fixpoint=fix)
        lines.append(str(rep))
        payload["correctness"] = {"ok": rep.ok, "k": rep.k, "concrete_atoms": rep.concrete_atoms,
                                  "undescribed": [str(a) for a in rep.undescribed]}
        if not rep.ok:
            status = EXIT_REJECTED
    _emit(args, lines, payload)
    return status


# -- entry point -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="polyground", description="Groundness analysis for typed logic programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="check declarations and clause typing")
    c.add_argument("file")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("graph", help="role profiles, or the type graph of one type")
    g.add_argument("file")
    g.add_argument("--type", help="show the grammar of this type (dot or json)")
    g.add_argument("--format", choices=("text", "json"), default="text")
    g.set_defaults(func=cmd_graph)

    a = sub.add_parser("abstract", help="abstraction of a concrete term")
    a.add_argument("term")
    a.add_argument("--sig", required=True)
    a.add_argument("--raw", action="store_true", help="do not normalize")
    a.set_defaults(func=cmd_abstract)

    n = sub.add_parser("normalize", help="normal form of an abstract term")
    n.add_argument("term")
    n.add_argument("--sig", required=True)
    n.set_defaults(func=cmd_normalize)

    lb = sub.add_parser("labels", help="labelling set Z(phi, start, target, term)")
    lb.add_argument("phi")
    lb.add_argument("start")
    lb.add_argument("target")
    lb.add_argument("term")
    lb.add_argument("--sig", required=True)
    lb.add_argument("--vars-only", action="store_true")
    lb.set_defaults(func=cmd_labels)

    u = sub.add_parser("unify", help="complete set of unifiers of two abstract terms or atoms")
    u.add_argument("left")
    u.add_argument("right")
    u.add_argument("--sig", required=True)
    u.add_argument("--format", choices=("text", "json"), default="text")
    u.set_defaults(func=cmd_unify)

    z = sub.add_parser("analyze", help="abstract fixpoint and query readback")
    z.add_argument("file")
    z.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    z.add_argument("--check-correctness", type=int, metavar="K")
    z.add_argument("--format", choices=("text", "json"), default="text")
    z.set_defaults(func=cmd_analyze)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_REJECTED
    except ConditionError as e:
        for v in e.violations:
            print(v, file=sys.stderr)
        return EXIT_REJECTED
    except (TypingError, AbstractTypeError, AbstractSyntaxError, LabelError, FixpointDiverged) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_REJECTED


if __name__ == "__main__":
    sys.exit(main())
