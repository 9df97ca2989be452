"""Independent brute-force oracles used by the test-suite."""

from itertools import combinations, product

from polyground.absdomain import ANode, AVar, AbstractTyper, abstract_vars, join, normalize, substitute
from polyground.order import joint_typer


def _summands(a, out):
    for s in a.items:
        out.add(s)
        if isinstance(s, ANode):
            for x in s.args:
                _summands(x, out)


def brute_force_unifiers(t1, t2, env, max_join=2):
    """All substitutions into joins of at most ``max_join`` summands drawn from
    the sub-summands of both inputs plus one fresh variable per variable type,
    that make ``t1`` and ``t2`` AC+-equal."""
    names = abstract_vars((t1, t2))
    typer, _ = joint_typer(env, t1, t2)
    if typer is None:
        return names, []
    pool = set()
    for a in (*t1, *t2):
        _summands(a, pool)
    pool = {s for s in pool if not isinstance(s, AVar)}
    fresh = {}
    cands = {}
    for x in names:
        ty = typer.type_of_var(x)
        key = str(ty)
        fresh.setdefault(key, AVar(f"F{len(fresh)}"))
        usable = []
        for s in sorted(pool, key=lambda s: s.key) + [fresh[key]]:
            chk = AbstractTyper(env)
            if chk.check(join(s), ty):
                usable.append(s)
        cands[x] = [join(*c) for r in range(max_join + 1) for c in combinations(usable, r)]
    sols = []
    for vals in product(*(cands[x] for x in names)):
        th = dict(zip(names, vals))
        if normalize(substitute(t1, th), env) == normalize(substitute(t2, th), env) and _well_typed(th, t1, t2, env):
            sols.append(th)
    return names, sols


def _well_typed(th, t1, t2, env):
    """Inputs typed position-wise alike, and every value typed like its variable."""
    typer = AbstractTyper(env)
    for a, b in zip(t1, t2):
        ty = typer.fresh()
        if not (typer.check(a, ty) and typer.check(b, ty)):
            return False
    for x, v in th.items():
        ty = typer.fresh()
        if not (typer.check(join(AVar(x)), ty) and typer.check(v, ty)):
            return False
    return True
