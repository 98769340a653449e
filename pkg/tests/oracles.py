"""Hand-rolled references the test suite trusts.

Deliberately dumb code: structural recursion, dict environments, equality
on types, no unification and no sharing with the package internals beyond
the term datatypes.  Derived expectations elsewhere in the suite were
computed by these functions once and then frozen into the test source.
"""

from __future__ import annotations

import itertools

from langcert.ir import Bind, BVar, Const, ObjVar, Term

BOOL = Const("bool", ())


def arrow(a: Term, b: Term) -> Term:
    return Const("arrow", (a, b))


def open_with_var(body: Term, name: str, depth: int = 0) -> Term:
    """Replace BVar(depth) with a free variable.  The replacement is a bare
    name, so no capture is possible and no lifting is needed."""
    match body:
        case BVar(i):
            return ObjVar(name) if i == depth else body
        case Const(c, args):
            return Const(c, tuple(open_with_var(a, name, depth) for a in args))
        case Bind(hint, inner):
            return Bind(hint, open_with_var(inner, name, depth + 1))
        case _:
            return body


def close_over_var(t: Term, name: str, depth: int = 0) -> Term:
    match t:
        case ObjVar(n) if n == name:
            return BVar(depth)
        case Const(c, args):
            return Const(c, tuple(close_over_var(a, name, depth) for a in args))
        case Bind(hint, inner):
            return Bind(hint, close_over_var(inner, name, depth + 1))
        case _:
            return t


_fresh = itertools.count()


def stlc_type(t: Term, env: dict[str, Term]) -> Term | None:
    """The type of a simply typed lambda term with booleans, or None if it
    has none.  Covers tt, ff, abs, app, ite, let and variables from env."""
    match t:
        case ObjVar(n):
            return env.get(n)
        case Const("tt", ()) | Const("ff", ()):
            return BOOL
        case Const("abs", (t1, Bind() as b)):
            x = f"v{next(_fresh)}"
            t2 = stlc_type(open_with_var(b.body, x), env | {x: t1})
            return None if t2 is None else arrow(t1, t2)
        case Const("app", (e1, e2)):
            f = stlc_type(e1, env)
            a = stlc_type(e2, env)
            if (isinstance(f, Const) and f.name == "arrow"
                    and a is not None and f.args[0] == a):
                return f.args[1]
            return None
        case Const("ite", (e1, e2, e3)):
            c = stlc_type(e1, env)
            a = stlc_type(e2, env)
            b = stlc_type(e3, env)
            return a if c == BOOL and a is not None and a == b else None
        case Const("let", (e1, Bind() as b)):
            t1 = stlc_type(e1, env)
            if t1 is None:
                return None
            x = f"v{next(_fresh)}"
            return stlc_type(open_with_var(b.body, x), env | {x: t1})
        case _:
            return None


def iter_terms(depth: int, names: tuple[str, ...],
               annots: tuple[Term, ...]):
    """Every candidate term up to `depth` levels deep, well typed or not, in
    a deterministic order: all leaves, then every combination whose parts
    come from the previous depths.  Variables are drawn from `names` and
    binder annotations from `annots`.  Lazy, because the last layer is huge;
    callers slice what they need."""
    seen: set[Term] = set()
    for t in _iter_layers(depth, names, annots):
        if t not in seen:
            seen.add(t)
            yield t


def _iter_layers(depth: int, names: tuple[str, ...],
                 annots: tuple[Term, ...]):
    yield from _leaves(names)
    prev = list(_leaves(names))
    for d in range(2, depth + 1):
        layer = _combine(prev, names, annots, d)
        if d < depth:
            layer = list(layer)
            yield from layer
            prev = prev + layer
        else:
            yield from layer


def _leaves(names: tuple[str, ...]):
    yield Const("tt", ())
    yield Const("ff", ())
    for n in names:
        yield ObjVar(n)


def _combine(parts: list[Term], names: tuple[str, ...],
             annots: tuple[Term, ...], d: int):
    x = f"b{d}"
    bodies = list(itertools.islice(
        iter_terms(d - 1, names + (x,), annots), 64))
    streams = [
        (Const("app", (e1, e2))
         for e1, e2 in itertools.product(parts, repeat=2)),
        (Const("ite", (e1, e2, e3))
         for e1, e2, e3 in itertools.product(parts, repeat=3)),
        (Const("abs", (ann, Bind("x", close_over_var(b, x))))
         for ann, b in itertools.product(annots, bodies)),
        (Const("let", (e1, Bind("x", close_over_var(b, x))))
         for e1, b in itertools.product(parts, bodies)),
    ]
    for group in itertools.zip_longest(*streams):
        for t in group:
            if t is not None:
                yield t
