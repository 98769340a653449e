"""Unification for rule terms, restricted to the Miller pattern fragment.

Schematic variables unify first-order; the higher-order cases we support are
exactly the ones the surface syntax can produce: a variable applied to a
spine of distinct bound/eigen variables, ``(R x)``.  Frozen variables behave
as constants (they only unify with themselves), which is how entailment
queries close their environment universally.

Scope discipline: every freshly created variable and eigenvariable carries a
global timestamp.  Binding a variable to a term is only allowed when every
eigenvariable inside the term is older than the variable, so quantifier
alternation cannot be violated (an eigenvariable introduced by a later pi
never leaks into an earlier unification variable).
"""

from __future__ import annotations

from .ir import (
    Bind,
    BVar,
    Const,
    Formula,
    Generic,
    Hypothetical,
    MetaApp,
    MetaVar,
    ObjVar,
    Rule,
    Term,
    close_term,
    formula_map_terms,
    mk_app,
    open_term,
    term_metavars,
)

Subst = dict[str, Term]

_counter = 0
_birth: dict[str, int] = {}


def _tick() -> int:
    global _counter
    _counter += 1
    return _counter


def fresh_name(base: str) -> str:
    base = base.split("#", 1)[0]
    n = _tick()
    name = f"{base}#{n}"
    _birth[name] = n
    return name


def fresh_eigen(base: str) -> str:
    base = base.split("!", 1)[0] or "x"
    n = _tick()
    name = f"{base}!{n}"
    _birth[name] = n
    return name


def birth(name: str) -> int:
    # Variables straight from a source file predate everything fresh.
    return _birth.get(name, 0)


def _lowered_name(base: str, cutoff: int) -> str:
    """A fresh name whose scope is an older variable's scope."""
    base = base.split("#", 1)[0]
    name = f"{base}#{_tick()}"
    _birth[name] = cutoff
    return name


def is_eigen(name: str) -> bool:
    return "!" in name


def walk(t: Term, subst: Subst) -> Term:
    while isinstance(t, MetaVar):
        nxt = subst.get(t.name)
        if nxt is None:
            return t
        t = nxt
    return t


def resolve(t: Term, subst: Subst) -> Term:
    """Deep-apply the substitution, beta-reducing applied binders."""
    t = walk(t, subst)
    match t:
        case Const(name, args):
            return Const(name, tuple(resolve(a, subst) for a in args))
        case Bind(hint, body):
            return Bind(hint, resolve(body, subst))
        case MetaApp(fn, arg):
            return mk_app(resolve(fn, subst), resolve(arg, subst))
        case _:
            return t


def resolve_formula(f: Formula, subst: Subst) -> Formula:
    return formula_map_terms(f, lambda t: resolve(t, subst))


def _scan(t: Term, subst: Subst, metavars: set[str], eigens: set[str]) -> None:
    """Free schematic variables and eigenvariables of t, through the
    substitution."""
    t = walk(t, subst)
    match t:
        case MetaVar(n, _):
            metavars.add(n)
        case ObjVar(n):
            if is_eigen(n):
                eigens.add(n)
        case Const(_, args):
            for a in args:
                _scan(a, subst, metavars, eigens)
        case Bind(_, body):
            _scan(body, subst, metavars, eigens)
        case MetaApp(fn, arg):
            _scan(fn, subst, metavars, eigens)
            _scan(arg, subst, metavars, eigens)


def _bind(name: str, t: Term, subst: Subst,
          frozen: frozenset[str] = frozenset()) -> Subst | None:
    """Extend the substitution with name := t.  The term is stored as given;
    later reads resolve through the substitution."""
    metavars: set[str] = set()
    eigens: set[str] = set()
    _scan(t, subst, metavars, eigens)
    if name in metavars:
        return None  # occurs check
    cutoff = birth(name)
    for e in eigens:
        if birth(e) > cutoff:
            return None  # would smuggle a newer eigenvariable out of scope
    # Lower the free variables of the solution to this variable's scope, so
    # a later binding cannot sneak an in-between eigenvariable into it.
    for n in metavars:
        if n not in frozen and birth(n) > cutoff:
            _birth[n] = cutoff
    out = dict(subst)
    out[name] = t
    return out


def _spine(t: Term, subst: Subst) -> tuple[Term, list[Term]]:
    """Head and arguments of an application, flattened through the
    substitution so a bound head re-exposes its own applications."""
    args: list[Term] = []
    while True:
        if isinstance(t, MetaApp):
            args.append(t.arg)
            t = t.fn
            continue
        w = walk(t, subst)
        if isinstance(w, MetaApp):
            t = w
            continue
        t = w
        break
    args.reverse()
    return t, args


def unify(a: Term, b: Term, subst: Subst, frozen: frozenset[str] = frozenset()) -> Subst | None:
    """Unify two terms; returns an extended substitution or None."""
    a = walk(a, subst)
    b = walk(b, subst)

    if isinstance(a, MetaVar) and isinstance(b, MetaVar) and a.name == b.name:
        return subst
    if isinstance(a, MetaVar) and a.name not in frozen:
        return _bind(a.name, b, subst, frozen)
    if isinstance(b, MetaVar) and b.name not in frozen:
        return _bind(b.name, a, subst, frozen)

    match (a, b):
        case (Const(na, xs), Const(nb, ys)):
            if na != nb or len(xs) != len(ys):
                return None
            s = subst
            for x, y in zip(xs, ys):
                s = unify(x, y, s, frozen)
                if s is None:
                    return None
            return s
        case (ObjVar(na), ObjVar(nb)):
            return subst if na == nb else None
        case (BVar(i), BVar(j)):
            return subst if i == j else None
        case (Bind(hint, _), Bind()):
            c = ObjVar(fresh_eigen(hint))
            return unify(open_term(a.body, c), open_term(b.body, c), subst, frozen)
        case (MetaApp(), _) | (_, MetaApp()):
            return _unify_app(a, b, subst, frozen)
        case _:
            return None


def _unify_app(a: Term, b: Term, subst: Subst, frozen: frozenset[str]) -> Subst | None:
    for one, other in ((a, b), (b, a)):
        if not isinstance(one, MetaApp):
            continue
        head, args = _spine(one, subst)
        if isinstance(head, Bind):
            redex = head
            for arg in args:
                redex = mk_app(redex, arg)
            return unify(redex, other, subst, frozen)
        if isinstance(head, MetaVar) and head.name not in frozen:
            if all(isinstance(walk(x, subst), ObjVar) for x in args):
                names = [walk(x, subst).name for x in args]
                if len(set(names)) == len(names):
                    # Miller pattern: abstract the spine out of the other
                    # side, innermost argument first so the binders nest
                    # correctly.
                    body = resolve(other, subst)
                    s = subst
                    cutoff = birth(head.name)
                    young = {n: mv for n, mv in term_metavars(body).items()
                             if n != head.name and n not in frozen
                             and birth(n) > cutoff}
                    if young:
                        # Raise variables younger than the head over the
                        # spine, so they may still refer to it once it is
                        # abstracted.
                        s = dict(subst)
                        for n, mv in young.items():
                            raised: Term = MetaVar(
                                _lowered_name(n, cutoff), mv.flavor)
                            for en in names:
                                raised = MetaApp(raised, ObjVar(en))
                            s[n] = raised
                        body = resolve(body, s)
                    for n in reversed(names):
                        body = Bind(n.split("!", 1)[0], close_term(body, n))
                    return _bind(head.name, body, s, frozen)
            rigid = walk(other, subst)
            if isinstance(rigid, (Const, ObjVar)):
                # Imitation: a non-pattern spine against a rigid head.  Bind
                # the variable to a template copying that head, with a fresh
                # variable per argument, then retry; beta reduction and
                # decomposition take it from there.  Projection solutions
                # are not attempted.
                evs = [fresh_eigen("i") for _ in args]
                if isinstance(rigid, Const):
                    c_args = []
                    for _ in rigid.args:
                        h: Term = MetaVar(fresh_name(head.name), head.flavor)
                        for e in evs:
                            h = MetaApp(h, ObjVar(e))
                        c_args.append(h)
                    body = Const(rigid.name, tuple(c_args))
                else:
                    body = rigid
                for e in reversed(evs):
                    body = Bind("x", close_term(body, e))
                s = _bind(head.name, body, subst, frozen)
                if s is None:
                    return None
                return unify(one, other, s, frozen)
            if isinstance(rigid, Bind):
                # Eta: a flex application against a binder.  Apply both
                # sides to a fresh variable and keep going; if the flex
                # side ends up a Miller pattern the extra argument is
                # abstracted back out when the head is solved.
                e = fresh_eigen(rigid.hint or "x")
                return unify(MetaApp(one, ObjVar(e)),
                             open_term(rigid.body, ObjVar(e)),
                             subst, frozen)
    # Outside the pattern fragment: same-shape decomposition.  Unify the
    # heads (a free head binds to the other head), then the spines
    # pointwise.  This commits to one unifier out of possibly many, which
    # can miss solutions but never invents a wrong one; the proof search
    # above recovers by trying other rules.
    if isinstance(a, MetaApp) and isinstance(b, MetaApp):
        ha, xa = _spine(a, subst)
        hb, xb = _spine(b, subst)
        if len(xa) == len(xb):
            s = unify(ha, hb, subst, frozen)
            if s is not None:
                for x, y in zip(xa, xb):
                    s = unify(x, y, s, frozen)
                    if s is None:
                        return None
                return s
    return None


def freshen_rule(rule: Rule, mapping: dict[str, str] | None = None) -> Rule:
    """Rename every schematic variable in the rule to a fresh name.  Pass a
    dict as `mapping` to observe (or share) the renaming."""
    if mapping is None:
        mapping = {}

    def on_term(t: Term) -> Term:
        match t:
            case MetaVar(name, flavor):
                if name not in mapping:
                    mapping[name] = fresh_name(name)
                return MetaVar(mapping[name], flavor)
            case Const(name, args):
                return Const(name, tuple(on_term(x) for x in args))
            case Bind(hint, body):
                return Bind(hint, on_term(body))
            case MetaApp(fn, arg):
                return MetaApp(on_term(fn), on_term(arg))
            case _:
                return t

    def on_formula(f: Formula) -> Formula:
        match f:
            case Generic(hint, body, vk):
                return Generic(hint, on_formula(body), vk)
            case Hypothetical(x, c):
                return Hypothetical(on_formula(x), on_formula(c))
            case _:
                return formula_map_terms(f, on_term)

    return rule.with_parts([on_formula(p) for p in rule.premises],
                           on_formula(rule.conclusion))
