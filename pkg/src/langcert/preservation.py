"""Type preservation, rule by rule.

For each step rule the checker instantiates the typing rule of the source's
head operator (and, when the rule eliminates a constructed first argument,
the typing rule of that constructor too) to obtain a symbolic environment
Gamma_s of typing facts about the rule's schematic variables.  The rule
preserves typing when Gamma_s entails both `source : ty` and `target : ty`
with every remaining variable held rigid.

Entailment is decided by depth-bounded backchaining over the language's
typing rules, with the environment's facts tried first.  A hypothetical fact
`pi x (x : T1 => E x : T2)` discharges a goal `(E e) : T2` by proving
`e : T1` — substitution respects typing, applied as an inference rule.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator

from .classifier import typing_rule_for
from .ir import (
    Const,
    Diagnostic,
    Formula,
    Generic,
    Hypothetical,
    MetaVar,
    ObjVar,
    Rule,
    SEV_ERROR,
    Term,
    TypedLanguage,
    Typing,
    formula_metavars,
    open_formula,
    pretty_formula,
    pretty_term,
)
from .unify import (
    Subst,
    fresh_eigen,
    fresh_name,
    freshen_rule,
    resolve,
    resolve_formula,
    unify,
)

DEFAULT_DEPTH_LIMIT = 50


def depth_limit_from_env() -> int:
    raw = os.environ.get("LANGCERT_DEPTH_LIMIT")
    if raw is None:
        return DEFAULT_DEPTH_LIMIT
    try:
        return max(1, int(raw))
    except ValueError:
        return DEFAULT_DEPTH_LIMIT


@dataclass(frozen=True)
class EntailmentQuery:
    env: tuple[Formula, ...]
    subject: Term
    ty: Term
    frozen: frozenset[str]


class Trace:
    """Collects the proof search as indented lines."""

    def __init__(self):
        self.lines: list[str] = []

    def log(self, depth: int, msg: str):
        self.lines.append("  " * depth + msg)


class _Search:
    __slots__ = ("cut",)

    def __init__(self):
        self.cut = False


def _unify_pair(goal_s, goal_t, fact_s, fact_t, subst, frozen) -> Subst | None:
    s = unify(goal_s, fact_s, subst, frozen)
    if s is None:
        return None
    return unify(goal_t, fact_t, s, frozen)


def solve(lang: TypedLanguage, goal: Formula, env: list[Formula], subst: Subst,
          frozen: frozenset[str], depth: int, search: _Search,
          trace: Trace | None = None, level: int = 0) -> Iterator[Subst]:
    match goal:
        case Typing(gs, gt):
            if depth <= 0:
                search.cut = True
                if trace:
                    trace.log(level, "depth limit hit")
                return
            if trace:
                trace.log(level, "goal " + pretty_formula(resolve_formula(goal, subst)))
            for fact in env:
                match fact:
                    case Typing(fs, ft):
                        s = _unify_pair(gs, gt, fs, ft, subst, frozen)
                        if s is not None:
                            if trace:
                                trace.log(level + 1, "by env fact " + pretty_formula(fact))
                            yield s
                    case Generic(hint, body, _):
                        inst = open_formula(body, MetaVar(fresh_name(hint.upper() or "X")))
                        match inst:
                            case Typing(fs, ft):
                                s = _unify_pair(gs, gt, fs, ft, subst, frozen)
                                if s is not None:
                                    if trace:
                                        trace.log(level + 1, "by generic env fact")
                                    yield s
                            case Hypothetical(assum, Typing(cs, ct)):
                                s = _unify_pair(gs, gt, cs, ct, subst, frozen)
                                if s is not None:
                                    if trace:
                                        trace.log(level + 1,
                                                  "by hypothetical env fact, proving assumption")
                                    yield from solve(lang, assum, env, s, frozen,
                                                     depth - 1, search, trace, level + 2)
            for rule in lang.typing_rules:
                fr = freshen_rule(rule)
                concl = fr.conclusion
                s = _unify_pair(gs, gt, concl.subject, concl.ty, subst, frozen)
                if s is None:
                    continue
                if trace:
                    trace.log(level + 1, "try rule " + rule.name)
                yield from _solve_all(lang, list(fr.premises), env, s, frozen,
                                      depth - 1, search, trace, level + 2)
        case Generic(hint, body, _):
            eigen = ObjVar(fresh_eigen(hint or "x"))
            inst = open_formula(body, eigen)
            if isinstance(inst, Hypothetical):
                yield from solve(lang, inst.conclusion, env + [inst.assumption],
                                 subst, frozen, depth, search, trace, level)
            else:
                yield from solve(lang, inst, env, subst, frozen, depth, search,
                                 trace, level)
        case Hypothetical(assum, concl):
            yield from solve(lang, concl, env + [assum], subst, frozen, depth,
                             search, trace, level)
        case _:
            raise TypeError(f"cannot solve goal {goal!r}")


def _solve_all(lang, goals, env, subst, frozen, depth, search, trace, level) -> Iterator[Subst]:
    if not goals:
        yield subst
        return
    head, rest = goals[0], goals[1:]
    for s in solve(lang, head, env, subst, frozen, depth, search, trace, level):
        yield from _solve_all(lang, rest, env, s, frozen, depth, search, trace, level)


def entails(lang: TypedLanguage, query: EntailmentQuery,
            depth_limit: int | None = None, trace: Trace | None = None) -> str:
    """'yes', 'no', or 'depth' (undecided: the search was cut short)."""
    if depth_limit is None:
        depth_limit = depth_limit_from_env()
    search = _Search()
    goal = Typing(query.subject, query.ty)
    for _ in solve(lang, goal, list(query.env), {}, query.frozen, depth_limit,
                   search, trace):
        return "yes"
    return "depth" if search.cut else "no"


def prove(lang: TypedLanguage, goal: Formula, depth_limit: int,
          env: list[Formula] | None = None,
          frozen: frozenset[str] = frozenset(),
          max_solutions: int = 1) -> tuple[list[Subst], bool]:
    """Up to max_solutions proofs of a goal, plus whether the depth limit cut
    any branch of the search."""
    search = _Search()
    out = []
    for s in solve(lang, goal, env or [], {}, frozen, depth_limit, search):
        out.append(s)
        if len(out) >= max_solutions:
            break
    return out, search.cut


# ---------------------------------------------------------------------------
# Symbolic environments

@dataclass
class SymbolicEnv:
    facts: tuple[Formula, ...]
    assigned: Term
    source: Term
    target: Term
    frozen: frozenset[str]


def _free_metavar_names(formulas, terms) -> frozenset[str]:
    acc: dict[str, MetaVar] = {}
    for f in formulas:
        formula_metavars(f, acc)
    for t in terms:
        from .ir import term_metavars
        term_metavars(t, acc)
    return frozenset(acc)


def build_symbolic_env(rule: Rule, lang: TypedLanguage) -> SymbolicEnv | Diagnostic | None:
    """Gamma_s for a step rule: the instantiated premises of the typing rule
    of the source's head, unfolded once more through the typing rule of a
    constructed first argument.  Returns None when the head has no typing
    rule (already reported elsewhere)."""
    source = rule.conclusion.lhs
    if not isinstance(source, Const):
        return None
    op = source.name
    trule = typing_rule_for(lang, op)
    if trule is None:
        return None
    fr = freshen_rule(trule)
    s = unify(fr.conclusion.subject, source, {}, frozenset())
    if s is None:
        return Diagnostic(
            "E300p", SEV_ERROR,
            f"rule {rule.name}: the source does not unify with the subject of "
            f"{trule.name}", rule.location)
    facts = [resolve_formula(p, s) for p in fr.premises]
    assigned = resolve(fr.conclusion.ty, s)

    positions = lang.signature.exp_positions(op)
    elim = source.args[positions[0]] if positions else None
    if isinstance(elim, Const):
        dropped_ty = None
        kept = []
        for f in facts:
            if dropped_ty is None and isinstance(f, Typing) and f.subject == elim:
                dropped_ty = f.ty
            else:
                kept.append(f)
        trule2 = typing_rule_for(lang, elim.name)
        if dropped_ty is not None and trule2 is not None:
            fr2 = freshen_rule(trule2)
            s2 = unify(fr2.conclusion.subject, elim, s, frozenset())
            if s2 is not None:
                s2 = unify(fr2.conclusion.ty, dropped_ty, s2, frozenset())
            if s2 is None:
                return Diagnostic(
                    "E300p", SEV_ERROR,
                    f"rule {rule.name}: the pattern '{pretty_term(elim)}' does "
                    f"not unify with the typing rule of '{elim.name}' at type "
                    f"'{pretty_term(dropped_ty)}'", rule.location)
            facts = [resolve_formula(f, s2) for f in kept]
            facts += [resolve_formula(p, s2) for p in fr2.premises]
            assigned = resolve(assigned, s2)
            s = s2

    src = resolve(source, s)
    tgt = resolve(rule.conclusion.rhs, s)
    frozen = _free_metavar_names(facts, [src, tgt, assigned])
    return SymbolicEnv(tuple(facts), assigned, src, tgt, frozen)


@dataclass
class PreservationEntry:
    rule_name: str
    env: tuple[Formula, ...]
    assigned: Term
    source: Term
    target: Term
    source_result: str
    target_result: str


def check_preservation_rule(rule: Rule, lang: TypedLanguage,
                            depth_limit: int | None = None,
                            trace: Trace | None = None
                            ) -> tuple[PreservationEntry | None, list[Diagnostic]]:
    built = build_symbolic_env(rule, lang)
    if built is None:
        return None, []
    if isinstance(built, Diagnostic):
        return None, [built]
    diags: list[Diagnostic] = []
    source = built.source
    target = built.target

    q = EntailmentQuery(built.facts, source, built.assigned, built.frozen)
    r_src = entails(lang, q, depth_limit, trace)
    if r_src == "no":
        diags.append(Diagnostic(
            "E300p", SEV_ERROR,
            f"rule {rule.name}: the source itself is not typeable at the "
            "assigned type under its own premises", rule.location))
    elif r_src == "depth":
        diags.append(Diagnostic(
            "E301", SEV_ERROR,
            f"rule {rule.name}: entailment for the source hit the depth limit "
            "(undecided, not certified)", rule.location))

    q = EntailmentQuery(built.facts, target, built.assigned, built.frozen)
    r_tgt = entails(lang, q, depth_limit, trace)
    if r_tgt == "no":
        diags.append(Diagnostic(
            "E300", SEV_ERROR,
            f"rule {rule.name}: the target is not typeable at the source's "
            f"type '{pretty_term(built.assigned)}', so the rule does not "
            "preserve typing", rule.location))
    elif r_tgt == "depth":
        diags.append(Diagnostic(
            "E301", SEV_ERROR,
            f"rule {rule.name}: entailment for the target hit the depth limit "
            "(undecided, not certified)", rule.location))

    entry = PreservationEntry(rule.name, built.facts, built.assigned,
                              source, target, r_src, r_tgt)
    return entry, diags


def check_preservation(lang: TypedLanguage, depth_limit: int | None = None,
                       trace: Trace | None = None
                       ) -> tuple[list[PreservationEntry], list[Diagnostic]]:
    entries = []
    diags: list[Diagnostic] = []
    for rule in lang.step_rules:
        entry, more = check_preservation_rule(rule, lang, depth_limit, trace)
        diags.extend(more)
        if entry is not None:
            entries.append(entry)
    return entries, diags
