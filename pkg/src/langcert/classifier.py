"""Operator classification.

Every operator gets at most one role, derived from its definitional rules
(value/error) and its typing rule checked against the step rules:

  Value(c, N)   constructor for type c, strict in argument positions N
  Error(N)      the error operator (at most one per language)
  Elim(c)       eliminator whose first argument is consumed at type c
  ErrHandler    operator with a step rule that pattern-matches the error
  Derived       operator whose step rules never pattern-match anything

The priority is value/error first (an operator with a value definition is a
constructor even if its arguments have constructed types), then eliminator,
then handler, then derived.
"""

from __future__ import annotations

from .ir import (
    Const,
    DefRole,
    Diagnostic,
    ElimRole,
    ErrorRole,
    DerivedRole,
    FLAVOR_VALUE,
    Formula,
    Generic,
    HandlerRole,
    Hypothetical,
    MetaApp,
    MetaVar,
    Role,
    RoleEnv,
    Rule,
    SEV_ERROR,
    Term,
    TypedLanguage,
    Typing,
    ValueRole,
    term_metavars,
)


def _subject_pattern(subject: Term) -> tuple[str, tuple[Term, ...]] | None:
    """The (op, args) of a conclusion subject, or None if not constructor-headed."""
    if isinstance(subject, Const):
        return subject.name, subject.args
    return None


def _distinct_metavars(args) -> bool:
    names = []
    for a in args:
        if not isinstance(a, MetaVar):
            return False
        names.append(a.name)
    return len(names) == len(set(names))


def _value_positions(lang: TypedLanguage, op: str, args) -> frozenset[int]:
    """1-based EXP argument indices holding value variables."""
    out = set()
    for i, abs_idx in enumerate(lang.signature.exp_positions(op), start=1):
        a = args[abs_idx]
        if isinstance(a, MetaVar) and a.flavor == FLAVOR_VALUE:
            out.add(i)
    return frozenset(out)


def classify_definitions(lang: TypedLanguage) -> tuple[dict[str, DefRole], list[Diagnostic]]:
    """Build gamma_d from the value/error definitions, checking the D1 side
    condition that every strict position is contextual."""
    gamma_d: dict[str, DefRole] = {}
    diags: list[Diagnostic] = []
    groups = [("value", lang.value_rules), ("error", lang.error_rules)]
    for kind, rules in groups:
        for rule in rules:
            head = _subject_pattern(rule.conclusion.term)
            if head is None or not _distinct_metavars(head[1]):
                diags.append(Diagnostic(
                    "E120", SEV_ERROR,
                    f"rule {rule.name}: a {kind} definition must be an operator "
                    "applied to distinct schematic variables", rule.location))
                continue
            op, args = head
            if rule.premises:
                diags.append(Diagnostic(
                    "E120", SEV_ERROR,
                    f"rule {rule.name}: {kind} definitions take no premises "
                    "(valuehood of arguments is written with V-variables)",
                    rule.location))
                continue
            if lang.signature.kind(op) is None:
                continue  # undeclared head already produced a kind error
            n = _value_positions(lang, op, args)
            if op in gamma_d:
                diags.append(Diagnostic(
                    "E100", SEV_ERROR,
                    f"operator '{op}' has more than one value/error definition",
                    rule.location))
                continue
            gamma_d[op] = DefRole(kind, n)
            holes = lang.ctx.get(op)
            for i in sorted(n):
                if i not in holes:
                    diags.append(Diagnostic(
                        "E200", SEV_ERROR,
                        f"definition {rule.name}: argument {i} of '{op}' must be "
                        f"contextual (add '% context {op} ...' with a hole at "
                        f"position {i})", rule.location))
    error_ops = [op for op, r in gamma_d.items() if r.kind == "error"]
    if len(error_ops) > 1:
        diags.append(Diagnostic(
            "E101", SEV_ERROR,
            "a language has at most one error operator, found: "
            + ", ".join(sorted(error_ops))))
    return gamma_d, diags


def _first_exp_arg(lang: TypedLanguage, op: str, args) -> Term | None:
    positions = lang.signature.exp_positions(op)
    if not positions:
        return None
    return args[positions[0]]


def _step_patterns(lang: TypedLanguage, op: str) -> list[tuple[Rule, int, Const]]:
    """(rule, 1-based EXP index, pattern) for every constructed argument of
    every step rule whose source is headed by op."""
    out = []
    for rule in lang.step_rules:
        head = _subject_pattern(rule.conclusion.lhs)
        if head is None or head[0] != op:
            continue
        for i, abs_idx in enumerate(lang.signature.exp_positions(op), start=1):
            a = head[1][abs_idx] if abs_idx < len(head[1]) else None
            if isinstance(a, Const):
                out.append((rule, i, a))
    return out


def _premise_assigned_type(rule: Rule, arg: MetaVar) -> Term | None:
    for p in rule.premises:
        match p:
            case Typing(MetaVar(name, _), ty) if name == arg.name:
                return ty
    return None


def _premise_types(rule: Rule) -> list[Term]:
    out = []
    def collect(f: Formula):
        match f:
            case Typing(_, ty):
                out.append(ty)
            case Generic(_, body):
                collect(body)
            case Hypothetical(a, c):
                collect(a)
                collect(c)
    for p in rule.premises:
        collect(p)
    return out


def classify_typing_rule(rule: Rule, lang: TypedLanguage,
                         gamma_d: dict[str, DefRole]) -> tuple[str | None, Role | None, list[Diagnostic]]:
    """Pick the role for the operator this typing rule describes.

    Returns (op, role, diagnostics); role can be None when no shape fits
    (E102) and both can be None when the subject is not even a pattern.
    """
    diags: list[Diagnostic] = []
    concl = rule.conclusion
    head = _subject_pattern(concl.subject)
    if head is None or not _distinct_metavars(head[1]):
        diags.append(Diagnostic(
            "E102", SEV_ERROR,
            f"rule {rule.name}: a typing rule's subject must be an operator "
            "applied to distinct schematic variables", rule.location))
        return None, None, diags
    op, args = head
    assigned = concl.ty

    d = gamma_d.get(op)
    if d is not None and d.kind == "value":
        if isinstance(assigned, Const):
            return op, ValueRole(assigned.name, d.positions), diags
        diags.append(Diagnostic(
            "E102", SEV_ERROR,
            f"rule {rule.name}: '{op}' is a value but its assigned type is not "
            "a constructed type", rule.location))
        return op, None, diags
    if d is not None and d.kind == "error":
        fresh = isinstance(assigned, MetaVar) and all(
            assigned.name not in term_metavars(ty) for ty in _premise_types(rule))
        if fresh:
            return op, ErrorRole(d.positions), diags
        diags.append(Diagnostic(
            "E212", SEV_ERROR,
            f"rule {rule.name}: the error operator must be typed at a fresh "
            "type variable (errors inhabit every type)", rule.location))
        # keep the role so downstream checks see the error operator
        return op, ErrorRole(d.positions), diags

    patterns = _step_patterns(lang, op)
    first = [(r, p) for r, i, p in patterns if i == 1]
    for r, pat in first:
        target_def = gamma_d.get(pat.name)
        if target_def is None:
            continue
        if target_def.kind == "value":
            farg = _first_exp_arg(lang, op, args)
            ty1 = _premise_assigned_type(rule, farg) if isinstance(farg, MetaVar) else None
            if isinstance(ty1, Const):
                return op, ElimRole(ty1.name), diags
        elif target_def.kind == "error":
            return op, HandlerRole(), diags

    has_step = any(
        (h := _subject_pattern(r.conclusion.lhs)) is not None and h[0] == op
        for r in lang.step_rules)
    if has_step and not patterns:
        return op, DerivedRole(), diags

    diags.append(Diagnostic(
        "E102", SEV_ERROR,
        f"rule {rule.name}: no role fits '{op}' (not a value/error definition, "
        "not an eliminator or handler, and it is not a derived operator)",
        rule.location))
    return op, None, diags


def _check_typing_coverage(rule: Rule, lang: TypedLanguage, op: str,
                           args) -> list[Diagnostic]:
    """Every expression argument of the subject needs a typing premise."""
    diags = []
    covered: set[str] = set()
    for p in rule.premises:
        match p:
            case Typing(MetaVar(name, _), _):
                covered.add(name)
            case Generic(_, body):
                c = body.conclusion if isinstance(body, Hypothetical) else body
                if isinstance(c, Typing):
                    spine = c.subject
                    while isinstance(spine, MetaApp):
                        spine = spine.fn
                    if isinstance(spine, MetaVar):
                        covered.add(spine.name)
    for i, abs_idx in enumerate(lang.signature.exp_positions(op), start=1):
        a = args[abs_idx]
        if isinstance(a, MetaVar) and a.name not in covered:
            diags.append(Diagnostic(
                "E111", SEV_ERROR,
                f"rule {rule.name}: argument {i} of '{op}' has no typing premise",
                rule.location))
    return diags


def _check_nested_patterns(lang: TypedLanguage) -> list[Diagnostic]:
    diags = []
    for rule in lang.step_rules:
        head = _subject_pattern(rule.conclusion.lhs)
        if head is None:
            continue
        for a in head[1]:
            if isinstance(a, Const) and not all(isinstance(x, MetaVar) for x in a.args):
                diags.append(Diagnostic(
                    "E104", SEV_ERROR,
                    f"rule {rule.name}: patterns nest at most one constructor "
                    "deep", rule.location))
    return diags


def classify(lang: TypedLanguage) -> tuple[RoleEnv, list[Diagnostic]]:
    """Assemble the full role environment (gamma_d and gamma_t; gamma_r is
    filled by the reduction-rule checks)."""
    gamma_d, diags = classify_definitions(lang)
    diags.extend(_check_nested_patterns(lang))

    roles = RoleEnv(gamma_d=gamma_d)
    seen: dict[str, Rule] = {}
    for rule in lang.typing_rules:
        op, role, more = classify_typing_rule(rule, lang, gamma_d)
        diags.extend(more)
        if op is None:
            continue
        if op in seen:
            diags.append(Diagnostic(
                "E100", SEV_ERROR,
                f"rule {rule.name}: operator '{op}' already has typing rule "
                f"{seen[op].name}", rule.location))
            continue
        seen[op] = rule
        if role is not None:
            roles.gamma_t[op] = role
        head = _subject_pattern(rule.conclusion.subject)
        if head is not None and _distinct_metavars(head[1]):
            diags.extend(_check_typing_coverage(rule, lang, op, head[1]))

    for op in lang.signature.exp_constants:
        if op not in seen:
            diags.append(Diagnostic(
                "E105", SEV_ERROR,
                f"operator '{op}' has no typing rule"))

    # a value or error operator must not have step rules of its own
    for rule in lang.step_rules:
        head = _subject_pattern(rule.conclusion.lhs)
        if head is None:
            continue
        role = roles.gamma_t.get(head[0])
        if isinstance(role, (ValueRole, ErrorRole)):
            what = "value" if isinstance(role, ValueRole) else "error"
            diags.append(Diagnostic(
                "E110", SEV_ERROR,
                f"rule {rule.name}: '{head[0]}' is a {what} operator and must "
                "not have step rules", rule.location))

    return roles, diags


def typing_rule_for(lang: TypedLanguage, op: str) -> Rule | None:
    for rule in lang.typing_rules:
        head = _subject_pattern(rule.conclusion.subject)
        if head is not None and head[0] == op:
            return rule
    return None
