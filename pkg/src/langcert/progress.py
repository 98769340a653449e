"""Progress discipline: context well-formedness, reduction-rule shapes,
exhaustiveness, and the error-context equation.

A certified language satisfies, for every operator:
  D1  every argument a rule requires to be a value (and the eliminated first
      argument) has an evaluation context;
  D2  the error contexts are the evaluation contexts minus the handler's
      first hole;
  D3  context dependencies are acyclic;
  D4  each eliminator eliminates every value of its type;
  D5  the handler eliminates the error and also steps on plain values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (
    Const,
    ContextSummary,
    Diagnostic,
    ElimRole,
    ErrorRole,
    DerivedRole,
    FLAVOR_VALUE,
    HandlerRole,
    MetaVar,
    RedBinding,
    RoleEnv,
    Rule,
    SEV_ERROR,
    SEV_WARNING,
    TypedLanguage,
    ValueRole,
)


def topo_order(holes: dict[int, frozenset[int]]) -> list[int] | None:
    """Order the holes so that each hole's dependencies come first; ties are
    broken by ascending index.  None when the dependency graph has a cycle."""
    pending = set(holes)
    order: list[int] = []
    placed: set[int] = set()
    while pending:
        ready = sorted(i for i in pending
                       if all(d in placed or d not in holes for d in holes[i]))
        if not ready:
            return None
        order.append(ready[0])
        placed.add(ready[0])
        pending.remove(ready[0])
    return order


def check_ctx_wellformed(ctx: ContextSummary) -> list[Diagnostic]:
    diags = []
    for op, holes in ctx.entries.items():
        for hole, deps in holes.items():
            for d in sorted(deps):
                if d not in holes:
                    diags.append(Diagnostic(
                        "E203", SEV_ERROR,
                        f"context of '{op}': hole {hole} depends on argument "
                        f"{d}, which is not itself a contextual hole"))
        if topo_order(holes) is None:
            diags.append(Diagnostic(
                "E201", SEV_ERROR,
                f"context of '{op}': the value dependencies are circular"))
    return diags


def _source_parts(lang: TypedLanguage, rule: Rule):
    src = rule.conclusion.lhs
    if not isinstance(src, Const):
        return None
    op = src.name
    if lang.signature.kind(op) is None or len(src.args) != len(lang.signature.kind(op).args):
        return None
    exp_args = [(i, src.args[abs_idx])
                for i, abs_idx in enumerate(lang.signature.exp_positions(op), start=1)]
    return op, exp_args


def _require_contextual(lang, rule, op, indices) -> list[Diagnostic]:
    holes = lang.ctx.get(op)
    diags = []
    for i in sorted(indices):
        if i not in holes:
            diags.append(Diagnostic(
                "E200", SEV_ERROR,
                f"rule {rule.name}: argument {i} of '{op}' must be contextual "
                f"(add '% context {op} ...' with a hole at position {i})",
                rule.location))
    return diags


def classify_reduction_rule(rule: Rule, lang: TypedLanguage,
                            roles: RoleEnv) -> tuple[RedBinding | None, list[Diagnostic]]:
    """Match one step rule against the reduction-rule shapes and produce its
    gamma_r binding."""
    diags: list[Diagnostic] = []
    parts = _source_parts(lang, rule)
    if parts is None:
        return None, [Diagnostic(
            "E206", SEV_ERROR,
            f"rule {rule.name}: a step rule's source must be an operator "
            "applied to arguments", rule.location)]
    op, exp_args = parts
    role = roles.gamma_t.get(op)
    if role is None or isinstance(role, (ValueRole, ErrorRole)):
        # missing typing rule (E105) or a constructor with step rules (E110):
        # both already reported by classification
        return None, []
    if rule.premises:
        return None, [Diagnostic(
            "E206", SEV_ERROR,
            f"rule {rule.name}: step rules take no premises", rule.location)]

    patterns = [(i, a) for i, a in exp_args if isinstance(a, Const)]
    value_vars = frozenset(i for i, a in exp_args
                           if isinstance(a, MetaVar) and a.flavor == FLAVOR_VALUE)
    for i, _ in patterns:
        if i != 1:
            diags.append(Diagnostic(
                "E204", SEV_ERROR,
                f"rule {rule.name}: only the first argument of '{op}' may be "
                "pattern-matched", rule.location))
            return None, diags

    if patterns:
        pat = patterns[0][1]
        if not all(isinstance(a, MetaVar) for a in pat.args):
            return None, diags  # nested pattern, E104 already reported
        op2 = pat.name
        d2 = roles.gamma_d.get(op2)
        if d2 is None:
            diags.append(Diagnostic(
                "E206", SEV_ERROR,
                f"rule {rule.name}: pattern head '{op2}' has no value or error "
                "definition", rule.location))
            return None, diags
        pat_values = frozenset(
            i for i, abs_idx in enumerate(lang.signature.exp_positions(op2), start=1)
            if abs_idx < len(pat.args)
            and isinstance(pat.args[abs_idx], MetaVar)
            and pat.args[abs_idx].flavor == FLAVOR_VALUE)
        if pat_values != d2.positions:
            want = "{" + ", ".join(map(str, sorted(d2.positions))) + "}"
            diags.append(Diagnostic(
                "E205", SEV_ERROR,
                f"rule {rule.name}: the pattern's value variables must sit "
                f"exactly at the strict positions {want} of '{op2}'",
                rule.location))
        expected_role = ElimRole if d2.kind == "value" else HandlerRole
        if not isinstance(role, expected_role):
            diags.append(Diagnostic(
                "E206", SEV_ERROR,
                f"rule {rule.name}: '{op}' is classified {type(role).__name__} "
                f"and cannot pattern-match '{op2}'", rule.location))
            return None, diags
        if d2.kind == "value":
            v2 = roles.gamma_t.get(op2)
            if not (isinstance(v2, ValueRole) and isinstance(role, ElimRole)
                    and v2.constructor == role.constructor):
                diags.append(Diagnostic(
                    "E206", SEV_ERROR,
                    f"rule {rule.name}: '{op}' eliminates type "
                    f"'{getattr(role, 'constructor', '?')}' but '{op2}' does "
                    "not construct it", rule.location))
                return None, diags
        diags.extend(_require_contextual(lang, rule, op, value_vars | {1}))
        return RedBinding("eliminates", op, op2, rule.name), diags

    if isinstance(role, HandlerRole):
        first = exp_args[0][1] if exp_args else None
        if not (isinstance(first, MetaVar) and first.flavor == FLAVOR_VALUE):
            diags.append(Diagnostic(
                "E207", SEV_ERROR,
                f"rule {rule.name}: the handler '{op}' may step on its first "
                "argument only once it is a value; an unrestricted rule could "
                "preempt the error", rule.location))
            # still record the binding so D5 reports only this mistake
            return RedBinding("plain", op, None, rule.name), diags
        diags.extend(_require_contextual(lang, rule, op, value_vars))
        return RedBinding("plain", op, None, rule.name), diags

    if isinstance(role, DerivedRole):
        diags.extend(_require_contextual(lang, rule, op, value_vars))
        return RedBinding("plain", op, None, rule.name), diags

    diags.append(Diagnostic(
        "E206", SEV_ERROR,
        f"rule {rule.name}: an eliminator's step rules must pattern-match the "
        "first argument", rule.location))
    return None, diags


def check_exhaustiveness(roles: RoleEnv) -> list[Diagnostic]:
    diags = []
    values = [(op, r) for op, r in roles.gamma_t.items() if isinstance(r, ValueRole)]
    error_op = next((op for op, r in roles.gamma_t.items() if isinstance(r, ErrorRole)), None)
    for op1, r1 in roles.gamma_t.items():
        if isinstance(r1, ElimRole):
            for op2, r2 in values:
                if r2.constructor == r1.constructor and roles.eliminates(op1, op2) is None:
                    diags.append(Diagnostic(
                        "E210", SEV_ERROR,
                        f"'{op1}' does not eliminate '{op2}': a value built "
                        f"with '{op2}' would be stuck under '{op1}'"))
        elif isinstance(r1, HandlerRole):
            missing = []
            if error_op is None or roles.eliminates(op1, error_op) is None:
                missing.append("a rule consuming the error")
            if roles.plain(op1) is None:
                missing.append("a rule stepping on a plain value")
            if missing:
                diags.append(Diagnostic(
                    "E211", SEV_ERROR,
                    f"error handler '{op1}' is missing " + " and ".join(missing)))
    return diags


def _summary_pairs(s: ContextSummary | None) -> set[tuple[str, int, frozenset[int]]]:
    if s is None:
        return set()
    return {(op, h, deps) for op, holes in s.entries.items() for h, deps in holes.items()}


def required_errctx(ctx: ContextSummary, roles: RoleEnv) -> ContextSummary | None:
    has_error = any(isinstance(r, ErrorRole) for r in roles.gamma_t.values())
    if not has_error:
        return None
    req = ctx.copy()
    for op, role in roles.gamma_t.items():
        if isinstance(role, HandlerRole):
            holes = req.entries.get(op)
            if holes and holes.get(1) == frozenset():
                del holes[1]
                if not holes:
                    del req.entries[op]
    return req


def check_error_contexts(lang: TypedLanguage, roles: RoleEnv,
                         errctx: ContextSummary | None) -> list[Diagnostic]:
    required = required_errctx(lang.ctx, roles)
    actual_pairs = _summary_pairs(errctx)
    required_pairs = _summary_pairs(required)
    if required is None and errctx is not None:
        return [Diagnostic(
            "E202", SEV_ERROR,
            "the language has no error operator, so it must not declare error "
            "contexts")]
    diags = []
    def fmt(p):
        op, h, deps = p
        d = "{" + ",".join(map(str, sorted(deps))) + "}"
        return f"{op}:(hole {h}, after {d})"
    extra = sorted(actual_pairs - required_pairs)
    missing = sorted(required_pairs - actual_pairs)
    if required is not None and errctx is None:
        diags.append(Diagnostic(
            "E202", SEV_ERROR,
            "the language has an error operator but declares no error "
            "contexts; expected " + (", ".join(map(fmt, missing)) or "none")))
        return diags
    for p in extra:
        diags.append(Diagnostic(
            "E202", SEV_ERROR,
            f"error context {fmt(p)} must not exist: errors may not propagate "
            "through it"))
    for p in missing:
        diags.append(Diagnostic(
            "E202", SEV_ERROR,
            f"error context {fmt(p)} is missing: errors would get stuck there"))
    return diags


def progress_dependent(lang: TypedLanguage, roles: RoleEnv, op: str) -> set[int]:
    """Argument indices some rule forces to be a value or error."""
    needed: set[int] = set()
    d = roles.gamma_d.get(op)
    if d is not None:
        needed |= d.positions
    for rule in lang.step_rules:
        parts = _source_parts(lang, rule)
        if parts is None or parts[0] != op:
            continue
        for i, a in parts[1]:
            if isinstance(a, Const):
                needed.add(i)
            elif isinstance(a, MetaVar) and a.flavor == FLAVOR_VALUE:
                needed.add(i)
    return needed


@dataclass
class ProgressResult:
    gamma_r: list[RedBinding] = field(default_factory=list)
    orders: dict[str, list[int]] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)


def run_progress(lang: TypedLanguage, roles: RoleEnv,
                 errctx: ContextSummary | None) -> ProgressResult:
    res = ProgressResult()
    res.diagnostics.extend(check_ctx_wellformed(lang.ctx))

    for rule in lang.step_rules:
        binding, diags = classify_reduction_rule(rule, lang, roles)
        res.diagnostics.extend(diags)
        if binding is not None:
            roles.gamma_r.append(binding)
    res.gamma_r = roles.gamma_r

    res.diagnostics.extend(check_exhaustiveness(roles))
    res.diagnostics.extend(check_error_contexts(lang, roles, errctx))

    for op, holes in lang.ctx.entries.items():
        order = topo_order(holes)
        if order is not None:
            res.orders[op] = order
        needed = progress_dependent(lang, roles, op)
        for hole in sorted(holes):
            if hole not in needed:
                res.diagnostics.append(Diagnostic(
                    "W001", SEV_WARNING,
                    f"context of '{op}': hole {hole} is not required for "
                    "progress by any rule"))
    return res
