"""Certificate rendering.

A certificate is a plain-text transcript of the evidence the checker
gathered: the theorem statements instantiated at the language's predicates, a
canonical-forms inventory per type constructor, one progress lemma outline
per operator (a case tree over its evaluation order, each leaf citing the
rule that discharges it), and the per-rule preservation table.

Output is deterministic: schematic variable names produced by freshening are
renamed back to their surface spelling on a first-appearance basis, so two
runs over the same file emit byte-identical certificates.
"""

from __future__ import annotations

from .ir import (
    Bind,
    Const,
    ContextSummary,
    DerivedRole,
    Diagnostic,
    ElimRole,
    ErrorRole,
    Formula,
    HandlerRole,
    MetaApp,
    MetaVar,
    Rule,
    RoleEnv,
    SEV_WARNING,
    Term,
    TypedLanguage,
    ValueRole,
    formula_map_terms,
    pretty_formula,
    pretty_term,
)
from .preservation import PreservationEntry
from .progress import ProgressResult


class _Renamer:
    """Strips the freshening suffix off schematic names, keeping distinct
    originals distinct (first appearance wins the bare spelling)."""

    def __init__(self):
        self.assigned: dict[str, str] = {}
        self.used: set[str] = set()

    def name(self, n: str) -> str:
        if n in self.assigned:
            return self.assigned[n]
        base = n.split("#", 1)[0] or "X"
        cand = base
        i = 2
        while cand in self.used:
            cand = f"{base}{i}"
            i += 1
        self.assigned[n] = cand
        self.used.add(cand)
        return cand

    def term(self, t: Term) -> Term:
        def go(x: Term) -> Term:
            match x:
                case MetaVar(name, flavor):
                    return MetaVar(self.name(name), flavor)
                case Const(name, args):
                    return Const(name, tuple(go(a) for a in args))
                case Bind(hint, body):
                    return Bind(hint, go(body))
                case MetaApp(fn, arg):
                    return MetaApp(go(fn), go(arg))
                case _:
                    return x
        return go(t)

    def formula(self, f: Formula) -> Formula:
        return formula_map_terms(f, self.term)


def canonical_forms(lang: TypedLanguage, roles: RoleEnv
                    ) -> tuple[dict[str, list[str]], list[Diagnostic]]:
    """Type constructor -> value operators that build it, plus W005 warnings
    for constructors no value inhabits."""
    table: dict[str, list[str]] = {c: [] for c in lang.signature.typ_constants}
    for op in lang.signature.exp_constants:
        role = roles.gamma_t.get(op)
        if isinstance(role, ValueRole) and role.constructor in table:
            table[role.constructor].append(op)
    diags = [
        Diagnostic("W005", SEV_WARNING,
                   f"no value operator constructs type '{c}'; "
                   "its value set is empty")
        for c, ops in table.items() if not ops
    ]
    return table, diags


def _def_rule_name(rules: tuple[Rule, ...], op: str) -> str | None:
    for r in rules:
        subj = r.conclusion.term
        if isinstance(subj, Const) and subj.name == op:
            return r.name
    return None


def _leaf_lines(lang: TypedLanguage, roles: RoleEnv, op: str,
                pad: str) -> list[str]:
    role = roles.gamma_t.get(op)
    match role:
        case ValueRole():
            name = _def_rule_name(lang.value_rules, op) or f"value-{op}"
            return [f"{pad}the term is a value ({name})"]
        case ErrorRole():
            name = _def_rule_name(lang.error_rules, op) or f"error-{op}"
            return [f"{pad}the term is an error ({name})"]
        case ElimRole(constructor=c):
            forms = [o for o, r in roles.gamma_t.items()
                     if isinstance(r, ValueRole) and r.constructor == c]
            lines = [f"{pad}argument 1 is a value of a type headed by '{c}'; "
                     f"canonical forms: {', '.join(forms) if forms else '(none)'}"]
            for form in forms:
                b = roles.eliminates(op, form)
                if b is not None:
                    lines.append(f"{pad}  case {form}: steps by {b.rule_name}")
                else:
                    lines.append(f"{pad}  case {form}: no rule applies (stuck)")
            if not forms:
                lines.append(f"{pad}  the value set is empty, so this case "
                             "is vacuous")
            return lines
        case HandlerRole():
            b = roles.plain(op)
            if b is not None:
                return [f"{pad}argument 1 is a plain value: steps by "
                        f"{b.rule_name}"]
            return [f"{pad}no unrestricted rule for the value case (stuck)"]
        case DerivedRole():
            b = roles.plain(op)
            if b is not None:
                return [f"{pad}steps by {b.rule_name}"]
            return [f"{pad}no reduction rule applies (stuck)"]
        case _:
            return [f"{pad}no typing rule classifies this operator"]


def progress_lemma(lang: TypedLanguage, roles: RoleEnv,
                   errctx: ContextSummary | None,
                   progress: ProgressResult, op: str) -> list[str]:
    lines = [f"== LEMMA progress {op} =="]
    role = roles.gamma_t.get(op)
    holes = progress.orders.get(op)
    if holes is None:
        holes = sorted(lang.ctx.get(op))
    indent = 0
    for h in holes:
        pad = "  " * indent
        lines.append(f"{pad}argument {h} steps: the term steps by ctx-{op}-{h}")
        if errctx is not None and h in errctx.get(op):
            lines.append(f"{pad}argument {h} is an error: it propagates by "
                         f"err-{op}-{h}")
        elif isinstance(role, HandlerRole) and h == 1:
            handled = [b for b in roles.gamma_r
                       if b.kind == "eliminates" and b.op == op]
            for b in handled:
                lines.append(f"{pad}argument 1 is the error '{b.target}': "
                             f"handled by {b.rule_name}")
        lines.append(f"{pad}argument {h} is a value:")
        indent += 1
    lines.extend(_leaf_lines(lang, roles, op, "  " * indent))
    return lines


_THEOREMS = [
    "progress: every closed well-typed term is a value, is an error, or",
    "  takes a step.",
    "preservation: if a closed term has a type and takes a step, the",
    "  result has the same type.",
    "soundness: no closed well-typed term reaches a stuck state.",
]


def cross_check(lang: TypedLanguage, roles: RoleEnv,
                errctx: ContextSummary | None,
                progress: ProgressResult,
                preservation: list[PreservationEntry]) -> list[str]:
    """Re-validate certificate evidence against the elaborated language.

    Walks the same structure the renderer walks and returns one line per
    problem found: a lemma leaf citing a rule that does not exist, a case
    with no discharging rule, an evaluation order that visits a hole before
    the siblings it waits on, or a reduction rule missing from the
    preservation table.  An empty list means the evidence is internally
    consistent."""
    problems: list[str] = []
    step_names = {r.name for r in lang.step_rules}
    value_names = {r.name for r in lang.value_rules}
    error_names = {r.name for r in lang.error_rules}

    def cite(op: str, name: str | None, pool: set[str], what: str):
        if name is None:
            problems.append(f"{op}: {what} leaf has no discharging rule")
        elif name not in pool:
            problems.append(f"{op}: {what} cites unknown rule '{name}'")

    for op in lang.signature.exp_constants:
        holes = lang.ctx.get(op)
        order = progress.orders.get(op)
        if order is None:
            order = sorted(holes)
        seen: set[int] = set()
        for h in order:
            if h not in holes:
                problems.append(f"{op}: order visits argument {h} which has "
                                "no context entry")
                continue
            late = holes[h] - seen - {h}
            if late:
                problems.append(
                    f"{op}: argument {h} is evaluated before its "
                    f"dependencies {sorted(late)}")
            seen.add(h)
        role = roles.gamma_t.get(op)
        match role:
            case ValueRole():
                cite(op, _def_rule_name(lang.value_rules, op), value_names,
                     "value")
            case ErrorRole():
                cite(op, _def_rule_name(lang.error_rules, op), error_names,
                     "error")
            case ElimRole(constructor=c):
                forms = [o for o, r in roles.gamma_t.items()
                         if isinstance(r, ValueRole) and r.constructor == c]
                for form in forms:
                    b = roles.eliminates(op, form)
                    cite(op, b.rule_name if b else None, step_names,
                         f"case {form}")
            case HandlerRole():
                b = roles.plain(op)
                cite(op, b.rule_name if b else None, step_names, "handler")
                for b in roles.gamma_r:
                    if b.kind == "eliminates" and b.op == op:
                        cite(op, b.rule_name, step_names, "handled error")
            case DerivedRole():
                b = roles.plain(op)
                cite(op, b.rule_name if b else None, step_names, "reduction")
            case _:
                problems.append(f"{op}: no typing rule classifies this "
                                "operator")

    covered = {e.rule_name for e in preservation}
    for name in sorted(step_names - covered):
        problems.append(f"preservation table misses rule '{name}'")
    for name in sorted(covered - step_names):
        problems.append(f"preservation table cites unknown rule '{name}'")
    return problems


def _preservation_lines(entries: list[PreservationEntry]) -> list[str]:
    lines = ["== PRESERVATION =="]
    for e in entries:
        r = _Renamer()
        env = [r.formula(f) for f in e.env]
        lines.append(f"rule {e.rule_name}")
        if env:
            lines.append("  env: " + "; ".join(pretty_formula(f) for f in env))
        else:
            lines.append("  env: (empty)")
        lines.append(f"  assigned type: {pretty_term(r.term(e.assigned))}")
        lines.append(f"  source {pretty_term(r.term(e.source))} : "
                     f"{e.source_result}")
        lines.append(f"  target {pretty_term(r.term(e.target))} : "
                     f"{e.target_result}")
    if not entries:
        lines.append("no reduction rules")
    return lines


def emit_certificate(lang: TypedLanguage | None, verdict: str,
                     diagnostics: list[Diagnostic],
                     roles: RoleEnv | None = None,
                     errctx: ContextSummary | None = None,
                     progress: ProgressResult | None = None,
                     preservation: list[PreservationEntry] | None = None,
                     name: str | None = None) -> str:
    lines = [f"language {lang.name if lang is not None else (name or '?')}"]
    if lang is not None and lang.source_path:
        lines.append(f"source {lang.source_path}")
    lines.append(f"verdict {verdict}")
    lines.append("")
    if verdict != "certified" or lang is None or roles is None \
            or progress is None or preservation is None:
        lines.append("== DIAGNOSTICS ==")
        if diagnostics:
            lines.extend(d.pretty() for d in diagnostics)
        else:
            lines.append("(none recorded)")
        lines.append("")
        return "\n".join(lines)

    lines.append("== THEOREM ==")
    lines.extend(_THEOREMS)
    lines.append("")

    table, _ = canonical_forms(lang, roles)
    for c in lang.signature.typ_constants:
        lines.append(f"== LEMMA canonical-forms {c} ==")
        ops = table.get(c, [])
        if ops:
            lines.append(f"values of type '{c}': " + ", ".join(ops))
        else:
            lines.append(f"no value operator constructs '{c}' (W005)")
        lines.append("")

    for op in lang.signature.exp_constants:
        lines.extend(progress_lemma(lang, roles, errctx, progress, op))
        lines.append("")

    lines.extend(_preservation_lines(preservation))
    lines.append("")
    warnings = [d for d in diagnostics if d.severity == SEV_WARNING]
    if warnings:
        lines.append("== WARNINGS ==")
        lines.extend(d.pretty() for d in warnings)
        lines.append("")
    return "\n".join(lines)
