"""Command line interface.

Subcommands:

  check    parse a language and run the full soundness analysis
  corpus   check every file in a manifest and compare verdicts/codes
  run      small-step evaluate a closed term
  typeof   infer the type of a closed term
  fuzz     cross-validate the analysis against the executable semantics
  certify  write a certificate file for a language

Exit codes: 0 for certified/all-match, 1 for rejected/mismatch, 2 for input
that could not be parsed or kind-checked.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import click

from .certify import canonical_forms, emit_certificate
from .classifier import classify
from .interp import (
    elaborate,
    evaluate,
    fuzz_soundness,
    ground_type,
    typeof_closed,
)
from .ir import (
    ContextSummary,
    Diagnostic,
    RoleEnv,
    TypedLanguage,
    error_codes,
    has_errors,
    pretty_term,
    term_metavars,
)
from .parser import ParseError, load_errctx, load_language, parse_expr
from .preservation import PreservationEntry, Trace, check_preservation
from .progress import ProgressResult, run_progress

VERDICT_CERTIFIED = "certified"
VERDICT_REJECTED = "rejected"
VERDICT_INVALID = "invalid-input"

_EXIT = {VERDICT_CERTIFIED: 0, VERDICT_REJECTED: 1, VERDICT_INVALID: 2}


@dataclass
class CheckReport:
    path: str
    name: str
    verdict: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    lang: TypedLanguage | None = None
    roles: RoleEnv | None = None
    errctx: ContextSummary | None = None
    progress: ProgressResult | None = None
    preservation: list[PreservationEntry] | None = None

    def as_dict(self) -> dict:
        return {
            "path": self.path,
            "language": self.name,
            "verdict": self.verdict,
            "codes": error_codes(self.diagnostics),
            "diagnostics": [d.as_dict() for d in self.diagnostics],
        }


def check_language(path: str, depth_limit: int | None = None,
                   trace: Trace | None = None) -> CheckReport:
    """The whole pipeline: parse, classify, progress, preservation."""
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        lang, diags = load_language(path)
    except OSError as e:
        return CheckReport(path, name, VERDICT_INVALID,
                           [Diagnostic("E001", "error", str(e))])
    if lang is None:
        return CheckReport(path, name, VERDICT_INVALID, diags)
    roles, more = classify(lang)
    diags += more
    errctx = load_errctx(lang, roles.gamma_t)
    progress = run_progress(lang, roles, errctx)
    diags += progress.diagnostics
    entries, pdiags = check_preservation(lang, depth_limit, trace)
    diags += pdiags
    _, wdiags = canonical_forms(lang, roles)
    diags += wdiags
    verdict = VERDICT_REJECTED if has_errors(diags) else VERDICT_CERTIFIED
    return CheckReport(path, lang.name, verdict, diags, lang, roles, errctx,
                       progress, entries)


def check_path(path: str) -> dict:
    """Module-level worker so the corpus command can fan out processes."""
    return check_language(path).as_dict()


def _emit(report_dict: dict, human_lines: list[str], as_json: bool):
    if as_json:
        click.echo(json.dumps(report_dict, indent=2))
        for line in human_lines:
            click.echo(line, err=True)
    else:
        for line in human_lines:
            click.echo(line)


def _human_report(rep: CheckReport) -> list[str]:
    lines = [d.pretty() for d in rep.diagnostics]
    lines.append(f"{rep.path}: {rep.verdict}")
    return lines


EXPLAIN = {
    "E001": "The file does not parse: a clause, declaration, or directive is "
            "malformed.  Everything up to the next period is skipped.",
    "E010": "A term does not kind-check against the declarations: an unknown "
            "constant, a constant applied to the wrong number or kinds of "
            "arguments, or a malformed declaration.",
    "E011": "Type annotations must come first: every 'typ' argument of an "
            "expression constructor has to precede its 'exp' arguments, "
            "because evaluation positions are numbered over the 'exp' "
            "arguments only.",
    "E012": "Two context directives name the same evaluation position of the "
            "same operator.",
    "E013": "An errorcontext directive is malformed or duplicated.  Write "
            "'% errorcontext <op> <slots>.' with exactly one E slot, or "
            "'% errorcontext none.'",
    "E100": "An operator has two typing rules or two value/error "
            "definitions.  Roles are per-operator; merge the rules or split "
            "the operator.",
    "E101": "Two different operators are defined as errors.  The analysis "
            "supports at most one error form per language.",
    "E102": "A typing rule fits no recognized shape: it is neither a "
            "value/error constructor's rule, an elimination rule (first "
            "evaluated argument typed at a constructed type), nor a derived "
            "form with a reduction rule.",
    "E104": "A reduction rule pattern-matches inside a pattern (for example "
            "'step (fst (pair (pair X Y) Z)) ...').  Only one constructor "
            "layer is allowed at an evaluated argument.",
    "E105": "An expression operator has no typing rule, so no well-typed "
            "term can contain it and nothing is known about its role.",
    "E110": "A reduction rule fires on an operator that is classified as a "
            "value or error constructor.  Values and errors must be final "
            "states.",
    "E111": "A typing rule never looks at one of the operator's expression "
            "arguments.  An untyped argument can hide an arbitrarily broken "
            "subterm, which breaks preservation the moment it is evaluated "
            "or substituted.",
    "E120": "A value/error definition must be a premise-free clause whose "
            "argument positions are distinct variables (value variables mark "
            "the strict positions).",
    "E200": "A position that must hold a value before a rule can fire has no "
            "context directive, so evaluation can never produce that value "
            "and well-typed terms get stuck.  Add '% context <op> ...' with "
            "an E slot at the named position.",
    "E201": "The value dependencies among an operator's evaluation positions "
            "form a cycle, so no argument can ever start evaluating.",
    "E202": "The declared error contexts disagree with the ones the rules "
            "require: errors must propagate out of every evaluation position "
            "except a handler's guarded first argument.",
    "E203": "A context directive marks an argument as a value dependency, "
            "but that argument is never itself evaluated (it has no hole "
            "entry), so the dependency can never be satisfied.",
    "E204": "A reduction rule pattern-matches an argument other than the "
            "first evaluated one.  Only the first evaluation position is "
            "driven to a canonical form by the context discipline.",
    "E205": "The value variables in a reduction rule's pattern argument "
            "disagree with the strict positions of that constructor's "
            "definition, so a match can see an unevaluated subterm.",
    "E206": "A reduction rule fits no recognized shape (premises on step "
            "rules, a non-constructor source, or a pattern that contradicts "
            "the operator's role).",
    "E207": "A handler's value rule must restrict its first argument to a "
            "value variable; an unrestricted variable would also capture "
            "errors and unevaluated terms.",
    "E210": "An eliminator has no reduction rule for one of the canonical "
            "forms of its argument type, so a well-typed term built from "
            "that form is stuck.",
    "E211": "A handler is missing one of its two required rules: one that "
            "consumes the error form and one that passes a plain value "
            "through.",
    "E212": "An error constructor's typing rule must assign a type variable "
            "that is not constrained by the premises, so the error can sit "
            "at any type during propagation.",
    "E300": "A reduction rule's target could not be typed at the type its "
            "source has: the rule does not preserve typing.",
    "E300p": "The symbolic environment for a reduction rule could not even "
             "type the rule's source (or could not be set up), so the rule "
             "can never fire on a well-typed term as written.",
    "E301": "The entailment search hit its depth limit before deciding.  "
            "Raise LANGCERT_DEPTH_LIMIT to retry with a deeper search; an "
            "undecided rule blocks certification.",
    "W001": "An evaluation position is declared, but no rule ever needs its "
            "value or error, so the work it forces is never observed.",
    "W002": "A closed term was given two incompatible types: typing is "
            "ambiguous for this language.",
    "W003": "A term that counts as a value can still take a step; results "
            "are not final states.",
    "W004": "A residual type variable could not be displayed at a ground "
            "type because the language declares no base type constant.",
    "W005": "No value operator constructs this type, so its value set is "
            "empty and canonical-forms reasoning about it is vacuous.",
}


@click.group()
def main():
    """Certify progress and preservation for small-step typed languages."""


@main.command()
@click.argument("file", required=False,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
@click.option("--explain", metavar="CODE",
              help="Explain a diagnostic code and exit.")
@click.option("--trace-entailment", is_flag=True,
              help="Dump the preservation proof search to stderr.")
def check(file, as_json, explain, trace_entailment):
    """Type-check a language against the soundness discipline."""
    if explain:
        code = explain.upper() if explain[0].lower() in "ew" else explain
        text = EXPLAIN.get(code) or EXPLAIN.get(explain)
        if text is None:
            click.echo(f"unknown diagnostic code {explain!r}", err=True)
            sys.exit(2)
        click.echo(f"{code}: {text}")
        sys.exit(0)
    if file is None:
        click.echo("error: missing FILE (or --explain CODE)", err=True)
        sys.exit(2)
    trace = Trace() if trace_entailment else None
    rep = check_language(file, trace=trace)
    if trace is not None:
        for line in trace.lines:
            click.echo(line, err=True)
    _emit(rep.as_dict(), _human_report(rep), as_json)
    sys.exit(_EXIT[rep.verdict])


@main.command()
@click.argument("dir", type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON map of relative path to expected verdict.")
@click.option("--jobs", default=1, show_default=True,
              help="Worker processes.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
def corpus(dir, manifest, jobs, as_json):
    """Check every language in a manifest and compare the outcomes.

    Manifest values are either a verdict string or an object with "verdict"
    and optionally "codes" (the exact set of error codes expected).
    """
    with open(manifest, encoding="utf-8") as fh:
        wanted = json.load(fh)
    paths = [os.path.join(dir, rel) for rel in wanted]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(check_path, paths))
    else:
        results = [check_path(p) for p in paths]
    rows = []
    all_ok = True
    for rel, got in zip(wanted, results):
        exp = wanted[rel]
        if isinstance(exp, str):
            exp = {"verdict": exp}
        ok = got["verdict"] == exp["verdict"]
        if ok and "codes" in exp:
            ok = sorted(exp["codes"]) == got["codes"]
        all_ok &= ok
        rows.append({"path": rel, "expected": exp, "actual": got["verdict"],
                     "codes": got["codes"], "ok": ok})
    human = []
    for row in rows:
        if row["ok"]:
            human.append(f"ok       {row['path']}: {row['actual']}"
                         + (f" {row['codes']}" if row["codes"] else ""))
        else:
            human.append(f"MISMATCH {row['path']}: expected "
                         f"{row['expected']}, got {row['actual']} "
                         f"{row['codes']}")
    human.append(f"{sum(r['ok'] for r in rows)}/{len(rows)} matched")
    _emit({"ok": all_ok, "results": rows}, human, as_json)
    sys.exit(0 if all_ok else 1)


def _load_for_expr(file: str) -> TypedLanguage:
    lang, diags = load_language(file)
    if lang is None:
        for d in diags:
            click.echo(d.pretty(), err=True)
        sys.exit(2)
    return lang


def _parse_or_die(lang: TypedLanguage, expr: str):
    try:
        return parse_expr(lang, expr)
    except ParseError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--expr", required=True, help="Closed term to evaluate.")
@click.option("--max-steps", default=1000, show_default=True)
def run(file, expr, max_steps):
    """Evaluate a closed term with the elaborated step relation."""
    lang = _load_for_expr(file)
    term = _parse_or_die(lang, expr)
    rs = elaborate(lang)
    out = evaluate(rs, term, max_steps=max_steps)
    for i, t in enumerate(out.trace):
        prefix = "   " if i == 0 else "-> "
        click.echo(f"{prefix}{pretty_term(t)}")
    if out.kind == "budget":
        click.echo(f"(gave up after {out.steps} steps)")
    else:
        click.echo(f"result: {out.kind}")
    if out.value_had_step:
        click.echo("W003 warning: the result is a value but can still step",
                   err=True)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--expr", required=True, help="Closed term to type.")
def typeof(file, expr):
    """Infer the type of a closed term."""
    lang = _load_for_expr(file)
    term = _parse_or_die(lang, expr)
    ty, status, ambiguous = typeof_closed(lang, term)
    if status == "depth":
        click.echo("undecided: the proof search hit its depth limit")
        sys.exit(1)
    if ty is None:
        click.echo("no type")
        sys.exit(1)
    if ambiguous:
        click.echo("W002 warning: the term also has an incompatible type",
                   err=True)
    shown = ty
    if term_metavars(ty):
        g = ground_type(lang, ty)
        if g is None:
            click.echo("W004 warning: residual type variables and no ground "
                       "base type to display them at", err=True)
        else:
            shown = g
    click.echo(pretty_term(shown))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--count", default=200, show_default=True)
@click.option("--depth", default=6, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--max-steps", default=1000, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
def fuzz(file, count, depth, seed, max_steps, as_json):
    """Run generated well-typed terms and watch for soundness violations."""
    lang = _load_for_expr(file)
    rep = fuzz_soundness(lang, count=count, depth=depth,
                         max_steps=max_steps, seed=seed)
    human = [
        f"language {rep.language}: {rep.generated}/{rep.count} terms "
        f"generated (seed {rep.seed})",
        f"  values: {rep.values}  errors: {rep.errors}  "
        f"budget exhausted: {rep.budget_exhausted}",
    ]
    if rep.value_step_observations:
        human.append(f"  W003: {rep.value_step_observations} values could "
                     "still step")
    for s in rep.stuck:
        human.append(f"  STUCK {s['term']} at {s['stuck_at']}")
    for v in rep.preservation_violations:
        human.append(f"  PRESERVATION {v}")
    human.append("ok" if rep.ok() else "soundness violations found")
    _emit(rep.as_dict(), human, as_json)
    sys.exit(0 if rep.ok() else 1)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False),
              help="Certificate path (default: <language>.cert.txt beside "
                   "the input).")
def certify(file, output):
    """Check a language and write the evidence to a certificate file."""
    rep = check_language(file)
    text = emit_certificate(rep.lang, rep.verdict, rep.diagnostics,
                            rep.roles, rep.errctx, rep.progress,
                            rep.preservation, name=rep.name)
    if output is None:
        output = os.path.join(os.path.dirname(os.path.abspath(file)),
                              f"{rep.name}.cert.txt")
    with open(output, "w", encoding="utf-8") as fh:
        fh.write(text)
    click.echo(f"wrote {output} ({rep.verdict})")
    sys.exit(_EXIT[rep.verdict])


if __name__ == "__main__":
    main()
