"""Parser and desugarer for the `.mod` surface syntax.

The surface language is a small lambda-Prolog subset:

  type <name> <kind>.                  constant declaration (kinds over exp,
                                       typ, ->, parentheses)
  <atom>.                              axiom clause
  <atom> :- <premise>, ... .           rule clause
  % context <op> <slots>.              evaluation-context directive
  % errorcontext <op> <slots>. | none. error-context directive

Atoms are built from the four judgment predicates typeOf/step/value/error.
Uppercase tokens are schematic variables; a leading V marks a value variable
(the rule implicitly demands valuehood).  Binders are written ``x\\ body``;
premises may be generic (``pi x\\ p``) or hypothetical (``(p => q)``).
Any other % line is a comment.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from .ir import (
    BASE_EXP,
    EXP,
    TYP,
    Bind,
    Const,
    ContextSummary,
    Diagnostic,
    Error,
    Formula,
    Generic,
    Hypothetical,
    Kind,
    KindError,
    Loc,
    MetaApp,
    MetaVar,
    ObjVar,
    Rule,
    SEV_ERROR,
    Signature,
    Step,
    StepStar,
    BVar,
    Term,
    Typing,
    TypedLanguage,
    Value,
    close_formula,
    close_term,
    formula_map_terms,
    formula_terms,
    kind_check_formula,
    kind_of,
    pretty_formula,
    pretty_rule,
    pretty_term,
    term_metavars,
    FLAVOR_EXPR,
    FLAVOR_TYPE,
    FLAVOR_VALUE,
)

PREDICATES = {"typeOf": 2, "step": 2, "value": 1, "error": 1}

_DIRECTIVE_RE = re.compile(r"^\s*%\s*(context|errorcontext)\b(.*)$")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


@dataclass
class Directive:
    which: str  # 'context' | 'errorcontext'
    op: str | None  # None encodes `errorcontext none`
    slots: list[str]
    loc: Loc


@dataclass
class RawClause:
    conclusion: Formula
    premises: list[Formula]
    loc: Loc


@dataclass
class SourceSpec:
    name: str
    path: str | None
    declarations: list[tuple[str, Kind, Loc]] = field(default_factory=list)
    clauses: list[RawClause] = field(default_factory=list)
    context_directives: list[Directive] = field(default_factory=list)
    errctx_directives: list[Directive] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Lexer

_SYMBOLS = {
    "(": "lparen",
    ")": "rparen",
    "\\": "lambda",
    ",": "comma",
    ".": "period",
}

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_']*")


def _lex(lines: list[str | None], file: str | None) -> list[Token]:
    toks: list[Token] = []
    for lineno, raw in enumerate(lines, start=1):
        if raw is None:  # directive or comment line, handled elsewhere
            continue
        i, n = 0, len(raw)
        while i < n:
            c = raw[i]
            if c in " \t\r\n":
                i += 1
                continue
            if c == "%":
                break  # trailing comment
            if raw.startswith("->", i):
                toks.append(Token("arrow", "->", lineno, i + 1))
                i += 2
                continue
            if raw.startswith("=>", i):
                toks.append(Token("implies", "=>", lineno, i + 1))
                i += 2
                continue
            if raw.startswith(":-", i):
                toks.append(Token("turnstile", ":-", lineno, i + 1))
                i += 2
                continue
            if c in _SYMBOLS:
                toks.append(Token(_SYMBOLS[c], c, lineno, i + 1))
                i += 1
                continue
            m = _IDENT_RE.match(raw, i)
            if m:
                toks.append(Token("ident", m.group(0), lineno, i + 1))
                i = m.end()
                continue
            raise ParseError(f"unexpected character {c!r}", lineno, i + 1)
    return toks


# ---------------------------------------------------------------------------
# Token-stream parser

_BOUNDARY = {"rparen", "comma", "period", "implies", "turnstile"}


class _Parser:
    def __init__(self, tokens: list[Token], file: str | None):
        self.toks = tokens
        self.pos = 0
        self.file = file
        self.scope: list[tuple[str, str]] = []  # (surface name, unique name)
        self.uniq = 0

    # -- token utilities

    def peek(self) -> Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            last = self.toks[-1] if self.toks else Token("", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col)
        self.pos += 1
        return t

    def expect(self, kind: str, what: str) -> Token:
        t = self.next()
        if t.kind != kind:
            raise ParseError(f"expected {what}, found {t.text!r}", t.line, t.col)
        return t

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        return t is not None and t.kind == kind and (text is None or t.text == text)

    def _fresh_bound(self, name: str) -> str:
        self.uniq += 1
        return f"{name}%{self.uniq}"

    # -- kinds

    def parse_kind(self) -> Kind:
        chain = [self._kind_atom()]
        while self.at("arrow"):
            self.next()
            chain.append(self._kind_atom())
        # right-associative arrows flatten into one argument list
        result = chain[-1]
        args = tuple(chain[:-1])
        k = Kind(result.result, args + result.args)
        for a in k.args:
            if any(not inner.is_base for inner in a.args):
                t = self.toks[self.pos - 1]
                raise ParseError("argument kinds may nest arrows only once", t.line, t.col)
        return k

    def _kind_atom(self) -> Kind:
        t = self.next()
        if t.kind == "lparen":
            k = self.parse_kind()
            self.expect("rparen", "')'")
            return k
        if t.kind == "ident" and t.text in (EXP, TYP):
            return Kind(t.text)
        raise ParseError(f"expected a kind, found {t.text!r}", t.line, t.col)

    # -- terms

    def parse_term(self) -> Term:
        parts = [self._primary()]
        while True:
            t = self.peek()
            if t is None or t.kind in _BOUNDARY:
                break
            parts.append(self._primary())
        head = parts[0]
        for arg in parts[1:]:
            if isinstance(head, Const):
                head = Const(head.name, head.args + (arg,))
            elif isinstance(head, Bind):
                from .ir import mk_app
                head = mk_app(head, arg)
            else:
                head = MetaApp(head, arg)
        return head

    def _primary(self) -> Term:
        t = self.next()
        if t.kind == "lparen":
            inner = self.parse_term()
            self.expect("rparen", "')'")
            return inner
        if t.kind != "ident":
            raise ParseError(f"expected a term, found {t.text!r}", t.line, t.col)
        # binder?
        if self.at("lambda"):
            self.next()
            uniq = self._fresh_bound(t.text)
            self.scope.append((t.text, uniq))
            try:
                body = self.parse_term()
            finally:
                self.scope.pop()
            return Bind(t.text, close_term(body, uniq))
        name = t.text
        if name[0].isupper():
            flavor = FLAVOR_VALUE if name.startswith("V") else FLAVOR_EXPR
            return MetaVar(name, flavor)
        for surface, uniq in reversed(self.scope):
            if surface == name:
                return ObjVar(uniq)
        return Const(name, ())

    # -- premises and atoms

    def parse_atom(self) -> Formula:
        t = self.expect("ident", "a judgment")
        if t.text not in PREDICATES:
            raise ParseError(f"unknown judgment {t.text!r}", t.line, t.col)
        args = [self._primary() for _ in range(PREDICATES[t.text])]
        match t.text:
            case "typeOf":
                return Typing(args[0], args[1])
            case "step":
                return Step(args[0], args[1])
            case "value":
                return Value(args[0])
            case "error":
                return Error(args[0])
        raise AssertionError

    def parse_premise(self) -> Formula:
        t = self.peek()
        if t is not None and t.kind == "ident" and t.text == "pi":
            self.next()
            binder = self.expect("ident", "a bound variable")
            self.expect("lambda", "'\\'")
            uniq = self._fresh_bound(binder.text)
            self.scope.append((binder.text, uniq))
            try:
                body = self.parse_premise()
            finally:
                self.scope.pop()
            return Generic(binder.text, close_formula(body, uniq))
        if t is not None and t.kind == "lparen":
            self.next()
            left = self.parse_premise()
            self.expect("implies", "'=>'")
            right = self.parse_premise()
            self.expect("rparen", "')'")
            return Hypothetical(left, right)
        return self.parse_atom()

    # -- statements

    def parse_spec(self, name: str) -> tuple[SourceSpec, list[Diagnostic]]:
        spec = SourceSpec(name=name, path=self.file)
        diags: list[Diagnostic] = []
        while self.peek() is not None:
            start = self.peek()
            try:
                if start.kind == "ident" and start.text == "type":
                    self.next()
                    nm = self.expect("ident", "a constant name")
                    kind = self.parse_kind()
                    self.expect("period", "'.'")
                    spec.declarations.append(
                        (nm.text, kind, Loc(self.file, nm.line, nm.col)))
                else:
                    concl = self.parse_atom()
                    premises: list[Formula] = []
                    if self.at("turnstile"):
                        self.next()
                        premises.append(self.parse_premise())
                        while self.at("comma"):
                            self.next()
                            premises.append(self.parse_premise())
                    self.expect("period", "'.'")
                    spec.clauses.append(RawClause(
                        concl, premises, Loc(self.file, start.line, start.col)))
            except ParseError as e:
                diags.append(Diagnostic(
                    "E001", SEV_ERROR, e.message, Loc(self.file, e.line, e.col)))
                # skip to the next statement
                while self.peek() is not None and not self.at("period"):
                    self.next()
                if self.at("period"):
                    self.next()
        return spec, diags


def _parse_directive(which: str, rest: str, loc: Loc) -> tuple[Directive | None, Diagnostic | None]:
    code = "E013" if which == "errorcontext" else "E001"
    body = rest.strip()
    if not body.endswith("."):
        return None, Diagnostic(code, SEV_ERROR,
                                f"'%{which}' directive must end with '.'", loc)
    parts = body[:-1].split()
    if which == "errorcontext" and parts == ["none"]:
        return Directive(which, None, [], loc), None
    if not parts:
        return None, Diagnostic(code, SEV_ERROR,
                                f"'%{which}' directive names an operator and its slots", loc)
    op, slots = parts[0], parts[1:]
    bad = [s for s in slots if s not in ("E", "v", "e")]
    if bad:
        return None, Diagnostic(code, SEV_ERROR,
                                f"directive slots must be E, v or e (got {' '.join(bad)})", loc)
    if slots.count("E") != 1:
        return None, Diagnostic(code, SEV_ERROR,
                                "a directive marks exactly one hole with E", loc)
    return Directive(which, op, slots, loc), None


def parse_source(text: str, name: str, path: str | None = None) -> tuple[SourceSpec, list[Diagnostic]]:
    """Parse a .mod file into a raw SourceSpec plus any E001-class diagnostics."""
    diags: list[Diagnostic] = []
    raw_lines = text.splitlines()
    lex_lines: list[str | None] = []
    ctx_dirs: list[Directive] = []
    err_dirs: list[Directive] = []
    for i, line in enumerate(raw_lines, start=1):
        m = _DIRECTIVE_RE.match(line)
        if m:
            d, diag = _parse_directive(m.group(1), m.group(2), Loc(path, i, 1))
            if diag:
                diags.append(diag)
            elif d.which == "context":
                ctx_dirs.append(d)
            else:
                err_dirs.append(d)
            lex_lines.append(None)
        elif line.lstrip().startswith("%"):
            lex_lines.append(None)
        else:
            lex_lines.append(line)
    try:
        tokens = _lex(lex_lines, path)
    except ParseError as e:
        diags.append(Diagnostic("E001", SEV_ERROR, e.message, Loc(path, e.line, e.col)))
        return SourceSpec(name=name, path=path), diags
    spec, more = _Parser(tokens, path).parse_spec(name)
    diags.extend(more)
    spec.context_directives = ctx_dirs
    spec.errctx_directives = err_dirs
    return spec, diags


def parse_file(path: str) -> tuple[SourceSpec, list[Diagnostic]]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_source(text, name, path)


# ---------------------------------------------------------------------------
# Desugaring

def _flavor_pass(rule_terms_formulas, meta_kinds, value_names):
    """Re-flavor every schematic variable from its inferred kind."""

    def on_term(t: Term) -> Term:
        match t:
            case MetaVar(name, _):
                if name in value_names:
                    return MetaVar(name, FLAVOR_VALUE)
                k = meta_kinds.get(name)
                if k is not None and k.result == TYP:
                    return MetaVar(name, FLAVOR_TYPE)
                return MetaVar(name, FLAVOR_EXPR)
            case Const(name, args):
                return Const(name, tuple(on_term(a) for a in args))
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
            case Hypothetical(a, c):
                return Hypothetical(on_formula(a), on_formula(c))
            case _:
                return formula_map_terms(f, on_term)

    return [on_formula(f) for f in rule_terms_formulas]


def _validate_premise_shape(p: Formula) -> str | None:
    """Returns an error message for unsupported premise shapes."""
    match p:
        case Generic(_, body):
            match body:
                case Typing():
                    return None
                case Hypothetical(Typing(subject, _), Typing()):
                    if subject == BVar(0):
                        return None
                    return "a hypothetical assumption must type the pi-bound variable"
                case _:
                    return "a pi premise must wrap a typing (optionally hypothetical)"
        case Hypothetical():
            return "'=>' premises are only supported under a pi binder"
        case Value(arg):
            if isinstance(arg, MetaVar):
                return None
            return "'value' premises must name a schematic variable"
        case Typing():
            return None
        case _:
            return "premises must be typing judgments (or 'value' on a variable)"


def _generic_kind(sig: Signature, f: Formula, meta_kinds: dict[str, Kind]) -> Formula:
    """Stamp pi premises with the kind of their bound variable."""
    if not isinstance(f, Generic):
        return f
    from .ir import KindSlot
    slot = KindSlot()
    try:
        kind_check_formula(sig, f.body, dict(meta_kinds), [slot])
    except KindError:
        pass
    vk = slot.kind.result if slot.kind is not None else EXP
    return Generic(f.hint, f.body, vk)


def _rule_name(concl: Formula, taken: set[str], lineno: int | None) -> str:
    base = None
    match concl:
        case Typing(Const(op, _), _):
            base = f"t-{op}"
        case Value(Const(op, _)):
            base = f"value-{op}"
        case Error(Const(op, _)):
            base = f"error-{op}"
        case Step(Const(op, args), _):
            pat = next((a for a in args if isinstance(a, Const)), None)
            base = f"r-{op}-{pat.name}" if pat is not None else f"r-{op}"
        case _:
            base = f"clause-{lineno}"
    if base not in taken:
        taken.add(base)
        return base
    i = 2
    while f"{base}-{i}" in taken:
        i += 1
    taken.add(f"{base}-{i}")
    return f"{base}-{i}"


STAR_REFL = Rule("star-refl", (), StepStar(MetaVar("E"), MetaVar("E")))
STAR_STEP = Rule(
    "star-step",
    (Step(MetaVar("E1"), MetaVar("E2")), StepStar(MetaVar("E2"), MetaVar("E3"))),
    StepStar(MetaVar("E1"), MetaVar("E3")),
)


def desugar(spec: SourceSpec) -> tuple[TypedLanguage | None, list[Diagnostic]]:
    """Elaborate a SourceSpec into a TypedLanguage.

    Input-level problems (kind errors, annotation ordering, malformed
    directives) are fatal: the function then returns None next to the
    diagnostics.
    """
    diags: list[Diagnostic] = []
    sig = Signature()
    for name, kind, loc in spec.declarations:
        if sig.kind(name) is not None:
            diags.append(Diagnostic("E010", SEV_ERROR,
                                    f"constant '{name}' is declared twice", loc))
            continue
        if kind.result == EXP:
            sig.exp_constants[name] = kind
        else:
            sig.typ_constants[name] = kind

    # annotation ordering: every typ-resulting argument precedes every
    # exp-resulting one
    for name, kind in sig.exp_constants.items():
        seen_exp = False
        for a in kind.args:
            if a.result == EXP:
                seen_exp = True
            elif seen_exp:
                loc = next(l for n, _, l in spec.declarations if n == name)
                diags.append(Diagnostic(
                    "E011", SEV_ERROR,
                    f"'{name}': type annotation arguments must precede expression arguments",
                    loc))
                break

    rules: list[Rule] = []
    taken: set[str] = set()
    for clause in spec.clauses:
        meta_kinds: dict[str, Kind] = {}
        try:
            kind_check_formula(sig, clause.conclusion, meta_kinds)
            for p in clause.premises:
                kind_check_formula(sig, p, meta_kinds)
        except KindError as e:
            diags.append(Diagnostic("E010", SEV_ERROR, e.message, clause.loc))
            continue

        shape_bad = False
        is_def = isinstance(clause.conclusion, (Value, Error))
        for p in clause.premises:
            # premises on value/error definitions are judged by the
            # classifier (they are never legal, and get E120 there)
            msg = None if is_def else _validate_premise_shape(p)
            if msg:
                diags.append(Diagnostic("E010", SEV_ERROR, msg, clause.loc))
                shape_bad = True
        if shape_bad:
            continue

        # explicit `value X` premises fold into the variable's flavor
        value_names = {n for n, mv in _clause_metavars(clause).items()
                       if mv.flavor == FLAVOR_VALUE}
        premises: list[Formula] = []
        for p in clause.premises:
            match p:
                case Value(MetaVar(n, _)):
                    value_names.add(n)
                case _:
                    premises.append(p)
        for n in value_names:
            k = meta_kinds.get(n)
            if k is not None and k != BASE_EXP:
                diags.append(Diagnostic(
                    "E010", SEV_ERROR,
                    f"value variable {n} must have kind exp, not {k}", clause.loc))

        premises = [_generic_kind(sig, p, meta_kinds) for p in premises]
        concl, *prems = _flavor_pass([clause.conclusion] + premises, meta_kinds, value_names)
        name = _rule_name(concl, taken, clause.loc.line if clause.loc else None)
        loc = Loc(clause.loc.file, clause.loc.line, clause.loc.col, name) if clause.loc else None
        rules.append(Rule(name, tuple(prems), concl, loc))

    ctx, errctx, errctx_explicit = _build_summaries(spec, sig, diags)

    if any(d.severity == SEV_ERROR for d in diags):
        return None, diags

    from .ir import partition_rules
    groups = partition_rules(rules)
    lang = TypedLanguage(
        name=spec.name,
        signature=sig,
        typing_rules=tuple(groups["typing"]),
        step_rules=tuple(groups["step"]),
        value_rules=tuple(groups["value"]),
        error_rules=tuple(groups["error"]),
        closure_rules=(STAR_REFL, STAR_STEP),
        ctx=ctx,
        errctx=errctx,
        errctx_explicit=errctx_explicit,
        source_path=spec.path,
    )
    return lang, diags


def _clause_metavars(clause: RawClause) -> dict[str, MetaVar]:
    acc: dict[str, MetaVar] = {}
    for f in [clause.conclusion] + clause.premises:
        for t in formula_terms(f):
            term_metavars(t, acc)
    return acc


def _summary_from_directives(dirs, sig: Signature, diags, dup_code: str) -> ContextSummary:
    summary = ContextSummary()
    for d in dirs:
        kind = sig.exp_constants.get(d.op)
        if kind is None:
            diags.append(Diagnostic("E010", SEV_ERROR,
                                    f"directive names unknown operator '{d.op}'", d.loc))
            continue
        exp_args = [a for a in kind.args if a.result == EXP]
        if len(d.slots) != len(exp_args):
            diags.append(Diagnostic(
                "E001" if dup_code == "E012" else "E013", SEV_ERROR,
                f"'{d.op}' has {len(exp_args)} expression argument(s) "
                f"but the directive lists {len(d.slots)} slot(s)", d.loc))
            continue
        hole = d.slots.index("E") + 1
        if not exp_args[hole - 1].is_base:
            diags.append(Diagnostic(
                "E010", SEV_ERROR,
                f"'{d.op}' argument {hole} is a binder; evaluation under binders "
                "is not expressible", d.loc))
            continue
        deps = frozenset(i + 1 for i, s in enumerate(d.slots) if s == "v")
        bad_dep = next((i for i in sorted(deps) if not exp_args[i - 1].is_base), None)
        if bad_dep is not None:
            diags.append(Diagnostic(
                "E010", SEV_ERROR,
                f"'{d.op}' argument {bad_dep} is a binder and cannot be a "
                "value dependency", d.loc))
            continue
        if not summary.add(d.op, hole, deps):
            diags.append(Diagnostic(
                dup_code, SEV_ERROR,
                f"duplicate directive for '{d.op}' hole {hole}", d.loc))
    return summary


def _build_summaries(spec: SourceSpec, sig: Signature, diags):
    ctx = _summary_from_directives(spec.context_directives, sig, diags, "E012")
    errctx = None
    errctx_explicit = bool(spec.errctx_directives)
    if errctx_explicit:
        nones = [d for d in spec.errctx_directives if d.op is None]
        entries = [d for d in spec.errctx_directives if d.op is not None]
        if nones and entries:
            diags.append(Diagnostic(
                "E013", SEV_ERROR,
                "'%errorcontext none.' cannot be mixed with errorcontext entries",
                nones[0].loc))
        elif nones:
            errctx = None
        else:
            errctx = _summary_from_directives(entries, sig, diags, "E013")
    return ctx, errctx, errctx_explicit


def load_errctx(lang: TypedLanguage, gamma_t) -> ContextSummary | None:
    """The error-context summary to certify against: the explicit directives
    when the file gives any, otherwise the candidate computed from the roles
    (no error operator -> none; error but no handler -> the full context
    summary; handler present -> the summary minus each handler's (1, {})
    entry)."""
    if lang.errctx_explicit:
        return lang.errctx
    from .ir import ErrorRole, HandlerRole
    has_error = any(isinstance(r, ErrorRole) for r in gamma_t.values())
    if not has_error:
        return None
    candidate = lang.ctx.copy()
    for op, role in gamma_t.items():
        if isinstance(role, HandlerRole):
            holes = candidate.entries.get(op)
            if holes and holes.get(1) == frozenset():
                del holes[1]
                if not holes:
                    del candidate.entries[op]
    return candidate


# ---------------------------------------------------------------------------
# Whole-spec pretty printer (inverse of parse_source up to naming)

def pretty_print(lang: TypedLanguage) -> str:
    out: list[str] = []
    for name, kind in lang.signature.typ_constants.items():
        out.append(f"type {name} {kind.pretty()}.")
    for name, kind in lang.signature.exp_constants.items():
        out.append(f"type {name} {kind.pretty()}.")
    out.append("")
    for op, holes in lang.ctx.entries.items():
        arity = lang.signature.exp_arity(op)
        for hole, deps in holes.items():
            slots = ["v" if i in deps else "e" for i in range(1, arity + 1)]
            slots[hole - 1] = "E"
            out.append(f"% context {op} {' '.join(slots)}.")
    if lang.errctx_explicit:
        if lang.errctx is None:
            out.append("% errorcontext none.")
        else:
            for op, holes in lang.errctx.entries.items():
                arity = lang.signature.exp_arity(op)
                for hole, deps in holes.items():
                    slots = ["v" if i in deps else "e" for i in range(1, arity + 1)]
                    slots[hole - 1] = "E"
                    out.append(f"% errorcontext {op} {' '.join(slots)}.")
    out.append("")
    for group in (lang.value_rules, lang.error_rules, lang.typing_rules, lang.step_rules):
        for r in group:
            out.append(pretty_rule(r))
        if group:
            out.append("")
    return "\n".join(out).rstrip() + "\n"


def load_language(path: str) -> tuple[TypedLanguage | None, list[Diagnostic]]:
    spec, diags = parse_file(path)
    if any(d.severity == SEV_ERROR for d in diags):
        return None, diags
    lang, more = desugar(spec)
    return lang, diags + more


def parse_expr(lang: TypedLanguage, text: str) -> Term:
    """Parse a closed surface term against a language's signature.  Raises
    ParseError when the text does not lex, parse, or kind-check."""
    toks = _lex([text], None)
    p = _Parser(toks, None)
    term = p.parse_term()
    tok = p.peek()
    if tok is not None and tok.kind != "period":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    if term_metavars(term):
        names = ", ".join(sorted(term_metavars(term)))
        raise ParseError(
            f"schematic variables ({names}) are not allowed in a closed term",
            1, 1)
    try:
        kind_of(lang.signature, term, BASE_EXP, {})
    except KindError as e:
        raise ParseError(e.message, 1, 1) from None
    return term
