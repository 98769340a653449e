"""Core representation for language specifications under certification.

A language is a signature (constants with second-order kinds over the base
kinds ``exp`` and ``typ``) plus inference rules over four judgment forms:
typing, step, value and error.  Binders are higher-order: a constant argument
may itself have an arrow kind like ``exp -> exp``, and rule terms may apply a
schematic variable to a bound object variable (``(R x)``).  Internally terms
are locally nameless: bound variables are de Bruijn indices (`BVar`), free
object-level variables are named `ObjVar`s, so structural equality is
alpha-equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

# ---------------------------------------------------------------------------
# Kinds

EXP = "exp"
TYP = "typ"


@dataclass(frozen=True)
class Kind:
    """An arrow kind ``k1 -> ... -> kn -> result``.

    Arguments may themselves be arrows over base kinds (second order), which
    is what binder arguments like ``(exp -> exp)`` use.  Deeper nesting is
    rejected by the parser.
    """

    result: str
    args: tuple["Kind", ...] = ()

    @property
    def is_base(self) -> bool:
        return not self.args

    def pretty(self) -> str:
        if self.is_base:
            return self.result
        parts = []
        for a in self.args:
            parts.append(a.pretty() if a.is_base else "(" + a.pretty() + ")")
        parts.append(self.result)
        return " -> ".join(parts)

    def __str__(self) -> str:
        return self.pretty()


BASE_EXP = Kind(EXP)
BASE_TYP = Kind(TYP)


# ---------------------------------------------------------------------------
# Terms

FLAVOR_EXPR = "expr"
FLAVOR_VALUE = "value"
FLAVOR_TYPE = "type"


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    """A declared constant applied to all of its arguments."""

    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class MetaVar(Term):
    """A schematic rule variable.  Flavor 'value' means the rule implicitly
    requires the instantiation to be a value."""

    name: str
    flavor: str = FLAVOR_EXPR


@dataclass(frozen=True)
class Bind(Term):
    """A binder; the body refers to the bound variable as BVar(0)."""

    hint: str
    body: Term


@dataclass(frozen=True)
class BVar(Term):
    index: int


@dataclass(frozen=True)
class ObjVar(Term):
    """A free object variable (an eigenvariable once introduced by a pi)."""

    name: str


@dataclass(frozen=True)
class MetaApp(Term):
    """Application of a schematic variable to a term, e.g. ``(R x)``."""

    fn: Term
    arg: Term


def shift_term(t: Term, by: int, cutoff: int = 0) -> Term:
    """Add `by` to every free de Bruijn index (those at or above `cutoff`)."""
    if by == 0:
        return t
    match t:
        case BVar(i):
            return BVar(i + by) if i >= cutoff else t
        case Const(name, args):
            return Const(name, tuple(shift_term(a, by, cutoff) for a in args))
        case Bind(hint, body):
            return Bind(hint, shift_term(body, by, cutoff + 1))
        case MetaApp(fn, arg):
            return MetaApp(shift_term(fn, by, cutoff), shift_term(arg, by, cutoff))
        case _:
            return t


def _has_free_bvar(t: Term, cutoff: int = 0) -> bool:
    match t:
        case BVar(i):
            return i >= cutoff
        case Const(_, args):
            return any(_has_free_bvar(a, cutoff) for a in args)
        case Bind(_, body):
            return _has_free_bvar(body, cutoff + 1)
        case MetaApp(fn, arg):
            return _has_free_bvar(fn, cutoff) or _has_free_bvar(arg, cutoff)
        case _:
            return False


def open_term(t: Term, repl: Term, depth: int = 0) -> Term:
    """Replace BVar(depth) by `repl` in `t`.  Free de Bruijn indices inside
    `repl` are lifted across every binder crossed on the way down, so they
    keep pointing at the binders they referred to at the call site."""
    liftable = _has_free_bvar(repl)

    def go(t: Term, depth: int, lift: int) -> Term:
        match t:
            case BVar(i):
                if i != depth:
                    return t
                return shift_term(repl, lift) if liftable else repl
            case Const(name, args):
                return Const(name, tuple(go(a, depth, lift) for a in args))
            case Bind(hint, body):
                return Bind(hint, go(body, depth + 1, lift + 1))
            case MetaApp(fn, arg):
                return mk_app(go(fn, depth, lift), go(arg, depth, lift))
            case _:
                return t

    return go(t, depth, 0)


def close_term(t: Term, name: str, depth: int = 0) -> Term:
    """Abstract the object variable `name` out of `t` as BVar(depth)."""
    match t:
        case ObjVar(n) if n == name:
            return BVar(depth)
        case Const(cname, args):
            return Const(cname, tuple(close_term(a, name, depth) for a in args))
        case Bind(hint, body):
            return Bind(hint, close_term(body, name, depth + 1))
        case MetaApp(fn, arg):
            return MetaApp(close_term(fn, name, depth), close_term(arg, name, depth))
        case _:
            return t


def subst_bind(b: Bind, arg: Term) -> Term:
    """Capture-avoiding substitution: instantiate a binder body."""
    return open_term(b.body, arg)


def mk_app(fn: Term, arg: Term) -> Term:
    """Build a meta-application, beta-reducing if the head is a binder."""
    if isinstance(fn, Bind):
        return subst_bind(fn, arg)
    return MetaApp(fn, arg)


def term_metavars(t: Term, acc: dict[str, MetaVar] | None = None) -> dict[str, MetaVar]:
    """All schematic variables of a term, keyed by name (insertion order)."""
    if acc is None:
        acc = {}
    match t:
        case MetaVar(name, _):
            acc.setdefault(name, t)
        case Const(_, args):
            for a in args:
                term_metavars(a, acc)
        case Bind(_, body):
            term_metavars(body, acc)
        case MetaApp(fn, arg):
            term_metavars(fn, acc)
            term_metavars(arg, acc)
    return acc


def term_objvars(t: Term, acc: set[str] | None = None) -> set[str]:
    if acc is None:
        acc = set()
    match t:
        case ObjVar(name):
            acc.add(name)
        case Const(_, args):
            for a in args:
                term_objvars(a, acc)
        case Bind(_, body):
            term_objvars(body, acc)
        case MetaApp(fn, arg):
            term_objvars(fn, acc)
            term_objvars(arg, acc)
    return acc


def term_size(t: Term) -> int:
    match t:
        case Const(_, args):
            return 1 + sum(term_size(a) for a in args)
        case Bind(_, body):
            return 1 + term_size(body)
        case MetaApp(fn, arg):
            return 1 + term_size(fn) + term_size(arg)
        case _:
            return 1


# ---------------------------------------------------------------------------
# Formulas

class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Typing(Formula):
    subject: Term
    ty: Term


@dataclass(frozen=True)
class Step(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class StepStar(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Value(Formula):
    term: Term


@dataclass(frozen=True)
class Error(Formula):
    term: Term


@dataclass(frozen=True)
class Generic(Formula):
    """``pi x\\ body``: the bound object variable is BVar(0) in the body's
    terms.  Only legal in premises.  var_kind records whether the bound
    variable ranges over expressions or types."""

    hint: str
    body: Formula
    var_kind: str = EXP


@dataclass(frozen=True)
class Hypothetical(Formula):
    """``assumption => conclusion``; in user input the assumption is a typing
    of the enclosing Generic's bound variable."""

    assumption: Formula
    conclusion: Formula


def formula_map_terms(f: Formula, fn) -> Formula:
    match f:
        case Typing(s, t):
            return Typing(fn(s), fn(t))
        case Step(a, b):
            return Step(fn(a), fn(b))
        case StepStar(a, b):
            return StepStar(fn(a), fn(b))
        case Value(t):
            return Value(fn(t))
        case Error(t):
            return Error(fn(t))
        case Generic(hint, body, vk):
            return Generic(hint, formula_map_terms(body, fn), vk)
        case Hypothetical(a, c):
            return Hypothetical(formula_map_terms(a, fn), formula_map_terms(c, fn))
    raise TypeError(f"not a formula: {f!r}")


def open_formula(f: Formula, repl: Term, depth: int = 0) -> Formula:
    match f:
        case Generic(hint, body, vk):
            return Generic(hint, open_formula(body, shift_term(repl, 1), depth + 1), vk)
        case Hypothetical(a, c):
            return Hypothetical(open_formula(a, repl, depth), open_formula(c, repl, depth))
        case _:
            return formula_map_terms(f, lambda t: open_term(t, repl, depth))


def close_formula(f: Formula, name: str, depth: int = 0) -> Formula:
    match f:
        case Generic(hint, body, vk):
            return Generic(hint, close_formula(body, name, depth + 1), vk)
        case Hypothetical(a, c):
            return Hypothetical(close_formula(a, name, depth), close_formula(c, name, depth))
        case _:
            return formula_map_terms(f, lambda t: close_term(t, name, depth))


def formula_metavars(f: Formula, acc: dict[str, MetaVar] | None = None) -> dict[str, MetaVar]:
    if acc is None:
        acc = {}
    formula_map_terms(f, lambda t: (term_metavars(t, acc), t)[1])
    return acc


def formula_terms(f: Formula) -> list[Term]:
    out: list[Term] = []
    formula_map_terms(f, lambda t: (out.append(t), t)[1])
    return out


# ---------------------------------------------------------------------------
# Rules and the four-way partition

@dataclass(frozen=True)
class Loc:
    file: str | None = None
    line: int | None = None
    col: int | None = None
    rule: str | None = None

    def pretty(self) -> str:
        if self.rule is not None and self.line is None:
            return f"rule {self.rule}"
        where = f"{self.file or '<input>'}:{self.line}"
        if self.col is not None:
            where += f":{self.col}"
        if self.rule is not None:
            where += f" (rule {self.rule})"
        return where


@dataclass(frozen=True)
class Rule:
    name: str
    premises: tuple[Formula, ...]
    conclusion: Formula
    location: Loc | None = None

    def with_parts(self, premises, conclusion) -> "Rule":
        return replace(self, premises=tuple(premises), conclusion=conclusion)


PRED_OF_FORMULA = {
    Typing: "typeOf",
    Step: "step",
    StepStar: "step*",
    Value: "value",
    Error: "error",
}


def conclusion_pred(rule: Rule) -> str:
    return PRED_OF_FORMULA[type(rule.conclusion)]


def partition_rules(rules) -> dict[str, list[Rule]]:
    """Split rules by conclusion judgment.  Returns the four user-facing
    groups; conclusions are never generic, hypothetical or step*."""
    out: dict[str, list[Rule]] = {"typing": [], "step": [], "value": [], "error": []}
    for r in rules:
        match r.conclusion:
            case Typing():
                out["typing"].append(r)
            case Step():
                out["step"].append(r)
            case Value():
                out["value"].append(r)
            case Error():
                out["error"].append(r)
            case _:
                raise ValueError(f"rule {r.name}: conclusion must be one of the four judgments")
    return out


# ---------------------------------------------------------------------------
# Signature

class KindError(Exception):
    """Raised by kind_of; `reason` is one of 'unknown-constant',
    'arity-mismatch', 'kind-mismatch', 'cannot-infer'."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason
        self.message = message


@dataclass
class Signature:
    """Declared constants.  Names are unique across both maps; for every EXP
    constant the TYP-resulting argument positions (annotations) precede the
    EXP-resulting ones."""

    exp_constants: dict[str, Kind] = field(default_factory=dict)
    typ_constants: dict[str, Kind] = field(default_factory=dict)

    def kind(self, name: str) -> Kind | None:
        k = self.exp_constants.get(name)
        if k is None:
            k = self.typ_constants.get(name)
        return k

    def exp_positions(self, name: str) -> list[int]:
        """Absolute argument indices (0-based) whose result kind is exp."""
        k = self.exp_constants[name]
        return [i for i, a in enumerate(k.args) if a.result == EXP]

    def annotation_positions(self, name: str) -> list[int]:
        k = self.exp_constants[name]
        return [i for i, a in enumerate(k.args) if a.result == TYP]

    def exp_arity(self, name: str) -> int:
        return len(self.exp_positions(name))

    def exp_index_to_abs(self, name: str, idx: int) -> int:
        """Map a 1-based EXP argument index to the absolute argument slot."""
        return self.exp_positions(name)[idx - 1]

    def first_ground_typ(self) -> str | None:
        for name, k in self.typ_constants.items():
            if k.is_base:
                return name
        return None


class KindSlot:
    """Mutable holder for a binder's kind, so pinning it in one sub-formula
    is visible to its siblings."""

    __slots__ = ("kind",)

    def __init__(self, kind: Kind | None = None):
        self.kind = kind


def kind_of(sig: Signature, term: Term, expected: Kind | None = None,
            meta_kinds: dict[str, Kind] | None = None,
            bound: list[KindSlot] | None = None,
            obj_kinds: dict[str, Kind] | None = None) -> Kind:
    """Kind-check a term against the signature.

    Schematic variables adopt the kind forced by their position; their kinds
    accumulate in `meta_kinds` and conflicting uses raise KindError.  `bound`
    is the stack of binder kind slots (innermost first); an unset slot is a
    binder whose kind gets pinned by its first constraining use.
    """
    if meta_kinds is None:
        meta_kinds = {}
    if obj_kinds is None:
        obj_kinds = {}

    def check(t: Term, exp_k: Kind | None, bnd: list[KindSlot]) -> Kind:
        match t:
            case Const(name, args):
                k = sig.kind(name)
                if k is None:
                    raise KindError("unknown-constant", f"unknown constant '{name}'")
                if len(args) != len(k.args):
                    raise KindError(
                        "arity-mismatch",
                        f"'{name}' expects {len(k.args)} argument(s), got {len(args)}")
                for a, ak in zip(args, k.args):
                    check(a, ak, bnd)
                got = Kind(k.result)
                if exp_k is not None and got != exp_k:
                    raise KindError(
                        "kind-mismatch",
                        f"'{name}' has kind {got} where {exp_k} is required")
                return got
            case MetaVar(name, flavor):
                known = meta_kinds.get(name)
                if exp_k is None and known is None:
                    raise KindError("cannot-infer", f"cannot infer kind of variable {name}")
                if known is None:
                    meta_kinds[name] = exp_k
                    known = exp_k
                elif exp_k is not None and known != exp_k:
                    raise KindError(
                        "kind-mismatch",
                        f"variable {name} used at kind {exp_k} but already has kind {known}")
                if flavor == FLAVOR_VALUE and known != BASE_EXP:
                    raise KindError(
                        "kind-mismatch",
                        f"value variable {name} must have kind exp, not {known}")
                return known
            case BVar(i):
                if i >= len(bnd):
                    raise KindError("kind-mismatch", "unbound de Bruijn index")
                slot = bnd[i]
                if slot.kind is None:
                    if exp_k is None:
                        raise KindError("cannot-infer", "cannot infer kind of bound variable")
                    slot.kind = exp_k
                if exp_k is not None and slot.kind != exp_k:
                    raise KindError(
                        "kind-mismatch",
                        f"bound variable has kind {slot.kind} where {exp_k} is required")
                return slot.kind
            case ObjVar(name):
                k = obj_kinds.get(name)
                if k is None:
                    if exp_k is None:
                        raise KindError("cannot-infer", f"cannot infer kind of {name}")
                    obj_kinds[name] = exp_k
                    k = exp_k
                if exp_k is not None and k != exp_k:
                    raise KindError(
                        "kind-mismatch",
                        f"{name} has kind {k} where {exp_k} is required")
                return k
            case Bind(_, body):
                if exp_k is None or not exp_k.args:
                    raise KindError(
                        "kind-mismatch",
                        "binder used where a base kind is required")
                inner = Kind(exp_k.result, exp_k.args[1:])
                check(body, inner, [KindSlot(exp_k.args[0])] + bnd)
                return exp_k
            case MetaApp(fn, arg):
                if isinstance(fn, MetaVar) and fn.name in meta_kinds:
                    fk = meta_kinds[fn.name]
                    if not fk.args:
                        raise KindError(
                            "kind-mismatch",
                            f"variable {fn.name} of base kind {fk} cannot be applied")
                    check(arg, fk.args[0], bnd)
                    got = Kind(fk.result, fk.args[1:])
                    if exp_k is not None and got != exp_k:
                        raise KindError(
                            "kind-mismatch",
                            f"({fn.name} _) has kind {got} where {exp_k} is required")
                    return got
                arg_k = check(arg, None, bnd)
                fn_expected = None
                if exp_k is not None:
                    fn_expected = Kind(exp_k.result, (arg_k,) + exp_k.args)
                got = check(fn, fn_expected, bnd)
                if not got.args:
                    raise KindError("kind-mismatch", "application head is not an abstraction")
                return Kind(got.result, got.args[1:])
        raise TypeError(f"not a term: {t!r}")

    return check(term, expected, list(bound or []))


def kind_check_formula(sig: Signature, f: Formula,
                       meta_kinds: dict[str, Kind],
                       bound: list[KindSlot] | None = None) -> None:
    """Kind-check a judgment; generic binders get their kind pinned by use."""
    bound = bound or []
    match f:
        case Typing(s, t):
            kind_of(sig, s, BASE_EXP, meta_kinds, bound)
            kind_of(sig, t, BASE_TYP, meta_kinds, bound)
        case Step(a, b) | StepStar(a, b):
            kind_of(sig, a, BASE_EXP, meta_kinds, bound)
            kind_of(sig, b, BASE_EXP, meta_kinds, bound)
        case Value(t) | Error(t):
            kind_of(sig, t, BASE_EXP, meta_kinds, bound)
        case Generic(_, body):
            kind_check_formula(sig, body, meta_kinds, [KindSlot()] + bound)
        case Hypothetical(a, c):
            kind_check_formula(sig, a, meta_kinds, bound)
            kind_check_formula(sig, c, meta_kinds, bound)
        case _:
            raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Context summaries

@dataclass
class ContextSummary:
    """For each operator, the evaluation positions: a map from 1-based EXP
    argument index (the hole) to the set of sibling EXP indices that must be
    values before the hole is evaluated.  Dependencies never contain the hole
    itself."""

    entries: dict[str, dict[int, frozenset[int]]] = field(default_factory=dict)

    def get(self, op: str) -> dict[int, frozenset[int]]:
        return self.entries.get(op, {})

    def ops(self):
        return self.entries.keys()

    def add(self, op: str, hole: int, deps: frozenset[int]) -> bool:
        """Record an entry; returns False if (op, hole) already present."""
        holes = self.entries.setdefault(op, {})
        if hole in holes:
            return False
        holes[hole] = deps
        return True

    def copy(self) -> "ContextSummary":
        return ContextSummary({op: dict(h) for op, h in self.entries.items()})

    def as_pairs(self, op: str) -> set[tuple[int, frozenset[int]]]:
        return {(h, d) for h, d in self.get(op).items()}


# ---------------------------------------------------------------------------
# The language object produced by desugaring

@dataclass
class TypedLanguage:
    name: str
    signature: Signature
    typing_rules: tuple[Rule, ...]
    step_rules: tuple[Rule, ...]
    value_rules: tuple[Rule, ...]
    error_rules: tuple[Rule, ...]
    closure_rules: tuple[Rule, ...]  # generated step* reflexivity/transitivity
    ctx: ContextSummary
    errctx: ContextSummary | None
    errctx_explicit: bool = False
    source_path: str | None = None

    def all_user_rules(self) -> tuple[Rule, ...]:
        return self.typing_rules + self.step_rules + self.value_rules + self.error_rules

    def rule_named(self, name: str) -> Rule | None:
        for r in self.all_user_rules() + self.closure_rules:
            if r.name == name:
                return r
        return None


# ---------------------------------------------------------------------------
# Classification roles

@dataclass(frozen=True)
class DefRole:
    """gamma_d entry: how an operator's definitional rule casts it."""

    kind: str  # 'value' | 'error'
    positions: frozenset[int]  # 1-based EXP indices required to be values


@dataclass(frozen=True)
class ValueRole:
    constructor: str
    positions: frozenset[int]


@dataclass(frozen=True)
class ErrorRole:
    positions: frozenset[int]


@dataclass(frozen=True)
class ElimRole:
    constructor: str


@dataclass(frozen=True)
class DerivedRole:
    pass


@dataclass(frozen=True)
class HandlerRole:
    pass


Role = ValueRole | ErrorRole | ElimRole | DerivedRole | HandlerRole


@dataclass(frozen=True)
class RedBinding:
    """gamma_r entry: what a reduction rule contributes.  kind is
    'eliminates' (op consumes a value/error form of `target`) or 'plain'."""

    kind: str
    op: str
    target: str | None
    rule_name: str


@dataclass
class RoleEnv:
    gamma_d: dict[str, DefRole] = field(default_factory=dict)
    gamma_t: dict[str, Role] = field(default_factory=dict)
    gamma_r: list[RedBinding] = field(default_factory=list)

    def eliminates(self, op: str, target: str) -> RedBinding | None:
        for b in self.gamma_r:
            if b.kind == "eliminates" and b.op == op and b.target == target:
                return b
        return None

    def plain(self, op: str) -> RedBinding | None:
        for b in self.gamma_r:
            if b.kind == "plain" and b.op == op:
                return b
        return None


# ---------------------------------------------------------------------------
# Diagnostics

SEV_ERROR = "error"
SEV_WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str
    message: str
    location: Loc | None = None
    related: tuple[str, ...] = ()

    def pretty(self) -> str:
        where = f" at {self.location.pretty()}" if self.location else ""
        return f"{self.code} [{self.severity}]{where}: {self.message}"

    def as_dict(self) -> dict:
        d = {"code": self.code, "severity": self.severity, "message": self.message}
        if self.location is not None:
            loc = {}
            for k in ("file", "line", "col", "rule"):
                v = getattr(self.location, k)
                if v is not None:
                    loc[k] = v
            d["location"] = loc
        if self.related:
            d["related"] = list(self.related)
        return d


def has_errors(diags) -> bool:
    return any(d.severity == SEV_ERROR for d in diags)


def error_codes(diags) -> list[str]:
    return sorted({d.code for d in diags if d.severity == SEV_ERROR})


# ---------------------------------------------------------------------------
# Pretty-printing back to surface syntax

RESERVED_SURFACE = {"pi", "type", "typeOf", "step", "value", "error"}


def _name_supply(hint: str, taken: set[str]) -> str:
    base = hint if hint and hint[0].islower() else "x"
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def pretty_term(t: Term, names: tuple[str, ...] = (), atom: bool = False) -> str:
    """Render a term in the surface syntax.  `names` is the stack of binder
    names for de Bruijn lookup; `atom` asks for a parenthesized form when the
    term is an application."""
    match t:
        case Const(name, args):
            if not args:
                return name
            inner = " ".join([name] + [pretty_term(a, names, atom=True) for a in args])
            return f"({inner})" if atom else inner
        case MetaVar(name, _):
            return name
        case BVar(i):
            return names[i] if i < len(names) else f"#{i}"
        case ObjVar(name):
            return name
        case Bind(hint, body):
            taken = set(names) | RESERVED_SURFACE
            n = _name_supply(hint, taken)
            inner = f"{n}\\ {pretty_term(body, (n,) + names)}"
            return f"({inner})" if atom else inner
        case MetaApp(fn, arg):
            inner = f"{pretty_term(fn, names, atom=True)} {pretty_term(arg, names, atom=True)}"
            return f"({inner})" if atom else inner
    raise TypeError(f"not a term: {t!r}")


def pretty_formula(f: Formula, names: tuple[str, ...] = ()) -> str:
    match f:
        case Typing(s, t):
            return f"typeOf {pretty_term(s, names, atom=True)} {pretty_term(t, names, atom=True)}"
        case Step(a, b):
            return f"step {pretty_term(a, names, atom=True)} {pretty_term(b, names, atom=True)}"
        case StepStar(a, b):
            return f"step* {pretty_term(a, names, atom=True)} {pretty_term(b, names, atom=True)}"
        case Value(t):
            return f"value {pretty_term(t, names, atom=True)}"
        case Error(t):
            return f"error {pretty_term(t, names, atom=True)}"
        case Generic(hint, body):
            taken = set(names) | RESERVED_SURFACE
            n = _name_supply(hint, taken)
            return f"pi {n}\\ {pretty_formula(body, (n,) + names)}"
        case Hypothetical(a, c):
            return f"({pretty_formula(a, names)} => {pretty_formula(c, names)})"
    raise TypeError(f"not a formula: {f!r}")


def pretty_rule(r: Rule) -> str:
    """Render a rule as a clause.  Value-flavored variables whose names do not
    carry the V prefix are re-expressed as explicit `value` premises so the
    output reparses to the same desugared rule."""
    extra: list[str] = []
    seen: set[str] = set()

    def scan(t: Term):
        for name, mv in term_metavars(t).items():
            if mv.flavor == FLAVOR_VALUE and not name.startswith("V") and name not in seen:
                seen.add(name)
                extra.append(f"value {name}")

    for f in (r.conclusion, *r.premises):
        for t in formula_terms(f):
            scan(t)
    parts = [pretty_formula(p) for p in r.premises] + extra
    head = pretty_formula(r.conclusion)
    if parts:
        return f"{head} :- {', '.join(parts)}."
    return f"{head}."
