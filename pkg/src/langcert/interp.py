"""Executable semantics for a language under certification.

The context summaries are compiled into ordinary step rules (one contextual
rule per hole, one error-propagation rule per error hole), after which the
language can be run: `successors` enumerates one-step reducts, `evaluate`
drives a term to a value/error/stuck/budget outcome, and `typeof_closed`
infers the type of a closed term with the same backchaining engine the
preservation checker uses.

On top of that sits a seeded, type-directed term generator and
`fuzz_soundness`, which hammers the two soundness claims empirically: no
well-typed term gets stuck, and types survive every step.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ir import (
    Bind,
    Const,
    ContextSummary,
    Error,
    Formula,
    Generic,
    Hypothetical,
    Kind,
    KindError,
    MetaApp,
    MetaVar,
    ObjVar,
    Rule,
    Step,
    TYP,
    Term,
    TypedLanguage,
    Typing,
    Value,
    close_term,
    kind_check_formula,
    open_formula,
    pretty_term,
    term_metavars,
    term_size,
)
from .preservation import depth_limit_from_env, prove
from .unify import (
    fresh_eigen,
    fresh_name,
    freshen_rule,
    resolve,
    resolve_formula,
    unify,
)


# ---------------------------------------------------------------------------
# Elaboration

def _fresh_args(lang: TypedLanguage, op: str) -> list[Term]:
    kind = lang.signature.kind(op)
    args: list[Term] = []
    e = t = 0
    for a in kind.args:
        if a.result == TYP:
            t += 1
            args.append(MetaVar(f"T{t}", "type"))
        else:
            e += 1
            args.append(MetaVar(f"E{e}", "expr"))
    return args


@dataclass
class ExecutableRuleSet:
    lang: TypedLanguage
    errctx: ContextSummary | None
    ctx_rules: tuple[Rule, ...]
    err_rules: tuple[Rule, ...]

    def all_step_rules(self) -> tuple[Rule, ...]:
        return self.lang.step_rules + self.ctx_rules + self.err_rules

    def rule_named(self, name: str) -> Rule | None:
        for r in self.all_step_rules() + self.lang.closure_rules:
            if r.name == name:
                return r
        return self.lang.rule_named(name)


def fallback_errctx(lang: TypedLanguage) -> ContextSummary | None:
    """Error contexts when the file declares none: the full context summary
    minus the first hole of every operator that pattern-matches an error."""
    error_ops = {r.conclusion.term.name for r in lang.error_rules
                 if isinstance(r.conclusion.term, Const)}
    if not error_ops:
        return None
    out = lang.ctx.copy()
    for rule in lang.step_rules:
        src = rule.conclusion.lhs
        if not isinstance(src, Const):
            continue
        positions = lang.signature.exp_positions(src.name) \
            if lang.signature.kind(src.name) else []
        if not positions or positions[0] >= len(src.args):
            continue
        first = src.args[positions[0]]
        if isinstance(first, Const) and first.name in error_ops:
            holes = out.entries.get(src.name)
            if holes and holes.get(1) == frozenset():
                del holes[1]
                if not holes:
                    del out.entries[src.name]
    return out


def elaborate(lang: TypedLanguage,
              errctx: ContextSummary | None | str = "auto") -> ExecutableRuleSet:
    if errctx == "auto":
        errctx = lang.errctx if lang.errctx_explicit else fallback_errctx(lang)
    ctx_rules = []
    for op, holes in lang.ctx.entries.items():
        for hole, deps in sorted(holes.items()):
            args = _fresh_args(lang, op)
            abs_i = lang.signature.exp_index_to_abs(op, hole)
            stepped = MetaVar(f"E{hole}'", "expr")
            tgt_args = list(args)
            tgt_args[abs_i] = stepped
            premises = tuple(
                Value(args[lang.signature.exp_index_to_abs(op, d)])
                for d in sorted(deps)
            ) + (Step(args[abs_i], stepped),)
            ctx_rules.append(Rule(
                f"ctx-{op}-{hole}", premises,
                Step(Const(op, tuple(args)), Const(op, tuple(tgt_args)))))
    err_rules = []
    if errctx is not None:
        for op, holes in errctx.entries.items():
            for hole, deps in sorted(holes.items()):
                args = _fresh_args(lang, op)
                abs_i = lang.signature.exp_index_to_abs(op, hole)
                premises = tuple(
                    Value(args[lang.signature.exp_index_to_abs(op, d)])
                    for d in sorted(deps)
                ) + (Error(args[abs_i]),)
                err_rules.append(Rule(
                    f"err-{op}-{hole}", premises,
                    Step(Const(op, tuple(args)), args[abs_i])))
    return ExecutableRuleSet(lang, errctx, tuple(ctx_rules), tuple(err_rules))


# ---------------------------------------------------------------------------
# Evaluation

def _matches_def(rs: ExecutableRuleSet, rules, t: Term) -> bool:
    if not isinstance(t, Const):
        return False
    for rule in rules:
        subj = rule.conclusion.term
        if not isinstance(subj, Const) or subj.name != t.name:
            continue
        if len(subj.args) != len(t.args):
            continue
        ok = True
        for pat_arg, arg in zip(subj.args, t.args):
            if isinstance(pat_arg, MetaVar) and pat_arg.flavor == "value":
                if not is_value(rs, arg):
                    ok = False
                    break
        if ok:
            return True
    return False


def is_value(rs: ExecutableRuleSet, t: Term) -> bool:
    return _matches_def(rs, rs.lang.value_rules, t)


def is_error(rs: ExecutableRuleSet, t: Term) -> bool:
    return _matches_def(rs, rs.lang.error_rules, t)


class _Unmatchable(Exception):
    """Step rule pattern outside the first-order fragment."""


def _match(pat: Term, t: Term, b: dict[str, Term]) -> bool:
    """Match a constructor-and-variables pattern against a closed term,
    binding by reference (no copying)."""
    match pat:
        case MetaVar(n, _):
            prev = b.get(n)
            if prev is None:
                b[n] = t
                return True
            return prev == t
        case Const(n, pargs):
            return (isinstance(t, Const) and t.name == n
                    and len(pargs) == len(t.args)
                    and all(_match(p, a, b) for p, a in zip(pargs, t.args)))
        case _:
            raise _Unmatchable


def _apply_step_rule(rs: ExecutableRuleSet, rule: Rule, t: Term) -> Term | None:
    try:
        b: dict[str, Term] = {}
        if not _match(rule.conclusion.lhs, t, b):
            return None
    except _Unmatchable:
        fr = freshen_rule(rule)
        s = unify(fr.conclusion.lhs, t, {}, frozenset())
        if s is None:
            return None
        if any(mv.flavor == "value"
               and not is_value(rs, resolve(MetaVar(n, mv.flavor), s))
               for n, mv in term_metavars(fr.conclusion.lhs).items()):
            return None
        tgt = resolve(fr.conclusion.rhs, s)
        return None if term_metavars(tgt) else tgt
    # A value-flavored pattern variable only matches an actual value.
    if any(mv.flavor == "value" and not is_value(rs, b[n])
           for n, mv in term_metavars(rule.conclusion.lhs).items()):
        return None
    if any(n not in b for n in term_metavars(rule.conclusion.rhs)):
        return None
    return resolve(rule.conclusion.rhs, b)


def successors(rs: ExecutableRuleSet, t: Term) -> list[Term]:
    """All one-step reducts of a closed term."""
    if not isinstance(t, Const):
        return []
    lang = rs.lang
    out: list[Term] = []
    seen: set[Term] = set()

    def push(x: Term):
        if x not in seen:
            seen.add(x)
            out.append(x)

    for rule in lang.step_rules:
        tgt = _apply_step_rule(rs, rule, t)
        if tgt is not None:
            push(tgt)

    kind = lang.signature.kind(t.name)
    if kind is None or len(t.args) != len(kind.args):
        return out
    for hole, deps in sorted(lang.ctx.get(t.name).items()):
        abs_i = lang.signature.exp_index_to_abs(t.name, hole)
        if all(is_value(rs, t.args[lang.signature.exp_index_to_abs(t.name, d)])
               for d in sorted(deps)):
            for stepped in successors(rs, t.args[abs_i]):
                push(Const(t.name, t.args[:abs_i] + (stepped,) + t.args[abs_i + 1:]))
    if rs.errctx is not None:
        for hole, deps in sorted(rs.errctx.get(t.name).items()):
            abs_i = lang.signature.exp_index_to_abs(t.name, hole)
            arg = t.args[abs_i]
            if is_error(rs, arg) and all(
                    is_value(rs, t.args[lang.signature.exp_index_to_abs(t.name, d)])
                    for d in sorted(deps)):
                push(arg)
    return out


SIZE_BUDGET = 4000


@dataclass
class EvalOutcome:
    kind: str  # 'value' | 'error' | 'stuck' | 'budget'
    final: Term
    trace: list[Term]
    steps: int
    value_had_step: bool = False


def evaluate(rs: ExecutableRuleSet, t: Term, max_steps: int = 1000,
             rng: random.Random | None = None) -> EvalOutcome:
    trace = [t]
    for steps in range(max_steps):
        if is_value(rs, t):
            had = bool(successors(rs, t))
            return EvalOutcome("value", t, trace, steps, had)
        if is_error(rs, t):
            return EvalOutcome("error", t, trace, steps)
        succ = successors(rs, t)
        if not succ:
            return EvalOutcome("stuck", t, trace, steps)
        t = succ[0] if rng is None else rng.choice(succ)
        if term_size(t) > SIZE_BUDGET:
            return EvalOutcome("budget", t, trace, steps + 1)
        trace.append(t)
    return EvalOutcome("budget", t, trace, max_steps)


# ---------------------------------------------------------------------------
# Type inference for closed terms

def typeof_closed(lang: TypedLanguage, t: Term, depth_limit: int | None = None,
                  ambiguity: bool = True) -> tuple[Term | None, str, bool]:
    """(type, status, ambiguous): status is 'yes', 'no' or 'depth'; the type
    is raw (it may contain unconstrained schematic variables).  Pass
    ambiguity=False to stop at the first proof."""
    limit = depth_limit if depth_limit is not None else depth_limit_from_env()
    x = MetaVar(fresh_name("Ty"))
    sols, cut = prove(lang, Typing(t, x), limit,
                      max_solutions=2 if ambiguity else 1)
    if not sols:
        return None, ("depth" if cut else "no"), False
    ty = resolve(x, sols[0])
    ambiguous = False
    if len(sols) > 1:
        other = resolve(x, sols[1])
        if unify(_rename_apart(ty), _rename_apart(other), {}, frozenset()) is None:
            ambiguous = True
    return ty, "yes", ambiguous


def _rename_apart(ty: Term) -> Term:
    s = {name: MetaVar(fresh_name(name), mv.flavor)
         for name, mv in term_metavars(ty).items()}
    return resolve(ty, s)


def ground_type(lang: TypedLanguage, ty: Term) -> Term | None:
    """Residual type variables instantiated at the first ground base type;
    None when the language declares no such type."""
    base = lang.signature.first_ground_typ()
    free = term_metavars(ty)
    if not free:
        return ty
    if base is None:
        return None
    return resolve(ty, {name: Const(base, ()) for name in free})


# ---------------------------------------------------------------------------
# Type-directed generation

class GenerationFailed(Exception):
    pass


@dataclass
class _GenRule:
    rule: Rule
    kinds: dict[str, Kind]


def _generation_rules(lang: TypedLanguage) -> list[_GenRule]:
    out = []
    for rule in lang.typing_rules:
        kinds: dict[str, Kind] = {}
        try:
            kind_check_formula(lang.signature, rule.conclusion, kinds)
            for p in rule.premises:
                kind_check_formula(lang.signature, p, kinds)
        except KindError:
            continue
        out.append(_GenRule(rule, kinds))
    return out


def random_ground_type(lang: TypedLanguage, rng: random.Random, depth: int,
                       tvars: tuple[str, ...] = ()) -> Term:
    sig = lang.signature
    bases = [n for n, k in sig.typ_constants.items() if k.is_base]
    ctors = [n for n, k in sig.typ_constants.items() if not k.is_base]
    choices = [("var", v) for v in tvars] + [("base", b) for b in bases]
    if depth > 1:
        choices += [("ctor", c) for c in ctors]
    if not choices:
        raise GenerationFailed("no type constants to draw from")
    tag, name = rng.choice(choices)
    if tag == "var":
        return ObjVar(name)
    if tag == "base":
        return Const(name, ())
    args = []
    for a in sig.typ_constants[name].args:
        if a.is_base:
            args.append(random_ground_type(lang, rng, depth - 1, tvars))
        else:
            v = fresh_eigen("a")
            inner = random_ground_type(lang, rng, depth - 1, tvars + (v,))
            args.append(Bind("a", close_term(inner, v)))
    return Const(name, tuple(args))


class Generator:
    """Top-down, goal-typed term generation.  Flex type goals are grounded by
    drawing a random closed type first, which keeps every unification inside
    the pattern fragment."""

    def __init__(self, lang: TypedLanguage, rng: random.Random):
        self.lang = lang
        self.rng = rng
        self.rules = _generation_rules(lang)

    def generate(self, goal: Term | None, depth: int) -> Term:
        if goal is None:
            goal = random_ground_type(self.lang, self.rng, 2, self._tvars())
        t, _ = self._gen(goal, depth, [])
        return t

    def _tvars(self) -> tuple[str, ...]:
        return ()

    def _gen(self, goal: Term, depth: int, genv: list[tuple[str, Term]]):
        if depth <= 0:
            raise GenerationFailed("depth exhausted")
        cands: list[tuple[str, object]] = []
        for name, ty in genv:
            if unify(ty, goal, {}, frozenset()) is not None:
                cands.append(("var", name))
        for gr in self.rules:
            if depth <= 1 and gr.rule.premises:
                continue
            cands.append(("rule", gr))
        self.rng.shuffle(cands)
        for tag, cand in cands:
            if tag == "var":
                return ObjVar(cand), {}
            try:
                return self._apply(cand, goal, depth, genv)
            except GenerationFailed:
                continue
        raise GenerationFailed(f"no derivation of {pretty_term(goal)}")

    def _apply(self, gr: _GenRule, goal: Term, depth: int,
               genv: list[tuple[str, Term]]):
        mapping: dict[str, str] = {}
        fr = freshen_rule(gr.rule, mapping)
        s = unify(fr.conclusion.ty, goal, {}, frozenset())
        if s is None:
            s = self._solve_flex_output(fr.conclusion.ty, goal)
            if s is None:
                raise GenerationFailed("output type does not match")
        # ground every type-kinded variable that is still free
        for orig, freshed in mapping.items():
            kind = gr.kinds.get(orig)
            if kind is None or kind.result != TYP:
                continue
            walked = resolve(MetaVar(freshed), s)
            if isinstance(walked, MetaVar):
                s[walked.name] = self._random_type_for_kind(kind)
        for p in fr.premises:
            s = self._premise(p, s, depth, genv)
        result = resolve(fr.conclusion.subject, s)
        if term_metavars(result):
            raise GenerationFailed("residual variables in generated term")
        return result, s

    def _random_type_for_kind(self, kind: Kind) -> Term:
        if kind.is_base:
            return random_ground_type(self.lang, self.rng, 2)
        hints = []
        vs = []
        for _ in kind.args:
            v = fresh_eigen("a")
            vs.append(v)
            hints.append("a")
        body = random_ground_type(self.lang, self.rng, 2, tuple(vs))
        for v in reversed(vs):
            body = Bind("a", close_term(body, v))
        return body

    def _premise(self, p: Formula, s, depth: int, genv):
        p = resolve_formula(p, s)
        match p:
            case Typing(subj, ty):
                ty = self._grounded(ty, s)
                walked = resolve(subj, s)
                if not isinstance(walked, MetaVar):
                    raise GenerationFailed("premise subject already constructed")
                t, s = self._gen_into(ty, depth - 1, genv, s)
                s2 = unify(walked, t, s, frozenset())
                if s2 is None:
                    raise GenerationFailed("could not bind premise subject")
                return s2
            case Generic(hint, body, vk):
                eigen = fresh_eigen(hint or ("a" if vk == TYP else "x"))
                inst = open_formula(p.body, ObjVar(eigen))
                if isinstance(inst, Hypothetical):
                    genv = genv + [(eigen, self._grounded(inst.assumption.ty, s))]
                    inst = inst.conclusion
                goal = self._grounded(inst.ty, s)
                t, s = self._gen_into(goal, depth - 1, genv, s)
                s2 = unify(resolve(inst.subject, s), t, s, frozenset())
                if s2 is None:
                    raise GenerationFailed("could not abstract generated body")
                return s2
            case _:
                raise GenerationFailed("unsupported premise during generation")

    def _gen_into(self, goal: Term, depth: int, genv, s):
        t, s_local = self._gen(resolve(goal, s), depth, genv)
        merged = dict(s)
        merged.update(s_local)
        return t, merged

    def _grounded(self, ty: Term, s) -> Term:
        ty = resolve(ty, s)
        free = term_metavars(ty)
        if not free:
            return ty
        extra = {name: random_ground_type(self.lang, self.rng, 2)
                 for name in free}
        s.update(extra)
        return resolve(ty, s)

    def _solve_flex_output(self, output: Term, goal: Term):
        """Output types like `(T T1)` with both variables free: pick T1, then
        abstract some occurrences of it out of the goal to build T."""
        spine = []
        head = output
        while isinstance(head, MetaApp):
            spine.append(head.arg)
            head = head.fn
        if not isinstance(head, MetaVar) or not spine:
            return None
        s: dict = {}
        spine.reverse()
        body = goal
        for arg in reversed(spine):
            if isinstance(arg, MetaVar):
                picked = random_ground_type(self.lang, self.rng, 2)
                s[arg.name] = picked
                arg = picked
            else:
                arg = resolve(arg, s)
            v = fresh_eigen("a")
            if self.rng.random() < 0.75:
                body = _replace(body, arg, ObjVar(v))
            body = Bind("a", close_term(body, v))
        s[head.name] = body
        return s


def _replace(t: Term, old: Term, new: Term) -> Term:
    if t == old:
        return new
    match t:
        case Const(name, args):
            return Const(name, tuple(_replace(a, old, new) for a in args))
        case Bind(hint, body):
            return Bind(hint, _replace(body, old, new))
        case MetaApp(fn, arg):
            return MetaApp(_replace(fn, old, new), _replace(arg, old, new))
        case _:
            return t


def generate_well_typed(lang: TypedLanguage, target_type: Term | None,
                        depth: int, seed: int) -> Term:
    rng = random.Random(seed)
    gen = Generator(lang, rng)
    last: Exception | None = None
    for _ in range(64):
        try:
            return gen.generate(target_type, depth)
        except GenerationFailed as e:
            last = e
    raise GenerationFailed(str(last))


# ---------------------------------------------------------------------------
# Fuzzing

def _term_depth(t: Term) -> int:
    match t:
        case Const(_, args):
            return 1 + max((_term_depth(a) for a in args), default=0)
        case Bind(_, body):
            return 1 + _term_depth(body)
        case MetaApp(fn, arg):
            return 1 + max(_term_depth(fn), _term_depth(arg))
        case _:
            return 1


@dataclass
class FuzzReport:
    language: str
    seed: int
    count: int
    depth: int
    max_steps: int
    generated: int = 0
    values: int = 0
    errors: int = 0
    budget_exhausted: int = 0
    generation_failures: int = 0
    stuck: list[dict] = field(default_factory=list)
    preservation_violations: list[dict] = field(default_factory=list)
    value_step_observations: int = 0

    def ok(self) -> bool:
        return not self.stuck and not self.preservation_violations

    def as_dict(self) -> dict:
        return {
            "language": self.language,
            "seed": self.seed,
            "count": self.count,
            "depth": self.depth,
            "max_steps": self.max_steps,
            "generated": self.generated,
            "values": self.values,
            "errors": self.errors,
            "budget_exhausted": self.budget_exhausted,
            "generation_failures": self.generation_failures,
            "stuck": self.stuck,
            "preservation_violations": self.preservation_violations,
            "value_step_observations": self.value_step_observations,
        }


def _trace_pretty(trace: list[Term], limit: int = 12) -> list[str]:
    shown = trace if len(trace) <= limit else trace[:limit - 1] + [trace[-1]]
    return [pretty_term(t) for t in shown]


def fuzz_soundness(lang: TypedLanguage, count: int = 200, depth: int = 6,
                   max_steps: int = 1000, seed: int = 42) -> FuzzReport:
    rs = elaborate(lang)
    report = FuzzReport(lang.name, seed, count, depth, max_steps)
    for i in range(count):
        rng = random.Random(f"{seed}:{i}")
        gen = Generator(lang, rng)
        term = None
        for _ in range(32):
            try:
                term = gen.generate(None, depth)
                break
            except GenerationFailed:
                continue
        if term is None:
            report.generation_failures += 1
            continue
        report.generated += 1
        t0, status, _ = typeof_closed(lang, term, ambiguity=False)
        if status != "yes":
            report.preservation_violations.append({
                "term": pretty_term(term),
                "reason": "generated term does not type-check",
            })
            continue
        _run_one(rs, lang, term, t0, max_steps, rng, report)
    return report


def _run_one(rs, lang, term, t0, max_steps, rng, report: FuzzReport):
    t = term
    trace = [t]
    # Divergence is fine (soundness permits it) but must not eat the run:
    # revisiting a term, or outgrowing the start term, counts as budget.
    size_cap = max(250, 2 * term_size(term))
    visited = {t}
    for _ in range(max_steps):
        if is_value(rs, t):
            report.values += 1
            if successors(rs, t):
                report.value_step_observations += 1
            return
        if is_error(rs, t):
            report.errors += 1
            return
        succ = successors(rs, t)
        if not succ:
            report.stuck.append({
                "term": pretty_term(term),
                "stuck_at": pretty_term(t),
                "trace": _trace_pretty(trace),
            })
            return
        to_check = succ if _term_depth(t) <= 3 else []
        chosen = rng.choice(succ)
        if chosen not in to_check:
            to_check = to_check + [chosen]
        for nxt in to_check:
            t1, status, _ = typeof_closed(lang, nxt, ambiguity=False)
            if status == "depth":
                continue  # undecided, never reported as a violation
            if t1 is None or unify(_rename_apart(t0), _rename_apart(t1),
                                   {}, frozenset()) is None:
                report.preservation_violations.append({
                    "term": pretty_term(term),
                    "before": pretty_term(t),
                    "after": pretty_term(nxt),
                    "type": pretty_term(t0),
                    "type_after": pretty_term(t1) if t1 is not None else None,
                })
                return
        t = chosen
        trace.append(t)
        if term_size(t) > size_cap or t in visited:
            report.budget_exhausted += 1
            return
        visited.add(t)
    report.budget_exhausted += 1
