import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
from oracles import stlc_type  # noqa: E402

from langcert.interp import (  # noqa: E402
    Generator,
    GenerationFailed,
    elaborate,
    evaluate,
    fuzz_soundness,
    is_error,
    is_value,
    successors,
    typeof_closed,
)
from langcert.ir import pretty_term  # noqa: E402
from langcert.parser import load_language, parse_expr  # noqa: E402


def load(name):
    lang, diags = load_language(f"corpus/sound/{name}.mod")
    assert lang is not None, diags
    return lang


def run(lang, text, max_steps=1000):
    rs = elaborate(lang)
    return evaluate(rs, parse_expr(lang, text), max_steps)


def test_beta_reduction_trace():
    lang = load("stlc_cbv")
    out = run(lang, "app (abs bool (x\\ ite x ff tt)) tt")
    assert out.kind == "value"
    assert pretty_term(out.final) == "ff"
    assert [pretty_term(t) for t in out.trace] == [
        "app (abs bool (x\\ ite x ff tt)) tt",
        "ite tt ff tt",
        "ff",
    ]


def test_arguments_evaluate_left_to_right():
    lang = load("stlc_cbv")
    out = run(lang, "app (app (abs bool (f\\ abs bool (x\\ x))) tt) "
                    "(ite tt ff ff)")
    assert out.kind == "value"
    # the function position must reduce before the argument position
    assert pretty_term(out.trace[1]).startswith("app (abs bool (x\\ x))")


def test_head_of_empty_list_raises():
    lang = load("lists")
    out = run(lang, "head nil")
    assert out.kind == "error"
    assert pretty_term(out.final) == "raise z"


def test_error_propagates_through_contexts():
    lang = load("lists")
    out = run(lang, "succ (head nil)")
    assert out.kind == "error"
    assert pretty_term(out.final) == "raise z"


def test_handler_catches_and_applies():
    lang = load("exceptions")
    out = run(lang, "try (pred z) (abs int (x\\ succ x))")
    assert out.kind == "value"
    assert pretty_term(out.final) == "succ z"
    assert "app (abs int (x\\ succ x)) z" in [
        pretty_term(t) for t in out.trace]


def test_handler_passes_values_through():
    lang = load("exceptions")
    out = run(lang, "try (succ z) (abs int (x\\ x))")
    assert out.kind == "value"
    assert pretty_term(out.final) == "succ z"


def test_fix_exhausts_the_step_budget():
    lang = load("fix")
    out = run(lang, "fix (abs (arrow bool bool) (f\\ f))", max_steps=50)
    assert out.kind == "budget"
    assert out.steps == 50


def test_value_and_error_predicates():
    lang = load("lists")
    rs = elaborate(lang)
    assert is_value(rs, parse_expr(lang, "cons z nil"))
    assert not is_value(rs, parse_expr(lang, "cons (head nil) nil"))
    assert is_error(rs, parse_expr(lang, "raise z"))
    assert not is_error(rs, parse_expr(lang, "raise (head nil)"))


def test_values_have_no_successors():
    lang = load("stlc_cbv")
    rs = elaborate(lang)
    assert successors(rs, parse_expr(lang, "tt")) == []


def test_typeof_closed_agrees_with_the_reference_checker():
    lang = load("stlc_cbv")
    for text in [
        "tt",
        "abs bool (x\\ x)",
        "app (abs bool (x\\ x)) tt",
        "ite tt (abs bool (x\\ x)) (abs bool (y\\ ff))",
        "let tt (x\\ ite x ff tt)",
    ]:
        t = parse_expr(lang, text)
        ty, status, _ = typeof_closed(lang, t)
        assert status == "yes", text
        assert ty == stlc_type(t, {}), text


def test_typeof_closed_rejects_ill_typed_terms():
    lang = load("stlc_cbv")
    t = parse_expr(lang, "app tt tt")
    _, status, _ = typeof_closed(lang, t)
    assert status == "no"
    assert stlc_type(t, {}) is None


def test_generated_terms_type_check_against_the_reference():
    lang = load("stlc_cbv")
    rng = random.Random(7)
    gen = Generator(lang, rng)
    produced = 0
    while produced < 50:
        try:
            t = gen.generate(None, 5)
        except GenerationFailed:
            continue
        produced += 1
        assert stlc_type(t, {}) is not None, pretty_term(t)


def test_fuzz_smoke_on_a_sound_language():
    lang = load("lists")
    rep = fuzz_soundness(lang, count=40, depth=5, max_steps=400, seed=3)
    assert rep.generated == 40
    assert rep.ok()


def test_fuzz_finds_the_dropped_nil_case():
    lang, _ = load_language("corpus/broken/head_partial.mod")
    rep = fuzz_soundness(lang, count=60, depth=5, max_steps=400, seed=3)
    assert rep.stuck
    assert any("head nil" in tr["stuck_at"] for tr in rep.stuck)


def test_fuzz_reports_are_json_friendly():
    import json
    lang = load("pairs")
    rep = fuzz_soundness(lang, count=10, depth=4, max_steps=200, seed=1)
    json.dumps(rep.as_dict())
