import pytest

from langcert.ir import Const, Generic, Hypothetical, MetaVar, Typing
from langcert.parser import ParseError, load_language, parse_expr


def write_lang(tmp_path, text):
    p = tmp_path / "lang.mod"
    p.write_text(text)
    return str(p)


def codes(diags):
    return sorted({d.code for d in diags})


def test_loads_the_stlc_fixture():
    lang, diags = load_language("corpus/sound/stlc_cbv.mod")
    assert lang is not None
    assert not codes(diags)
    sig = lang.signature
    assert set(sig.typ_constants) == {"bool", "arrow"}
    assert list(sig.exp_constants) == ["tt", "ff", "abs", "app", "ite", "let"]
    assert len(lang.typing_rules) == 6
    assert len(lang.step_rules) == 4
    assert len(lang.value_rules) == 3
    assert lang.ctx.get("app") == {1: frozenset(), 2: frozenset({1})}
    assert lang.ctx.get("ite") == {1: frozenset()}


def test_binder_premise_shape():
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    abs_rule = lang.rule_named("t-abs")
    assert abs_rule is not None
    (premise,) = abs_rule.premises
    assert isinstance(premise, Generic)
    assert isinstance(premise.body, Hypothetical)
    assert isinstance(premise.body.assumption, Typing)


def test_rules_get_stable_names():
    lang, _ = load_language("corpus/sound/lists.mod")
    names = [r.name for r in lang.step_rules]
    assert "r-head-nil" in names and "r-head-cons" in names


def test_unknown_head_predicate(tmp_path):
    path = write_lang(tmp_path, "type tt exp.\nfoo tt bool.\n")
    lang, diags = load_language(path)
    assert lang is None
    assert "E001" in codes(diags)


def test_undeclared_constant(tmp_path):
    path = write_lang(tmp_path, "type tt exp.\ntypeOf tt bool.\n")
    lang, diags = load_language(path)
    assert lang is None
    assert "E010" in codes(diags)


def test_duplicate_context_directive(tmp_path):
    path = write_lang(tmp_path, """
type bool typ.
type tt exp.
type ite exp -> exp -> exp -> exp.
typeOf tt bool.
typeOf (ite E1 E2 E3) T :- typeOf E1 bool, typeOf E2 T, typeOf E3 T.
value tt.
step (ite tt E2 E3) E2.
% context ite E e e.
% context ite E e e.
""")
    lang, diags = load_language(path)
    assert lang is None
    assert "E012" in codes(diags)


def test_parse_expr_round_trips():
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    t = parse_expr(lang, "app (abs bool (x\\ x)) tt")
    assert isinstance(t, Const) and t.name == "app"


def test_parse_expr_rejects_schematic_variables():
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    with pytest.raises(ParseError):
        parse_expr(lang, "app E tt")


def test_parse_expr_rejects_kind_errors():
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    with pytest.raises(ParseError):
        parse_expr(lang, "app tt")
    with pytest.raises(ParseError):
        parse_expr(lang, "abs tt (x\\ x)")
