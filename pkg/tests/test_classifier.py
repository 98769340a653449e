from langcert.classifier import classify
from langcert.ir import DerivedRole, ElimRole, ErrorRole, HandlerRole, ValueRole
from langcert.parser import load_language


def roles_for(path):
    lang, diags = load_language(path)
    assert lang is not None, diags
    roles, more = classify(lang)
    return lang, roles, more


def codes(diags):
    return sorted({d.code for d in diags})


def test_stlc_roles():
    _, roles, diags = roles_for("corpus/sound/stlc_cbv.mod")
    assert not [d for d in diags if d.severity == "error"]
    t = roles.gamma_t
    assert isinstance(t["tt"], ValueRole) and t["tt"].constructor == "bool"
    assert isinstance(t["abs"], ValueRole) and t["abs"].constructor == "arrow"
    assert isinstance(t["app"], ElimRole) and t["app"].constructor == "arrow"
    assert isinstance(t["ite"], ElimRole) and t["ite"].constructor == "bool"
    assert isinstance(t["let"], DerivedRole)


def test_list_roles_include_errors_and_handlers():
    _, roles, _ = roles_for("corpus/sound/exceptions.mod")
    kinds = {op: type(r).__name__ for op, r in roles.gamma_t.items()}
    assert "ErrorRole" in kinds.values()
    assert "HandlerRole" in kinds.values()


def test_value_constructor_with_step_rule_is_an_error():
    _, _, diags = roles_for("corpus/broken/cons_steps.mod")
    assert "E110" in codes(diags)


def test_untyped_argument_in_typing_rule():
    _, _, diags = roles_for("corpus/broken/seq_untyped_arg.mod")
    assert "E111" in codes(diags)


def test_polymorphic_error_type_is_required():
    _, _, diags = roles_for("corpus/broken/raise_monomorphic.mod")
    assert "E212" in codes(diags)


def test_eliminations_recorded_per_canonical_form():
    from langcert.parser import load_errctx
    from langcert.progress import run_progress

    lang, roles, _ = roles_for("corpus/sound/lists.mod")
    run_progress(lang, roles, load_errctx(lang, roles.gamma_t))
    assert roles.eliminates("head", "nil") is not None
    assert roles.eliminates("head", "cons") is not None
    assert roles.eliminates("head", "tt") is None
