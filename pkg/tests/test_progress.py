"""The progress side of the pipeline: evaluation orders and the E2xx family.

Each broken corpus file isolates one way a language can fail progress; the
sound ones must come through without errors and with usable orders.
"""

from langcert.classifier import classify
from langcert.parser import load_errctx, load_language
from langcert.progress import run_progress


def progress_for(path):
    lang, diags = load_language(path)
    assert lang is not None, diags
    roles, more = classify(lang)
    errctx = load_errctx(lang, roles.gamma_t)
    res = run_progress(lang, roles, errctx)
    return lang, res, [d.code for d in more + res.diagnostics
                       if d.severity == "error"]


def test_stlc_orders_respect_value_dependencies():
    _, res, errs = progress_for("corpus/sound/stlc_cbv.mod")
    assert not errs
    assert res.orders["app"] == [1, 2]
    assert res.orders["ite"] == [1]


def test_missing_context_for_eliminated_argument():
    _, _, errs = progress_for("corpus/broken/missing_app_ctx.mod")
    assert "E200" in errs


def test_circular_context_dependencies():
    _, _, errs = progress_for("corpus/broken/cons_ctx_cycle.mod")
    assert "E201" in errs


def test_handler_must_not_propagate_the_error_it_handles():
    _, _, errs = progress_for("corpus/broken/exceptions_badctx.mod")
    assert "E202" in errs


def test_unrestricted_step_rule_on_handler_expression():
    _, _, errs = progress_for("corpus/broken/try_unrestricted.mod")
    assert "E207" in errs


def test_missing_if_branch():
    _, _, errs = progress_for("corpus/broken/ite_missing_case.mod")
    assert "E210" in errs


def test_missing_nil_case_for_head():
    _, _, errs = progress_for("corpus/broken/head_partial.mod")
    assert "E210" in errs


def test_handler_without_value_rule():
    _, _, errs = progress_for("corpus/broken/try_no_value_rule.mod")
    assert "E211" in errs


def test_every_sound_fixture_clears_progress():
    from pathlib import Path
    for p in sorted(Path("corpus/sound").glob("*.mod")):
        _, _, errs = progress_for(str(p))
        assert not errs, f"{p.name}: {errs}"
