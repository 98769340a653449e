import dataclasses

from langcert.certify import cross_check, emit_certificate
from langcert.cli import check_language


def certified(path):
    rep = check_language(path)
    assert rep.verdict == "certified", [d.code for d in rep.diagnostics]
    return rep


def render(rep):
    return emit_certificate(rep.lang, rep.verdict, rep.diagnostics, rep.roles,
                            rep.errctx, rep.progress, rep.preservation)


def test_certificate_structure():
    rep = certified("corpus/sound/lists.mod")
    text = render(rep)
    assert "== THEOREM ==" in text
    assert "== LEMMA canonical-forms list ==" in text
    assert "values of type 'list': nil, cons" in text
    assert "case nil: steps by r-head-nil" in text
    assert "== PRESERVATION ==" in text
    assert "rule r-head-cons" in text


def test_certificates_are_byte_stable():
    a = render(certified("corpus/sound/exceptions.mod"))
    b = render(certified("corpus/sound/exceptions.mod"))
    assert a == b


def test_rejected_language_gets_a_diagnostics_certificate():
    rep = check_language("corpus/broken/head_swap.mod")
    text = emit_certificate(rep.lang, rep.verdict, rep.diagnostics)
    assert "verdict rejected" in text
    assert "E300" in text


def test_cross_check_accepts_sound_evidence():
    rep = certified("corpus/sound/lists.mod")
    assert cross_check(rep.lang, rep.roles, rep.errctx, rep.progress,
                       rep.preservation) == []


def test_cross_check_rejects_reordered_evaluation():
    rep = certified("corpus/sound/stlc_cbv.mod")
    rep.progress.orders["app"] = [2, 1]
    problems = cross_check(rep.lang, rep.roles, rep.errctx, rep.progress,
                           rep.preservation)
    assert any("before its dependencies" in p for p in problems)


def test_cross_check_rejects_missing_preservation_entry():
    rep = certified("corpus/sound/stlc_cbv.mod")
    pruned = [e for e in rep.preservation if e.rule_name != "r-app-abs"]
    problems = cross_check(rep.lang, rep.roles, rep.errctx, rep.progress,
                           pruned)
    assert any("misses rule 'r-app-abs'" in p for p in problems)


def test_cross_check_rejects_citation_of_unknown_rule():
    rep = certified("corpus/sound/stlc_cbv.mod")
    entries = [dataclasses.replace(rep.preservation[0], rule_name="r-ghost")] \
        + list(rep.preservation[1:])
    problems = cross_check(rep.lang, rep.roles, rep.errctx, rep.progress,
                           entries)
    assert any("unknown rule 'r-ghost'" in p for p in problems)
