import pytest

from langcert.ir import (
    BVar,
    Bind,
    Const,
    Kind,
    KindError,
    MetaApp,
    MetaVar,
    ObjVar,
    close_term,
    kind_of,
    mk_app,
    open_term,
    pretty_term,
    shift_term,
    term_metavars,
    term_size,
)


def c(name, *args):
    return Const(name, tuple(args))


def test_open_close_round_trip():
    body = c("arrow", ObjVar("a"), c("bool"))
    closed = Bind("a", close_term(body, "a"))
    assert closed.body == c("arrow", BVar(0), c("bool"))
    assert open_term(closed.body, ObjVar("a")) == body


def test_close_shifts_under_inner_binders():
    t = c("forall", Bind("b", ObjVar("a")))
    assert close_term(t, "a") == c("forall", Bind("b", BVar(1)))


def test_open_replaces_at_matching_depth_only():
    t = c("pair", BVar(0), Bind("x", BVar(1)))
    got = open_term(t, c("bool"))
    assert got == c("pair", c("bool"), Bind("x", c("bool")))


def test_open_term_lifts_free_indices_of_replacement():
    # Substituting a term that itself mentions an outer binder must not let
    # inner binders capture it: (b\ forall (a\ b)) applied to BVar(0) keeps
    # the index pointing outward.
    fn = Bind("b", c("forall", Bind("a", BVar(1))))
    got = open_term(fn.body, BVar(0))
    assert got == c("forall", Bind("a", BVar(1)))


def test_shift_term_respects_cutoff():
    t = c("pair", BVar(0), Bind("x", c("pair", BVar(0), BVar(1))))
    assert shift_term(t, 2) == c(
        "pair", BVar(2), Bind("x", c("pair", BVar(0), BVar(3))))
    assert shift_term(t, 0) is t


def test_mk_app_beta_reduces_binders():
    ident = Bind("x", BVar(0))
    assert mk_app(ident, c("tt")) == c("tt")
    v = MetaVar("F")
    assert mk_app(v, c("tt")) == MetaApp(v, c("tt"))


def test_term_metavars_sees_through_structure():
    t = c("app", MetaVar("E1"), Bind("x", MetaApp(MetaVar("R"), BVar(0))))
    assert set(term_metavars(t)) == {"E1", "R"}


def test_term_size_counts_nodes():
    assert term_size(c("tt")) == 1
    assert term_size(c("app", c("tt"), c("ff"))) == 3


def test_pretty_renames_shadowed_binders():
    t = c("forall", Bind("a", c("forall", Bind("a", BVar(1)))))
    assert pretty_term(t) == "forall (a\\ forall (a1\\ a))"


def test_pretty_binder_application():
    t = MetaApp(MetaVar("R"), ObjVar("x!3"))
    assert pretty_term(t) == "R x!3"
    assert pretty_term(c("succ", t)) == "succ (R x!3)"


def test_kind_of_rejects_arity_mismatch():
    from langcert.parser import load_language
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    with pytest.raises(KindError):
        kind_of(lang.signature, c("app", c("tt")), Kind((), "exp"))
