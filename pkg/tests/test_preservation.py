from langcert.ir import (
    BVar,
    Const,
    Generic,
    Hypothetical,
    MetaApp,
    MetaVar,
    Typing,
)
from langcert.parser import load_language
from langcert.preservation import (
    EntailmentQuery,
    check_preservation,
    entails,
    prove,
)


def lists_env():
    V1, V2, T = MetaVar("V1"), MetaVar("V2"), MetaVar("T")
    env = (Typing(V1, T), Typing(V2, Const("list", (T,))))
    return env, frozenset({"V1", "V2", "T"})


def test_head_of_cons_has_the_element_type():
    lang, _ = load_language("corpus/sound/lists.mod")
    env, frozen = lists_env()
    q = EntailmentQuery(env, MetaVar("V1"), MetaVar("T"), frozen)
    assert entails(lang, q, 50) == "yes"


def test_tail_does_not_have_the_element_type():
    lang, _ = load_language("corpus/sound/lists.mod")
    env, frozen = lists_env()
    q = EntailmentQuery(env, MetaVar("V2"), MetaVar("T"), frozen)
    assert entails(lang, q, 50) == "no"


def test_substituted_body_keeps_its_type():
    # The beta case: a hypothetical typing of the body plus a typing of the
    # argument entails a typing of the instantiated body.
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    R, V, T1, T2 = (MetaVar(n) for n in ("R", "V", "T1", "T2"))
    hyp = Generic("x", Hypothetical(
        Typing(BVar(0), T1), Typing(MetaApp(R, BVar(0)), T2)), "exp")
    env = (hyp, Typing(V, T1))
    q = EntailmentQuery(env, MetaApp(R, V), T2,
                        frozenset({"R", "V", "T1", "T2"}))
    assert entails(lang, q, 50) == "yes"


def test_constructed_value_types_by_rule():
    lang, _ = load_language("corpus/sound/lists.mod")
    env, frozen = lists_env()
    subject = Const("cons", (MetaVar("V1"), MetaVar("V2")))
    q = EntailmentQuery(env, subject, Const("list", (MetaVar("T"),)), frozen)
    assert entails(lang, q, 50) == "yes"


def test_exhausted_depth_is_reported_as_undecided():
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    R, V, T1, T2 = (MetaVar(n) for n in ("R", "V", "T1", "T2"))
    hyp = Generic("x", Hypothetical(
        Typing(BVar(0), T1), Typing(MetaApp(R, BVar(0)), T2)), "exp")
    env = (hyp, Typing(V, T1))
    q = EntailmentQuery(env, MetaApp(R, V), T2,
                        frozenset({"R", "V", "T1", "T2"}))
    assert entails(lang, q, 1) == "depth"


def test_prove_enumerates_solutions():
    lang, _ = load_language("corpus/sound/stlc_cbv.mod")
    goal = Typing(Const("tt", ()), MetaVar("T"))
    sols, cut = prove(lang, goal, 50, max_solutions=2)
    assert len(sols) == 1 and not cut


def test_sound_fixture_rules_all_preserve():
    lang, _ = load_language("corpus/sound/lists.mod")
    entries, diags = check_preservation(lang, None, None)
    assert not [d for d in diags if d.severity == "error"]
    assert {e.rule_name for e in entries} == {r.name for r in lang.step_rules}
    assert all(e.source_result == "yes" and e.target_result == "yes"
               for e in entries)


def test_rule_that_swaps_head_for_tail_is_caught():
    lang, _ = load_language("corpus/broken/head_swap.mod")
    entries, diags = check_preservation(lang, None, None)
    assert "E300" in {d.code for d in diags}
