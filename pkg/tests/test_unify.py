import hypothesis as hyp
from hypothesis import strategies as st

from langcert.ir import BVar, Bind, Const, MetaApp, MetaVar, ObjVar
from langcert.unify import fresh_eigen, fresh_name, resolve, unify, walk


def c(name, *args):
    return Const(name, tuple(args))


def mv(name):
    return MetaVar(name)


def test_identical_constants():
    assert unify(c("tt"), c("tt"), {}, frozenset()) == {}
    assert unify(c("tt"), c("ff"), {}, frozenset()) is None


def test_binding_and_resolution():
    s = unify(mv("X"), c("succ", c("z")), {}, frozenset())
    assert resolve(mv("X"), s) == c("succ", c("z"))


def test_nonlinear_variable():
    s = unify(c("pair", mv("X"), mv("X")),
              c("pair", c("tt"), c("tt")), {}, frozenset())
    assert s is not None
    s = unify(c("pair", mv("X"), mv("X")),
              c("pair", c("tt"), c("ff")), {}, frozenset())
    assert s is None


def test_occurs_check():
    assert unify(mv("X"), c("succ", mv("X")), {}, frozenset()) is None


def test_frozen_variables_are_rigid():
    assert unify(mv("T"), c("bool"), {}, frozenset({"T"})) is None
    # but two occurrences of the same frozen variable still match
    assert unify(mv("T"), mv("T"), {}, frozenset({"T"})) == {}


def test_eigenvariable_scope():
    # A variable born before an eigenvariable cannot mention it.
    old = fresh_name("X")
    e = fresh_eigen("x")
    assert unify(MetaVar(old), ObjVar(e), {}, frozenset()) is None
    # The other order is fine.
    e2 = fresh_eigen("x")
    young = fresh_name("X")
    assert unify(MetaVar(young), ObjVar(e2), {}, frozenset()) is not None


def test_miller_pattern_solves_to_binder():
    e = fresh_eigen("x")
    f = fresh_name("F")
    s = unify(MetaApp(MetaVar(f), ObjVar(e)), c("succ", ObjVar(e)),
              {}, frozenset())
    assert s is not None
    assert resolve(MetaVar(f), s) == Bind("x", c("succ", BVar(0)))


def test_miller_pattern_beta_after_binding():
    f = fresh_name("F")
    s = {f: Bind("x", c("succ", BVar(0)))}
    got = unify(MetaApp(MetaVar(f), c("z")), c("succ", c("z")), s, frozenset())
    assert got is not None


def test_repeated_spine_variable_is_not_a_pattern():
    # (F x x) = succ x has no unique pattern solution; the pointwise
    # fallback may still find one, but it must be a correct one.
    e = fresh_eigen("x")
    f = fresh_name("F")
    lhs = MetaApp(MetaApp(MetaVar(f), ObjVar(e)), ObjVar(e))
    s = unify(lhs, c("succ", ObjVar(e)), {}, frozenset())
    if s is not None:
        assert resolve(lhs, s) == c("succ", ObjVar(e))


def test_imitation_against_constant_head():
    # (T T1) = arrow bool bool with both variables free: imitation builds
    # T from the arrow template and the equation still closes.
    t = fresh_name("T")
    t1 = fresh_name("T1")
    goal = c("arrow", c("bool"), c("bool"))
    lhs = MetaApp(MetaVar(t), MetaVar(t1))
    s = unify(lhs, goal, {}, frozenset())
    assert s is not None
    assert resolve(lhs, s) == goal


def test_flex_application_against_binder():
    # (H X) = (a\ bool): both sides applied to a fresh variable, leaving
    # H a constant function.
    h = fresh_name("H")
    x = fresh_name("X")
    lhs = MetaApp(MetaVar(h), MetaVar(x))
    s = unify(lhs, Bind("a", c("bool")), {}, frozenset())
    assert s is not None
    probe = fresh_eigen("p")
    want = c("bool")
    got = resolve(MetaApp(lhs, ObjVar(probe)), s)
    assert got == want


def test_raising_keeps_young_variables_usable():
    # Solving (F x) = (G) where G is younger than x raises G over the
    # spine instead of failing.
    f = fresh_name("F")
    e = fresh_eigen("x")
    g = fresh_name("G")
    s = unify(MetaApp(MetaVar(f), ObjVar(e)), MetaVar(g), {}, frozenset())
    assert s is not None
    s2 = unify(MetaVar(g), c("succ", ObjVar(e)), s, frozenset())
    assert s2 is not None
    assert resolve(MetaApp(MetaVar(f), ObjVar(e)), s2) == c("succ", ObjVar(e))


ground = st.recursive(
    st.sampled_from([c("z"), c("tt"), c("ff"), c("nil")]),
    lambda inner: st.builds(
        lambda name, args: Const(name, tuple(args)),
        st.sampled_from(["succ", "cons", "pair"]),
        st.lists(inner, min_size=1, max_size=2)),
    max_leaves=8)


@hyp.given(ground)
def test_ground_self_unification(t):
    assert unify(t, t, {}, frozenset()) == {}


@hyp.given(ground, ground)
def test_ground_unification_is_equality(a, b):
    s = unify(a, b, {}, frozenset())
    assert (s is not None) == (a == b)


@hyp.given(ground)
def test_variable_binds_any_ground_term(t):
    name = fresh_name("X")
    s = unify(MetaVar(name), t, {}, frozenset())
    assert resolve(MetaVar(name), s) == t
    assert walk(MetaVar(name), s) == t
