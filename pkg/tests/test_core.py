import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bienforce import core
from bienforce.core import IN, OUT, Action, Atom, Bind, Cons, Int, Tup, Universe
from bienforce.errors import OpenSymbolicAction, TypeMismatch, UnboundVariable
from bienforce.parsing import (
    TokenStream,
    parse_condition,
    parse_pattern,
    parse_value_text,
)


def pat(text, scope=()):
    ts = TokenStream(text)
    p = parse_pattern(ts, frozenset(scope))
    ts.expect_eof()
    return p


def cond(text, scope):
    ts = TokenStream(text)
    c = parse_condition(ts, frozenset(scope))
    ts.expect_eof()
    return c


# -- values ---------------------------------------------------------------

values = st.recursive(
    st.one_of(
        st.integers(min_value=-50, max_value=50).map(Int),
        st.sampled_from(["a", "cls", "vdef", "w1"]).map(Atom),
    ),
    lambda inner: st.one_of(
        st.lists(inner, min_size=2, max_size=3).map(lambda xs: Tup(tuple(xs))),
        st.lists(inner, min_size=1, max_size=2).map(lambda xs: Cons("ans", tuple(xs))),
    ),
    max_leaves=6,
)


@given(values)
def test_value_text_round_trip(v):
    assert parse_value_text(str(v)) == v


def test_tuple_and_constructor_arity_invariants():
    with pytest.raises(ValueError):
        Tup((Int(1),))
    with pytest.raises(ValueError):
        Cons("ans", ())


def test_structural_equality_of_values():
    assert Tup((Int(1), Cons("ans", (Int(1),)))) == parse_value_text("<1,ans(1)>")
    assert Atom("a") != Int(1)


# -- matching -------------------------------------------------------------


def test_match_binds_port_and_payload():
    assert core.match_pattern(pat("(x)!(y)"), Action(OUT, "a", Int(3))) == {
        "x": Atom("a"),
        "y": Int(3),
    }


def test_match_literal_port_mismatch():
    assert core.match_pattern(pat("a?(y)"), Action(IN, "b", Int(5))) is None


def test_match_dont_care_binds_nothing():
    assert core.match_pattern(pat("(x)?(_)"), Action(IN, "a", Atom("cls"))) == {"x": Atom("a")}


def test_match_direction_mismatch_and_tau():
    assert core.match_pattern(pat("(x)?(y)"), Action(OUT, "a", Int(1))) is None
    assert core.match_pattern(pat("(x)?(y)"), core.TAU) is None


def test_duplicate_binders_rejected():
    from bienforce.errors import ParseError

    with pytest.raises(ParseError):
        pat("(x)?(x)")


actions = st.builds(
    Action,
    st.sampled_from([IN, OUT]),
    st.sampled_from(["a", "b", "c"]),
    values,
)
patterns = st.sampled_from(["(x)?(y)", "(x)!(y)", "(_)!(_)", "a?(y)", "b!(y)", "(x)!3", "a!cls"])


@given(patterns, actions)
def test_matching_soundness_and_minimality(ptext, a):
    p = pat(ptext)
    sigma = core.match_pattern(p, a)
    if sigma is None:
        return
    assert set(sigma) == core.bv(p)
    if not any(isinstance(part, Bind) and part.name is None for part in (p.port, p.payload)):
        assert core.instantiate_pattern(p, sigma) == a


# -- conditions -----------------------------------------------------------


def test_eval_condition_disjunction_and_ordering():
    c = cond("(x = a || x = b) && y >= 3", {"x", "y"})
    assert core.eval_condition(c, {"x": Atom("b"), "y": Int(3)})
    assert not core.eval_condition(c, {"x": Atom("c"), "y": Int(3)})


def test_eval_condition_true_and_structural_equality():
    assert core.eval_condition(core.TRUE, {})
    c = cond("y = <v1,w1>", {"y"})
    assert core.eval_condition(c, {"y": Tup((Atom("v1"), Atom("w1")))})


def test_eval_condition_errors():
    with pytest.raises(UnboundVariable):
        core.eval_condition(cond("y = 1", {"y"}), {})
    with pytest.raises(TypeMismatch):
        core.eval_condition(cond("y >= 1", {"y"}), {"y": Atom("cls")})


def test_unscoped_identifier_is_atom():
    c = cond("x = cls", {"x"})
    assert c == core.Cmp("=", core.Var("x"), core.Const(Atom("cls")))


# -- denotation -----------------------------------------------------------


def test_denotation_truncated_to_universe():
    u = Universe(("a", "b"), (Int(3), Int(4)))
    got = core.denotation(pat("(x)!(y)"), cond("(x = a || x = b) && y >= 3", {"x", "y"}), u)
    assert got == {Action(OUT, p, Int(v)) for p in "ab" for v in (3, 4)}


def test_denotation_false_is_empty():
    u = Universe(("a", "b"), (Int(1),))
    assert core.denotation(pat("a?(y)"), core.FALSE, u) == set()


def test_denotation_input_port_filter():
    u = Universe(("a", "b"), (Int(1),))
    assert core.denotation(pat("(x)?(y)"), cond("x != b", {"x", "y"}), u) == {
        Action(IN, "a", Int(1))
    }


def test_denotation_requires_closed_symbolic_action():
    u = Universe(("a",), (Int(1),))
    with pytest.raises(OpenSymbolicAction):
        core.denotation(pat("(x)?(y)"), cond("x = z", {"x", "y", "z"}), u)


def test_denotation_coherence_exhaustive():
    u = Universe(("a", "b"), (Int(1), Int(2), Atom("cls")))
    symbolic = [
        ("(x)!(y)", "y != 2"),
        ("(x)?(_)", "x = a"),
        ("b!(y)", "y = cls || y = 1"),
        ("(x)!(y)", "!(x = b) && y != 1"),
    ]
    for ptext, ctext in symbolic:
        p = pat(ptext)
        c = cond(ctext, core.bv(p))
        den = core.denotation(p, c, u)
        for a in u.actions():
            sigma = core.match_pattern(p, a)
            expected = sigma is not None and core.eval_condition(c, sigma)
            assert (a in den) == expected


def test_universe_enumerates_both_directions():
    u = Universe(("a", "b"), (Int(1), Int(2), Int(3)))
    acts = list(u.actions())
    assert len(acts) == 12
    assert len(list(u.inputs())) == 6
    assert set(acts) == {Action(d, p, Int(v)) for d, p, v in itertools.product((IN, OUT), "ab", (1, 2, 3))}
