import pytest
from hypothesis import given
from hypothesis import strategies as st

from bienforce.core import IN, OUT, TAU, Action, Atom, Int, Tup
from bienforce.errors import ParseError
from bienforce.parsing import (
    FreshNames,
    format_trace_text,
    parse_action_text,
    parse_trace_text,
)


def test_parse_actions():
    assert parse_action_text("a?3") == Action(IN, "a", Int(3))
    assert parse_action_text("b!cls") == Action(OUT, "b", Atom("cls"))
    assert parse_action_text("tau") is TAU
    assert parse_action_text("b!<2,ans(2)>").payload == Tup(
        (Int(2), parse_action_text("a!ans(2)").payload)
    )


def test_trace_separators_and_comments():
    t = parse_trace_text("a?v1 . tau\n  a!w1   # answer\nb!<v1,w1>")
    assert len(t) == 4
    assert t[1] is TAU


def test_empty_trace():
    assert parse_trace_text("") == []


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_trace_text("a?1 .\n  b#")
    assert info.value.line == 2


trace_actions = st.one_of(
    st.just(TAU),
    st.builds(
        Action,
        st.sampled_from([IN, OUT]),
        st.sampled_from(["a", "b", "c"]),
        st.one_of(st.integers(0, 9).map(Int), st.sampled_from(["v1", "cls"]).map(Atom)),
    ),
)


@given(st.lists(trace_actions, max_size=8))
def test_trace_round_trip(trace):
    assert parse_trace_text(format_trace_text(trace)) == trace


def test_fresh_names_skip_avoided_and_count_per_prefix():
    fresh = FreshNames({"x1", "y1"})
    assert fresh("x") == "x2"
    assert fresh("y") == "y2"
    assert fresh("x") == "x3"
