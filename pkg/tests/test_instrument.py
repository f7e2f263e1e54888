from hypothesis import given, settings
from hypothesis import strategies as st

from bienforce import monitor as mon
from bienforce import process as proc
from bienforce.analysis import bisimilar, random_process
from bienforce.core import TAU, Atom, Int, Universe
from bienforce.instrument import RULES, Composite, composite_step, explore_composite

from oracles import naive_bisimilar

SMALL = Universe(("a", "b", "c"), (Int(1), Int(2), Atom("vdef")))


def moves(e, p, u):
    return sorted((str(a), rule) for a, _, rule in composite_step(Composite(e, p), u))


def test_disabler_blocks_request_on_p_bi(load, U):
    assert composite_step(Composite(load("e_d"), load("p_bi")), U) == []


def test_disabler_forwards_log_port_inputs(load, U):
    got = moves(load("e_d"), load("p_bo"), U)
    assert ("b?cls", "biTrnI") in got
    assert all(rule == "biTrnI" and a.startswith("b?") for a, rule in got)


def test_output_suppression_is_silent(load, U):
    p = proc.parse_process("a!1. nil")
    assert moves(load("e_d"), p, U) == [("tau", "biDisO")]


def test_output_without_transformation_defaults_to_identity(U):
    e = mon.parse_monitor("(b?(_)). id")
    p = proc.parse_process("a!1. nil")
    [(a, nxt, rule)] = composite_step(Composite(e, p), U)
    assert (str(a), rule) == ("a!1", "biDef")
    assert nxt.monitor == mon.ID


def test_insertions_feed_the_process_or_the_environment(load, U):
    e = mon.parse_monitor("(., a?vdef). id")
    p = proc.parse_process("a?(x). a!x. nil")
    [(a, nxt, rule)] = composite_step(Composite(e, p), U)
    assert (a, rule) == (TAU, "biDisI")
    assert [str(x) for x, _ in proc.step(nxt.process, U)] == ["a!vdef"]
    e2 = mon.parse_monitor("(., b!cls). id")
    assert ("b!cls", "biEnO") in moves(e2, p, U)


def test_enabler_swallows_environment_input(load, U):
    got = moves(load("e_e"), load("p_g"), U)
    assert ("a?1", "biEnI") in got
    assert all(rule in ("biEnI", "biTrnI") for _, rule in got)


def test_adapter_reroutes(load, U):
    p = proc.parse_process("a?(x). nil")
    assert moves(load("e_a"), p, U) == [(f"b?{v}", "biTrnI") for v in ("1", "2", "cls", "vdef")]


def test_composite_lts_labels_rules(load, U):
    lts = explore_composite(Composite(load("e_det"), load("p_bi")), U)
    assert {r for _, _, _, r in lts.transitions} <= set(RULES)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["e_d", "e_det", "e_dt", "e_a", "e_e"]))
def test_process_silent_moves_are_preserved(seed, name):
    from bienforce import corpus

    e = corpus.load(name)
    p = random_process(seed, SMALL, 5)
    comp = composite_step(Composite(e, p), SMALL)
    for a, q in proc.step(p, SMALL):
        if a is TAU:
            assert (TAU, Composite(e, q), "biAsy") in comp


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["e_d", "e_det", "e_dt", "e_a", "e_e", "e_1"]))
def test_input_rules_are_mutually_exclusive_per_transformation(seed, name):
    from bienforce import corpus

    e = corpus.load(name)
    p = random_process(seed, SMALL, 5)
    for a, nxt, rule in composite_step(Composite(e, p), SMALL):
        if rule in ("biTrnI", "biEnI"):
            results = {r for r, m in mon.transforms(e, a) if m == nxt.monitor}
            if rule == "biEnI":
                assert None in results and nxt.process == p
            else:
                assert any(r is not None for r in results)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_identity_instrumentation_is_neutral(seed):
    p = random_process(seed, SMALL, 5)
    plain = proc.explore_lts(p, SMALL)
    inst = explore_composite(Composite(mon.ID, p), SMALL)
    assert bisimilar(inst, plain).equivalent
    assert naive_bisimilar(inst, plain)
