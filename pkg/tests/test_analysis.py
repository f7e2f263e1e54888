import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bienforce import analysis as an
from bienforce import formula as fm
from bienforce import monitor as mon
from bienforce import process as proc
from bienforce.core import TAU, Atom, Int, Universe, visible
from bienforce.instrument import Composite, explore_composite
from bienforce.parsing import parse_trace_text as T

from oracles import mc_recursive, naive_bisimilar

SMALL = Universe(("a", "b", "c"), (Int(1), Int(2), Atom("vdef")))
U2 = Universe(("a", "b"), (Int(1),))


def lts(text, u=U2):
    return proc.explore_lts(proc.parse_process(text), u)


# -- bisimulation ---------------------------------------------------------


def test_bisimilar_identical_behaviour_with_different_syntax():
    assert an.bisimilar(lts("rec r. a!1. r"), lts("a!1. rec r. a!1. r")).equivalent


def test_branching_distinguished_with_witness():
    left = lts("a!1. (b!1. nil + a!1. nil)")
    right = lts("a!1. b!1. nil + a!1. a!1. nil")
    res = an.bisimilar(left, right)
    assert not res.equivalent
    assert [str(a) for a in res.witness][0] == "a!1"
    assert not naive_bisimilar(left, right)


def test_tau_counts_as_an_action():
    assert not an.bisimilar(lts("tau. a!1. nil"), lts("a!1. nil")).equivalent


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_bisimilarity_agrees_with_naive_oracle(s1, s2):
    l1 = proc.explore_lts(an.random_process(s1, U2, 5), U2)
    l2 = proc.explore_lts(an.random_process(s2, U2, 5), U2)
    assert an.bisimilar(l1, l2).equivalent == naive_bisimilar(l1, l2)
    assert an.bisimilar(l1, l1).equivalent


# -- verdicts -------------------------------------------------------------


@pytest.mark.parametrize("name,sound,transparent", [
    ("e_e", False, False),
    ("e_a", True, False),
    ("e_d", True, False),
    ("e_dt", True, True),
    ("e_det", True, True),
])
def test_corpus_verdicts(load, U, name, sound, transparent):
    systems = [load("p_g"), load("p_bo"), load("p_bi")]
    e, f = load(name), load("phi1")
    s = an.check_soundness(e, f, systems, U)
    t = an.check_transparency(e, f, systems, U)
    assert bool(s) is sound and bool(t) is transparent
    for v in (s, t):
        if not v:
            assert v.status == an.FAILS and v.witness is not None


def test_failing_soundness_witness_drives_formula_to_ff(load, U):
    v = an.check_soundness(load("e_e"), load("phi1"), [load("p_bo")], U)
    assert fm.after_trace(load("phi1"), v.witness) == fm.FF


def test_eventual_transparency_separates_e_dt_from_e_det(load, U):
    systems = [load("p_g"), load("p_bo"), load("p_bi")]
    f = load("phi1")
    assert an.check_eventual_transparency(load("e_det"), f, systems, U, depth=6)
    v = an.check_eventual_transparency(load("e_dt"), f, systems, U, depth=6)
    assert v.status == an.FAILS


def test_unsatisfiable_formula_is_vacuously_enforced(load, U):
    v = an.check_soundness(mon.ID, fm.FF, [load("p_g")], U)
    assert v.status == an.HOLDS


def test_bound_exhaustion_is_inconclusive(load, U):
    v = an.check_soundness(mon.ID, load("phi1"), [load("p_g")], U, state_bound=3)
    assert v.status == an.INCONCLUSIVE
    assert v.to_json()["status"] == "InconclusiveAtBound"


def test_negative_depth_rejected(load, U):
    with pytest.raises(ValueError):
        an.check_eventual_transparency(mon.ID, load("phi1"), [], U, depth=-1)


# -- modification count ---------------------------------------------------


@pytest.mark.parametrize("name,count", [("e_e", 3), ("e_a", 4), ("e_d", 5), ("e_dt", 4), ("e_det", 2)])
def test_mc_on_t0(load, U, name, count):
    assert an.modification_count(load(name), load("t0"), U).count == count


def test_mc_derivation_of_e_det(load, U):
    r = an.modification_count(load("e_det"), load("t0"), U)
    assert [t for t, _, _ in r.derivation] == [
        an.IDENTITY, an.MODIFY, an.IDENTITY, an.IDENTITY, an.MODIFY, an.IDENTITY
    ]
    assert [rule for _, _, rule in r.derivation] == [
        "biTrnI", "biDisI", "biAsy", "biTrnO", "biDisO", "biDef"
    ]


def test_mc_blocked_derivation_counts_residual(load, U):
    r = an.modification_count(load("e_dt"), load("t0"), U)
    assert r.residual == 4
    assert r.derivation[-1][0] == an.BLOCKED


def test_mc_identity_is_zero(load, U):
    for t in ("t0", "t1", "t2", "t3"):
        r = an.modification_count(mon.ID, load(t), U)
        assert r.count == 0
        assert all(tag == an.IDENTITY for tag, _, _ in r.derivation)


def test_mc_of_empty_trace(U):
    assert an.modification_count(mon.ID, [], U).count == 0


def test_mc_divergent_insertion_loop(U):
    e = mon.parse_monitor("rec X. (., a!1). X")
    r = an.modification_count(e, T("a?1"), U, step_bound=8)
    assert r.divergent
    assert r.to_json()["count"] == "Divergent"


def test_mc_for_phi2_monitors(load, U):
    assert an.modification_count(load("e_1"), load("t3"), U).count == 1
    # the c-variant of t3 followed by a residual of visible length 2
    t = T("a?v1 . c?v2 . a!w1 . a!w2 . b!<v1,w1>")
    assert an.modification_count(load("e_1"), t, U).count == 4
    assert an.modification_count(load("e_2"), t, U).count == 1


def _replay(e, result, trace, u):
    """Follow the derivation through the composite LTS of e and the trace system."""
    from bienforce.instrument import composite_step

    state = Composite(e, proc.trace_system(trace))
    uu = an.trace_universe(u, trace)
    for tag, a, rule in result.derivation:
        if tag == an.BLOCKED:
            assert composite_step(state, uu) == []
            return
        options = [n for b, n, r in composite_step(state, uu) if b == a and r == rule]
        assert options, (tag, a, rule)
        state = options[0]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["e_d", "e_dt", "e_det", "e_a", "e_e", "e_1", "e_2", "e_ed"]),
       st.lists(st.sampled_from(["a?v1", "b?v2", "c?v1", "a!w1", "b!<v1,w1>", "tau"]), max_size=5))
def test_mc_agrees_with_recursive_oracle(name, actions):
    from bienforce import corpus

    e = corpus.load(name)
    trace = T(" . ".join(actions))
    r = an.modification_count(e, trace, corpus.GOLDEN_UNIVERSE)
    expected = mc_recursive(e, trace, corpus.GOLDEN_UNIVERSE)
    if r.divergent:
        assert expected == math.inf
    else:
        assert r.count == expected
        assert r.count == sum(t in (an.MODIFY, an.INSERT) for t, _, _ in r.derivation) + r.residual


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["e_d", "e_dt", "e_det", "e_a", "e_e", "e_1"]),
       st.lists(st.sampled_from(["a?v1", "b?v2", "a!w1", "b!<v1,w1>", "tau"]), max_size=5))
def test_mc_derivation_replays(name, actions):
    from bienforce import corpus

    e = corpus.load(name)
    trace = T(" . ".join(actions))
    r = an.modification_count(e, trace, corpus.GOLDEN_UNIVERSE)
    if not r.divergent:
        _replay(e, r, trace, corpus.GOLDEN_UNIVERSE)


# -- comparison -----------------------------------------------------------


def test_compare_reports_violations(load, U):
    rep = an.compare_intrusiveness(load("e_d"), load("e_det"), load("phi1"), [load("t0")], U)
    assert rep.comparable
    assert rep.rows[0][1:] == (5, 2)
    assert len(rep.violations) == 1
    clean = an.compare_intrusiveness(load("e_det"), load("e_d"), load("phi1"), [load("t0")], U)
    assert clean.violations == []


def test_compare_flags_incomparable_capabilities(load, U):
    rep = an.compare_intrusiveness(load("e_d"), load("e_e"), load("phi1"), [], U)
    assert not rep.comparable


# -- generators -----------------------------------------------------------


def test_generators_reject_empty_size():
    with pytest.raises(ValueError):
        an.random_process(0, SMALL, 0)
    assert an.random_process(0, SMALL, 1) == proc.NIL


def test_generated_formulas_are_normal_form():
    for seed in range(1000):
        f = an.random_formula_nf(seed, SMALL, 6)
        assert fm.is_normal_form(f, SMALL).ok, seed
        assert an.random_formula_nf(seed, SMALL, 6) == f


def test_generated_processes_are_closed_and_explorable():
    for seed in range(300):
        p = an.random_process(seed, SMALL, 6)
        l = proc.explore_lts(p, SMALL)
        assert all(a is TAU or a.port in SMALL.ports for _, a, _, _ in l.transitions)


def test_witness_is_visible_run_of_composite(load, U):
    v = an.check_soundness(load("e_e"), load("phi1"), [load("p_bo")], U)
    comp = explore_composite(Composite(load("e_e"), load("p_bo")), U)
    # the witness labels form a path from the initial composite state
    states = {comp.initial}
    for a in v.witness:
        states = {d for s in states for b, d, _ in comp.successors(s) if b == a}
        assert states
    assert visible(v.witness)
