from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bienforce import formula as fm
from bienforce import monitor as mon
from bienforce.analysis import check_soundness, random_formula_nf, random_process
from bienforce.core import IN, Atom, Int, Universe
from bienforce.errors import NotNormalForm
from bienforce.parsing import FreshNames
from bienforce.synth import SynthesisConfig, default_branch, dis, synthesize

GOLDEN = Path(__file__).parent / "golden"
SMALL = Universe(("a", "b", "c"), (Int(1), Int(2), Atom("vdef")))
BC = SynthesisConfig(("b", "c"))


def golden(name):
    return mon.parse_monitor((GOLDEN / name).read_text())


@pytest.mark.parametrize("src", ["tt", "ff"])
def test_constants_synthesize_to_identity(src):
    assert synthesize(fm.parse_formula(src), BC) == mon.ID


def test_phi1_matches_golden(load, U):
    m = synthesize(load("phi1"), BC, U)
    assert mon.alpha_equivalent(m, golden("phi1_bc.mon"))
    assert mon.alpha_equivalent(mon.simplify(m), golden("phi1_bc_simplified.mon"))


def test_unblocking_is_limited_to_configured_request_ports(load, U):
    m = synthesize(load("phi1"), BC, U)
    [(_, after_req)] = mon.transforms(m, fm.core.Action(IN, "a", Int(1)))
    inserted = {str(a) for a, _ in mon.insertions(after_req)}
    # only the port equal to the request port is unblocked; a is not configured
    assert inserted == set()
    [(_, after_c)] = mon.transforms(m, fm.core.Action(IN, "c", Int(1)))
    assert {str(a) for a, _ in mon.insertions(after_c)} == {"c?vdef"}


def test_two_insertion_branches_per_configured_port(load):
    body = synthesize(fm.parse_formula("[(x)?(_), x != b] ff"), BC)
    branches = mon.unfold(body).branches
    inserts = [b for b in branches if b.pat is None]
    assert [mon.format_template(b.tact) for b in inserts] == ["b?vdef", "c?vdef"]


def test_dis_on_outputs_suppresses():
    f = fm.parse_formula("[a!(y), y = 1] ff")
    [b] = f.branches
    m = dis(b.pattern, b.cond, mon.ID, BC)
    assert m.tact is None and m.pat == b.pattern


def test_dis_on_literal_input_port_adds_equality():
    f = fm.parse_formula("[a?(_)] ff")
    [b] = f.branches
    m = dis(b.pattern, b.cond, mon.ID, BC)
    assert [fm.core.format_cond(x.cond) for x in m.branches] == ["b = a", "c = a"]


def test_default_branch_negates_input_necessities():
    f = fm.parse_formula("[(x)?(_), x != b] ff & [a!(_)] ff")
    pre = default_branch(f, FreshNames(set()))
    assert fm.core.format_cond(pre.cond) == "!(xd1 != b)"
    assert mon.is_identity(pre.cont)


def test_default_branch_without_inputs_is_unconditional():
    f = fm.parse_formula("[a!(_)] ff")
    pre = default_branch(f, FreshNames(set()))
    assert pre.cond == fm.core.TRUE


@pytest.mark.parametrize("name", ["phi1", "phi2", "phi3_nf"])
def test_synthesized_monitors_only_disable(load, U, name):
    assert mon.etp(synthesize(load(name), BC, U)) <= {"dis"}


def test_rejects_formula_outside_normal_form(load, U):
    with pytest.raises(NotNormalForm) as info:
        synthesize(load("phi3"), BC, U)
    assert str(info.value.witness) == "a!4"


def test_synthesis_is_deterministic(load, U):
    assert synthesize(load("phi1"), BC, U) == synthesize(load("phi1"), BC, U)


def test_fresh_names_avoid_formula_identifiers():
    f = fm.parse_formula("max Y1. [(xd1)?(yd1), xd1 != b] ([xd1!(_)] ff & [b!(_)] Y1)")
    m = synthesize(f, BC)
    text = mon.format_monitor(m)
    assert "rec Y2" in text and "(xd2)?(yd2)" in text
    assert mon.parse_monitor(text) == m


def test_empty_port_configuration_rejected():
    with pytest.raises(ValueError):
        SynthesisConfig(())


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_synthesized_monitors_are_sound_on_random_systems(fseed, pseed):
    f = random_formula_nf(fseed, SMALL, 5)
    m = synthesize(f, SynthesisConfig(("a", "b", "c")), SMALL)
    mon.check_well_formed(m)
    v = check_soundness(m, f, [random_process(pseed, SMALL, 5)], SMALL)
    assert v.status == "Holds", v.witness
