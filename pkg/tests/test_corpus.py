import pytest

from bienforce import corpus
from bienforce import formula as fm
from bienforce.errors import UnknownName


def test_registry_covers_every_kind():
    assert corpus.names("process") == ["p_bi", "p_bo", "p_g"]
    assert corpus.names("formula") == ["phi1", "phi2", "phi3", "phi3_nf"]
    assert corpus.names("trace") == ["t0", "t1", "t2", "t3"]
    assert set(corpus.names("monitor")) == {
        "e_1", "e_2", "e_a", "e_d", "e_det", "e_dt", "e_e", "e_ed"
    }


@pytest.mark.parametrize("name", corpus.names())
def test_every_artifact_parses_and_is_documented(name):
    art = corpus.artifact(name)
    assert art.provenance
    assert art.parse() is not None


@pytest.mark.parametrize("name", corpus.names("formula"))
def test_normal_form_flags_match_checker(name):
    art = corpus.artifact(name)
    assert fm.is_normal_form(art.parse(), corpus.GOLDEN_UNIVERSE).ok is art.normal_form


def test_unknown_name():
    with pytest.raises(UnknownName) as info:
        corpus.load("p_missing")
    assert str(info.value) == "no corpus artifact named 'p_missing'"


def test_traces_have_expected_shape():
    assert len(corpus.load("t0")) == 6
    assert [str(a) for a in corpus.load("t3")] == ["a?v1", "b?v2", "a!w1"]
