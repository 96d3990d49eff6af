from fractions import Fraction as F

import pytest

from cyclekit.averaging import kb_average, rescale
from cyclekit.cycles import count_cycles
from cyclekit.errors import InputError, ParameterOutOfRange
from cyclekit.modelzoo import BLOWS_LLOYD_K3, blows_lloyd_F, gaiko_default_mus, get_model, zoo
from cyclekit.reduction import LLSClass

SHAPES = {
    "van_der_pol": (LLSClass.LIENARD, 2, 1),
    "glycolytic": (LLSClass.GENERAL, 1, 3),
    "modified_brusselator": (LLSClass.GENERAL, 1, 3),
    "rychkov": (LLSClass.LIENARD, 4, 1),
    "kaiser": (LLSClass.LIENARD, 6, 1),
    "gaiko": (LLSClass.RAYLEIGH, 1, 5),
    "blows_lloyd": (LLSClass.LIENARD, 6, 1),
    "lotka_volterra": (LLSClass.GENERAL, 2, 2),
}


def test_zoo_lists_every_model():
    assert [m.name for m in zoo()] == list(SHAPES)


@pytest.mark.parametrize("name", SHAPES)
def test_class_and_degrees(name):
    lls = get_model(name).lls()
    cls, N, M = SHAPES[name]
    assert (lls.lls_class, lls.N, lls.M) == (cls, N, M)
    exp = get_model(name).expected()
    assert (exp.lls_class, exp.N, exp.M) == (cls, N, M)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_gaiko_is_rayleigh_of_order_2k_plus_1(k):
    lls = get_model("gaiko").lls(k=k)
    assert lls.lls_class == LLSClass.RAYLEIGH and lls.M == 2 * k + 1


@pytest.mark.parametrize("name", ["glycolytic", "modified_brusselator"])
def test_printed_lls_matches_reduction(name):
    m = get_model(name)
    assert m.printed_lls().A == m.lls().A


def test_printed_lls_matches_away_from_defaults():
    m = get_model("glycolytic")
    assert m.printed_lls(a=F(3, 20), b=F(2, 3)).A == m.lls(a=F(3, 20), b=F(2, 3)).A
    m = get_model("modified_brusselator")
    assert m.printed_lls(a1=2, b=7, alpha=F(3, 2)).A == m.lls(a1=2, b=7, alpha=F(3, 2)).A


def test_models_without_printed_form():
    assert get_model("kaiser").printed_lls() is None


def _reproduced(name, **params):
    m = get_model(name)
    exp = m.expected(**params)
    rep = count_cycles(rescale(m.lls(**params), eps_warn=float("inf")))
    if exp.cycle_count is not None:
        assert len(rep.cycles) == exp.cycle_count
    if exp.stabilities is not None:
        assert tuple(s.value for s in rep.stabilities) == exp.stabilities
    if exp.radii is not None:
        got = [float(r) for r in rep.radii]
        assert got == pytest.approx([float(r) for r in exp.radii], abs=0.01)
    return rep


@pytest.mark.parametrize("name", list(SHAPES))
def test_expected_records_reproduced(name):
    _reproduced(name)


@pytest.mark.parametrize("name,params", [
    ("kaiser", {"alpha": F(1, 10), "beta": 0}),
    ("gaiko", {"k": 3}),
    ("gaiko", {"k": 1}),
    ("blows_lloyd", {"k": 2}),
    ("blows_lloyd", {"k": 4}),
    ("blows_lloyd", {"eps": F(-1, 100)}),
])
def test_expected_records_reproduced_for_variants(name, params):
    _reproduced(name, **params)


def test_exact_radii_for_constructed_families():
    for k in (1, 2, 3, 5):
        for name in ("gaiko", "blows_lloyd"):
            rep = count_cycles(rescale(get_model(name).lls(k=k), eps_warn=float("inf")))
            assert rep.radii == list(range(1, k + 1))


def test_blows_lloyd_literature_coefficients():
    assert tuple(blows_lloyd_F(3)) == BLOWS_LLOYD_K3


def test_gaiko_default_mus_place_cycles():
    mus = gaiko_default_mus(2, F(1, 100))
    assert set(mus) == {"mu1", "mu2", "mu3", "mu4", "mu5"}
    assert mus["mu2"] == mus["mu4"] == 0
    assert mus["mu1"] > 0


def test_gaiko_custom_mus_and_note():
    m = get_model("gaiko")
    assert m.notes(k=3, mu1=-1) == ["at most k cycles requires mu1 > 0"]
    assert m.notes(k=3) == []
    assert m.expected(k=2, mu1=F(1, 50)).provenance == "derived"
    with pytest.raises(ParameterOutOfRange):
        m.lls(k=2, mu9=1)


@pytest.mark.parametrize("name,params", [
    ("kaiser", {"alpha": -1}),
    ("kaiser", {"beta": F(-1, 10)}),
    ("kaiser", {"mu": 0}),
    ("glycolytic", {"a": 0}),
    ("modified_brusselator", {"alpha": -2}),
    ("lotka_volterra", {"beta": 0}),
    ("van_der_pol", {"eps": 0}),
    ("gaiko", {"k": F(3, 2)}),
    ("blows_lloyd", {"k": 0}),
    ("blows_lloyd", {"eps": 0}),
])
def test_parameter_out_of_range(name, params):
    with pytest.raises(ParameterOutOfRange):
        get_model(name).lls(**params)


def test_unknown_model_and_parameter():
    with pytest.raises(InputError):
        get_model("duffing")
    with pytest.raises(InputError):
        get_model("kaiser").lls(gamma=1)


def test_glycolytic_note_when_no_stable_cycle():
    notes = get_model("glycolytic").notes(a=1, b=F(1, 10))
    assert notes and "no stable cycle" in notes[0]
    assert get_model("glycolytic").expected(a=1, b=F(1, 10)).cycle_count is None


def test_closed_form_fixed_points_are_fixed():
    for m in zoo():
        sys, (x, y) = m.kinetic()
        dx, dy = sys.rhs(x, y)
        assert dx == 0 and dy == 0


def test_kaiser_default_is_small_eps():
    osc = rescale(get_model("kaiser").lls())
    assert osc.eps == F(1, 100) and not osc.warnings
    assert kb_average(osc).radial_core.degree == 3
