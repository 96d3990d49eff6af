import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cyclekit.averaging import kb_average, rescale
from cyclekit.cycles import Stability, classify_cycles
from cyclekit.modelzoo import get_model
from cyclekit.odeverify import (
    DetectSettings, Direction, PlanarField, SimSpec, compare_with_kb, detect_limit_cycles,
    integrate, kinetic_field, run_seeds,
)
from cyclekit.polycore import BiPoly
from cyclekit.reduction import LLSSystem

HARMONIC = LLSSystem(BiPoly({(1, 0): -1}))


def vdp(e=F(1, 10)):
    return LLSSystem(BiPoly({(1, 0): -1, (0, 1): e, (2, 1): -e}))


def test_harmonic_returns_after_one_period():
    traj = integrate(SimSpec(HARMONIC, (1.0, 0.0), 2 * math.pi, rel_tol=1e-12, abs_tol=1e-14))
    x, v = traj.final
    assert abs(x - 1.0) < 1e-8 and abs(v) < 1e-8


def test_harmonic_energy_drift_over_100_periods():
    traj = integrate(SimSpec(HARMONIC, (1.0, 0.0), 200 * math.pi, rel_tol=1e-12, abs_tol=1e-14))
    drift = max(abs(x * x + v * v - 1.0) for _, (x, v) in traj.samples)
    assert drift < 1e-8


def test_dense_output_matches_exact_solution():
    traj = integrate(SimSpec(HARMONIC, (1.0, 0.0), 10.0, rel_tol=1e-10, abs_tol=1e-12))
    for t in (0.37, 2.5, 7.123, 9.99):
        x, v = traj(t)
        assert x == pytest.approx(math.cos(t), abs=1e-7)
        assert v == pytest.approx(-math.sin(t), abs=1e-7)


@given(st.floats(0.05, 0.5), st.floats(0.2, 3.0), st.floats(0.5, 5.0))
@settings(max_examples=25, deadline=None)
def test_time_reversal_returns_to_start(e, x0, T):
    lls = vdp(F(e).limit_denominator(1000))
    fwd = integrate(SimSpec(lls, (x0, 0.0), T, rel_tol=1e-11, abs_tol=1e-13))
    back = integrate(SimSpec(lls, fwd.final, T, rel_tol=1e-11, abs_tol=1e-13, direction=Direction.REVERSED))
    assert back.final[0] == pytest.approx(x0, abs=1e-6)
    assert back.final[1] == pytest.approx(0.0, abs=1e-6)


def test_stability_duality_under_negated_damping():
    fast = DetectSettings(t_max=2e4)
    stable = [c for c in detect_limit_cycles(vdp(), [1.0, 3.0], fast) if c.converged]
    unstable = [c for c in detect_limit_cycles(vdp(F(-1, 10)), [1.0, 3.0], fast) if c.converged]
    assert [c.stability for c in stable] == [Stability.STABLE]
    assert [c.stability for c in unstable] == [Stability.UNSTABLE]
    assert stable[0].direction == Direction.FORWARD
    assert unstable[0].direction == Direction.REVERSED
    assert stable[0].amplitude == pytest.approx(unstable[0].amplitude, rel=1e-6)


def test_van_der_pol_cycle_and_comparison():
    lls = vdp()
    found = detect_limit_cycles(lls, [0.5, 3.0])
    cycles = [c for c in found if c.converged]
    assert len(cycles) == 1
    c = cycles[0]
    assert c.amplitude == pytest.approx(2.0, rel=0.02)
    assert c.period == pytest.approx(2 * math.pi, rel=0.01)
    cmp = compare_with_kb(classify_cycles(kb_average(rescale(lls))), found, F(1, 10))
    assert cmp.all_agree and cmp.threshold == 0.5
    assert cmp.no_convergence


def test_rychkov_decay_and_capture():
    lls = get_model("rychkov").lls()
    st_fwd = DetectSettings(directions=(Direction.FORWARD,))
    inner, outer = run_seeds(lls, [0.5, 1.5], st_fwd)
    assert not inner.converged and "collapsed" in inner.note
    assert outer.converged and outer.amplitude == pytest.approx(2.0, rel=0.1)
    rev = run_seeds(lls, [1.5], DetectSettings(directions=(Direction.REVERSED,)))[0]
    assert rev.converged and rev.stability == Stability.UNSTABLE
    assert rev.amplitude == pytest.approx(1.0, rel=0.1)


def test_center_reports_neutral_orbits():
    fld = kinetic_field(*get_model("lotka_volterra").kinetic())
    runs = run_seeds(fld, [0.2, 0.5], DetectSettings(t_max=1e4))
    assert runs and all(not r.converged and "neutral" in r.note for r in runs)


def test_escape_is_reported():
    grow = LLSSystem(BiPoly({(1, 0): -1, (0, 1): F(1, 5)}))
    run = run_seeds(grow, [1.0], DetectSettings(directions=(Direction.FORWARD,)))[0]
    assert not run.converged and "escaped" in run.note


def test_kinetic_field_section_matches_lls():
    # the kinetic flow seen through (xi, xi') must obey the reduced equation
    m = get_model("glycolytic")
    lls = m.lls()
    fld = kinetic_field(*m.kinetic())
    acc = PlanarField.from_lls(lls).rhs
    h = 1e-6
    for xi, v in [(0.1, 0.05), (-0.2, 0.1), (0.3, -0.2)]:
        p = fld.from_section(xi, v)
        assert fld.to_section(*p) == pytest.approx((xi, v), abs=1e-12)
        dp = fld.rhs(*p)
        ahead = fld.to_section(p[0] + h * dp[0], p[1] + h * dp[1])
        behind = fld.to_section(p[0] - h * dp[0], p[1] - h * dp[1])
        dxi = (ahead[0] - behind[0]) / (2 * h)
        dv = (ahead[1] - behind[1]) / (2 * h)
        assert dxi == pytest.approx(v, abs=1e-6)
        assert dv == pytest.approx(acc(xi, v)[1], abs=1e-6)


def test_glycolytic_cycle_in_original_coordinates():
    fld = kinetic_field(*get_model("glycolytic").kinetic())
    found = detect_limit_cycles(fld, [0.3, 1.0], DetectSettings(directions=(Direction.FORWARD,)))
    cycles = [c for c in found if c.converged]
    assert len(cycles) == 1
    assert cycles[0].stability == Stability.STABLE


def test_simspec_validation():
    with pytest.raises(ValueError):
        SimSpec(HARMONIC, (1.0, 0.0), 0.0)
    with pytest.raises(ValueError):
        SimSpec(HARMONIC, (1.0, 0.0), 1.0, rel_tol=0.5)
    with pytest.raises(ValueError):
        SimSpec(HARMONIC, (1.0, 0.0), 1.0, abs_tol=0.0)


def test_seed_validation_and_kinetic_needs_fixed_point():
    with pytest.raises(ValueError):
        run_seeds(HARMONIC, [0.0])
    with pytest.raises(TypeError):
        run_seeds(get_model("glycolytic").kinetic()[0], [1.0])


def test_threaded_runs_are_identical(monkeypatch):
    monkeypatch.setenv("CYCLEKIT_THREADS", "1")
    a = run_seeds(vdp(), [0.5, 3.0], DetectSettings(t_max=2e4))
    monkeypatch.setenv("CYCLEKIT_THREADS", "4")
    b = run_seeds(vdp(), [0.5, 3.0], DetectSettings(t_max=2e4))
    assert repr(a) == repr(b)  # repr: failed runs carry nan fields


def test_record_keeps_trace():
    run = run_seeds(vdp(), [1.0], DetectSettings(directions=(Direction.FORWARD,)), record=True)[0]
    assert run.trace and run.trace[0] == (0.0, (1.0, 0.0))
    times = [t for t, _ in run.trace]
    assert times == sorted(times)
