import dataclasses
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from cyclekit.averaging import RescaledOscillator, kb_average, numeric_average_oracle, rescale, wallis
from cyclekit.errors import NotOscillatory
from cyclekit.modelzoo import get_model
from cyclekit.polycore import BiPoly, UniPoly
from cyclekit.reduction import LLSSystem


def test_wallis_examples():
    assert wallis(0, 0) == 1
    assert wallis(1, 1) == F(1, 8)
    assert wallis(3, 1) == F(5, 128)
    assert wallis(1, 0) == F(1, 2)


@pytest.mark.parametrize("a", range(7))
@pytest.mark.parametrize("b", range(7))
def test_wallis_against_quadrature(a, b):
    t = 2 * np.pi * np.arange(4096) / 4096
    assert abs(float(np.mean(np.cos(t) ** (2 * a) * np.sin(t) ** (2 * b))) - float(wallis(a, b))) < 1e-12


def test_wallis_rejects_negative():
    with pytest.raises(ValueError):
        wallis(-1, 0)


# rescaling

def test_rescale_van_der_pol():
    e = F(1, 10)
    osc = rescale(LLSSystem(BiPoly({(1, 0): -1, (0, 1): e, (2, 1): -e})))
    assert (osc.sigma, osc.omega, osc.eps) == (e, 1, e)
    assert osc.B[(0, 1)] == 1 and osc.B[(2, 1)] == -1
    assert osc.b01_sign == 1
    assert not osc.warnings


def test_rescale_rychkov_warns():
    osc = rescale(get_model("rychkov").lls())
    assert osc.sigma == F(4, 5) and osc.omega == 1
    assert (osc.B[(0, 1)], osc.B[(2, 1)], osc.B[(4, 1)]) == (-1, 5, -2)
    assert osc.warnings and "heuristic" in osc.warnings[0]


def test_rescale_center_fallback():
    osc = rescale(LLSSystem(BiPoly({(1, 0): -4, (0, 2): F(1, 3)})))
    assert osc.sigma == 1 and osc.b01_sign == 0
    assert osc.B.get((0, 1), 0) == 0
    assert osc.omega == 2 and osc.eps == F(1, 4)


def test_rescale_irrational_omega_is_float():
    osc = rescale(LLSSystem(BiPoly({(1, 0): -2, (0, 1): F(1, 10)})))
    assert osc.omega == pytest.approx(math.sqrt(2))
    assert osc.omega_sq == 2 and osc.eps == F(1, 20)


def test_not_oscillatory():
    with pytest.raises(NotOscillatory):
        rescale(LLSSystem(BiPoly({(1, 0): 1, (0, 1): F(1, 10)})))


def _check_h(lls: LLSSystem):
    """eps*h(Z, Z') + Z must equal -xi''/omega^2 under xi = Z, t = tau/omega."""
    osc = rescale(lls, eps_warn=math.inf)
    if osc.h.is_exact():
        z, zd = sp.symbols("z zd")
        w = sp.Rational(osc.omega)
        h = sum(sp.Rational(c) * z**n * zd**m for (n, m), c in osc.h.terms.items())
        acc = sum(sp.Rational(c) * z**n * (w * zd) ** m for (n, m), c in lls.A.items())
        assert sp.expand(-acc / w**2 - (sp.Rational(osc.eps) * h + z)) == 0
        return
    w = float(osc.omega)
    for z, zd in [(0.3, -0.7), (1.1, 0.4), (-0.9, 1.3)]:
        acc = float(lls.rhs(z, w * zd))
        lhs = -acc / w**2
        rhs = float(osc.eps) * float(osc.h(z, zd)) + z
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("name", ["van_der_pol", "glycolytic", "rychkov", "kaiser", "lotka_volterra",
                                  "modified_brusselator"])
def test_h_reconstructs_the_lls_equation(name):
    _check_h(get_model(name).lls())


# averaged dynamics

def test_van_der_pol_radial():
    e = F(1, 10)
    avg = kb_average(rescale(LLSSystem(BiPoly({(1, 0): -1, (0, 1): e, (2, 1): -e}))))
    assert avg.radial == UniPoly([F(1, 2), F(-1, 8)])
    assert avg.phase.is_zero()


def test_blows_lloyd_radial_roots():
    avg = kb_average(rescale(get_model("blows_lloyd").lls()))
    core = avg.radial_core
    target = UniPoly([36, -49, 14, -1])
    assert core.scale(F(-1) / core.leading) == target.scale(F(-1) / target.leading)
    for rho in (1, 4, 9):
        assert core(F(rho)) == 0


def test_generic_table_reproduces_printed_equations():
    osc = RescaledOscillator.generic(3, 3)
    avg = kb_average(osc)
    r = sp.Symbol("r", positive=True)
    w, e = osc.omega, osc.eps
    B = {k: sp.Symbol(f"B{k[0]}_{k[1]}") for k in [(2, 3), (0, 3), (2, 1), (0, 1), (3, 2), (1, 2), (3, 0)]}
    dr = e * w * r / 16 * (r**2 * (B[2, 3] * r**2 * w**2 + 6 * B[0, 3] * w**2 + 2 * B[2, 1]) + 8 * B[0, 1])
    dphi = -e * r**2 / 16 * (B[3, 2] * r**2 * w**2 + 2 * B[1, 2] * w**2 + 6 * B[3, 0])
    assert sp.expand(avg.dr(r) - dr) == 0
    assert sp.expand(avg.dphi(r) - dphi) == 0


def _random_table(rng: random.Random):
    N, M = rng.randint(1, 6), rng.randint(1, 6)
    A = {}
    for n in range(N + 1):
        for m in range(M + 1):
            if (n, m) in ((0, 0), (1, 0)):
                continue
            if rng.random() < 0.6:
                A[(n, m)] = F(rng.randint(-9, 9), rng.randint(1, 6))
    A[(1, 0)] = -F(rng.choice([1, 2, 4, 9, 3, 5]), rng.choice([1, 4]))
    A.setdefault((0, 1), F(1, 7))
    if A[(0, 1)] == 0:
        A[(0, 1)] = F(1, 7)
    return LLSSystem(BiPoly(A))


def test_oracle_equivalence_on_random_tables():
    rng = random.Random(20240611)
    for _ in range(100):
        osc = rescale(_random_table(rng), eps_warn=math.inf)
        avg = kb_average(osc)
        for _ in range(5):
            r = rng.uniform(0.1, 1.5)
            dr, dphi = numeric_average_oracle(osc, r, phi=rng.uniform(0, 2 * math.pi))
            assert abs(float(avg.dr(r)) - dr) <= 1e-9 * max(1.0, abs(dr))
            assert abs(float(avg.dphi(r)) - dphi) <= 1e-9 * max(1.0, abs(dphi))


def test_oracle_examples():
    e = F(1, 10)
    vdp = rescale(LLSSystem(BiPoly({(1, 0): -1, (0, 1): e, (2, 1): -e})))
    assert abs(numeric_average_oracle(vdp, 2.0)[0]) < 1e-10
    ry = rescale(get_model("rychkov").lls())
    assert abs(numeric_average_oracle(ry, 1.0)[0]) < 1e-10
    assert abs(numeric_average_oracle(ry, 2.0)[0]) < 1e-10
    r = 1e-4
    expected = float(vdp.eps * vdp.omega * vdp.B[(0, 1)]) * r / 2
    assert numeric_average_oracle(vdp, r)[0] == pytest.approx(expected, rel=1e-6)
    with pytest.raises(ValueError):
        numeric_average_oracle(vdp, 0.0)


small = st.fractions(min_value=-3, max_value=3, max_denominator=5).filter(lambda q: q != 0)
keys = st.tuples(st.integers(0, 6), st.integers(0, 6)).filter(lambda k: k not in ((0, 0), (1, 0)))


_BASE = rescale(LLSSystem(BiPoly(
    {(1, 0): F(-4), (0, 1): F(1, 3), (2, 1): F(-1), (0, 3): F(1, 2), (1, 2): F(2), (3, 0): F(1, 4)}
)), eps_warn=math.inf)


@given(keys, small)
@settings(max_examples=200)
def test_parity_selection(key, delta):
    n, m = key
    B = dict(_BASE.B)
    B[key] = B.get(key, 0) + delta
    a = kb_average(_BASE)
    b = kb_average(dataclasses.replace(_BASE, B=B))
    if n % 2 == 1 or m % 2 == 0:
        assert a.radial_core == b.radial_core
    if (n % 2 == 0 and m % 2 == 1) or (m == 0 and n % 2 == 0):
        assert a.phase == b.phase


@pytest.mark.parametrize("N", range(1, 8))
@pytest.mark.parametrize("M", range(1, 8))
def test_generic_radial_degree(N, M):
    avg = kb_average(RescaledOscillator.generic(N, M))
    expected = ((N - N % 2) + (M - 1 + M % 2)) // 2
    assert avg.radial_core.degree == expected
