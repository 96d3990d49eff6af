from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from cyclekit.polycore import BiPoly, UniPoly, as_coeff, format_coeff, poly_compose

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)

bipolys = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)), rationals, max_size=6
).map(BiPoly)

unipolys = st.lists(rationals, max_size=6).map(UniPoly)

affine = st.tuples(rationals, rationals, rationals).map(
    lambda t: BiPoly({(1, 0): t[0], (0, 1): t[1], (0, 0): t[2]})
)


@given(bipolys, bipolys, bipolys)
def test_ring_laws(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == BiPoly()
    assert p * BiPoly.constant(1) == p


@given(bipolys, bipolys, rationals, rationals)
def test_evaluation_is_a_ring_homomorphism(p, q, x, y):
    assert (p + q)(x, y) == p(x, y) + q(x, y)
    assert (p * q)(x, y) == p(x, y) * q(x, y)


@given(bipolys, affine, affine, affine, affine)
@settings(max_examples=50)
def test_compose_associative_for_affine_maps(p, a1, a2, b1, b2):
    # p o (a o b) == (p o a) o b
    inner = (poly_compose(a1, b1, b2), poly_compose(a2, b1, b2))
    assert poly_compose(p, *inner) == poly_compose(poly_compose(p, a1, a2), b1, b2)


@given(bipolys, affine, affine, rationals, rationals)
@settings(max_examples=50)
def test_compose_matches_evaluation(p, a, b, x, y):
    assert p.compose(a, b)(x, y) == p(a(x, y), b(x, y))


@given(bipolys)
def test_derivative_product_rule(p):
    x = BiPoly.x()
    assert (x * p).derivative(0) == p + x * p.derivative(0)


def test_canonical_form_drops_zeros():
    p = BiPoly({(1, 0): F(1), (0, 1): F(0)})
    assert dict(p.terms) == {(1, 0): F(1)}
    assert (BiPoly.x() - BiPoly.x()).is_zero()


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        BiPoly({(-1, 0): 1})


def test_floats_propagate_and_mark_inexact():
    p = BiPoly({(1, 0): F(1, 3)}) + BiPoly({(0, 1): 0.5})
    assert not p.is_exact()
    assert BiPoly({(1, 1): F(2)}).is_exact()


def test_as_coeff_and_format():
    assert as_coeff("0.144") == F(18, 125)
    assert as_coeff(3) == F(3)
    assert isinstance(as_coeff(0.5), float)
    assert format_coeff(F(-2, 7)) == "-2/7"
    assert format_coeff(F(4)) == "4"
    with pytest.raises(ValueError):
        as_coeff("abc")


@given(unipolys, unipolys, rationals)
def test_unipoly_ring_and_evaluation(p, q, x):
    assert (p * q)(x) == p(x) * q(x)
    assert (p + q)(x) == p(x) + q(x)


@given(unipolys, unipolys.filter(lambda d: not d.is_zero()))
def test_divmod_identity(p, d):
    q, r = p.divmod(d)
    assert q * d + r == p
    assert r.is_zero() or r.degree < d.degree


def test_squarefree_and_sturm():
    # (t - 1)^2 (t - 4)(t + 2)
    p = UniPoly([-1, 1]) * UniPoly([-1, 1]) * UniPoly([-4, 1]) * UniPoly([2, 1])
    factors = p.squarefree_factors()
    assert {k for _, k in factors} == {1, 2}
    prod = UniPoly([1])
    for f, k in factors:
        for _ in range(k):
            prod = prod * f
    assert prod == p.monic()
    assert p.sturm_count(0, 10) == 2  # distinct roots 1, 4
    assert p.sturm_count(-10, 10) == 3
