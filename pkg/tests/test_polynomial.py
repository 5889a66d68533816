from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from formaldisc import GaussianRational, Poly

from conftest import small_rationals

exponents = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3))
polys = st.dictionaries(exponents, small_rationals, max_size=5).map(lambda t: Poly(3, t))
points = st.tuples(small_rationals, small_rationals, small_rationals)

z1, z2, z3 = (Poly.variable(3, i) for i in range(3))


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == Poly.zero(3)


@given(polys, polys, points)
def test_evaluation_is_a_ring_map(a, b, p):
    assert (a * b).evaluate(p) == a.evaluate(p) * b.evaluate(p)
    assert (a + b).evaluate(p) == a.evaluate(p) + b.evaluate(p)


@given(polys, polys)
def test_leibniz(a, b):
    for i in range(3):
        assert (a * b).derive(i) == a.derive(i) * b + a * b.derive(i)


@given(polys, polys, polys, polys, points)
def test_substitution_commutes_with_evaluation(f, g1, g2, g3, p):
    images = [g1, g2, g3]
    assert f.substitute(images).evaluate(p) == f.evaluate([g.evaluate(p) for g in images])


def test_basic_values():
    f = (z1 - z2) ** 2
    assert f == z1 * z1 - 2 * z1 * z2 + z2 * z2
    assert f.degree() == 2 and f.degree_in(2) == 0 and Poly.zero(3).degree_in(0) == -1
    assert f.evaluate([3, 1, 0]) == 4
    assert (z1 ** -2).terms == {(-2, 0, 0): 1}
    assert (2 * z1) ** -1 == Poly.monomial(3, {0: -1}, Fraction(1, 2))
    with pytest.raises(ValueError):
        (z1 + z2) ** -1
    i = GaussianRational(0, 1)
    assert (z1 * z1 + 1).evaluate([i, 0, 0]) == 0


def test_permute_and_truncate():
    f = z1 ** 2 * z3
    assert f.permute_variables([1, 2, 0]) == z2 ** 2 * z1
    assert (z1 ** 3 + z2 + z3 ** 2).truncate_total_degree(1, [0, 1]) == z2 + z3 ** 2
    assert set((z1 ** 2 + z2 + 1).homogeneous_parts()) == {0, 1, 2}


@given(polys)
def test_json_roundtrip(f):
    assert Poly.from_json(3, f.to_json()) == f
