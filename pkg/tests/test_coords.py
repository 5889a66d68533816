from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from formaldisc import (
    CoordinateChange,
    Derivation,
    NotExponentiable,
    NotInvertible,
    NotUnipotent,
    TruncatedSeries,
    decompose_scaling_unipotent,
    exp_derivation,
    group_compose,
    group_inverse,
    lie_bracket,
    log_coordinate_change,
)

from conftest import coordinate_changes, positive_derivations, small_rationals
from oracles import flow

C = CoordinateChange.from_coefficients
ident = CoordinateChange.identity


def test_invariants_enforced():
    with pytest.raises(NotInvertible):
        C({0: 1, 1: 1})
    with pytest.raises(NotInvertible):
        C({2: 1})


def test_compose_examples():
    assert group_compose(CoordinateChange.scaling(2), CoordinateChange.scaling(3)) == CoordinateChange.scaling(6)
    mu = C({1: 1, 2: 5, 3: -1})
    assert group_compose(ident(), mu) == mu
    # mu(rho(t)) with rho = t + t^2, mu = t + t^3
    got = group_compose(C({1: 1, 2: 1}, 5), C({1: 1, 3: 1}, 5))
    assert got == C({1: 1, 2: 1, 3: 1, 4: 3}, 5)


def test_inverse_examples():
    assert group_inverse(ident()) == ident()
    assert group_inverse(CoordinateChange.scaling(2)) == CoordinateChange.scaling(Fraction(1, 2))
    assert group_inverse(C({1: 1, 2: 1}, 5)) == C({1: 1, 2: -1, 3: 2, 4: -5}, 5)


def test_decompose_examples():
    assert decompose_scaling_unipotent(CoordinateChange.scaling(2)) == (2, ident())
    assert decompose_scaling_unipotent(C({1: 1, 2: 1})) == (1, C({1: 1, 2: 1}))
    assert decompose_scaling_unipotent(C({1: 2, 2: 4})) == (2, C({1: 1, 2: 1}))


def test_bracket_examples():
    v = Derivation.from_coefficients({0: 1, 3: 2})
    assert lie_bracket(v, v).is_zero()
    got = lie_bracket(Derivation.from_coefficients({1: -1}), Derivation.from_coefficients({2: -1}))
    assert got.agrees_with(Derivation.from_coefficients({2: 1}))
    got = lie_bracket(Derivation.from_coefficients({0: 1}), Derivation.from_coefficients({1: 1}))
    assert got.agrees_with(Derivation.from_coefficients({0: 1}))


def test_exp_examples():
    assert exp_derivation(Derivation.from_coefficients({}, 8)) == ident()
    assert exp_derivation(Derivation.from_coefficients({2: -1}, 5)) == C({1: 1, 2: -1, 3: 1, 4: -1}, 5)
    with pytest.raises(NotExponentiable):
        exp_derivation(Derivation.from_coefficients({0: 1}))
    with pytest.raises(NotExponentiable):
        exp_derivation(Derivation.from_coefficients({1: 1}))


def test_log_examples():
    assert log_coordinate_change(ident()).is_zero()
    v = Derivation.from_coefficients({2: -1})
    assert log_coordinate_change(exp_derivation(v)).agrees_with(v)
    rho = C({1: 1, 2: 1})
    assert exp_derivation(log_coordinate_change(rho)) == rho
    with pytest.raises(NotUnipotent):
        log_coordinate_change(CoordinateChange.scaling(2))


def test_log_of_t_plus_t2_frozen():
    # solved independently with the flow oracle, degree by degree
    v = log_coordinate_change(C({1: 1, 2: 1}, 6)).coefficient_series
    assert v == TruncatedSeries({2: 1, 3: -1, 4: Fraction(3, 2), 5: Fraction(-8, 3)}, 6)
    assert flow(list(v.dense()), 6) == [0, 1, 1, 0, 0, 0]


def test_json():
    v = Derivation.from_coefficients({2: 1}, 4)
    assert v.to_json() == {"kind": "derivation", "coefficients": [[2, "1/1"]], "truncation_order": 4}
    assert Derivation.from_json(v.to_json()) == v
    rho = C({1: 2, 3: 1})
    assert CoordinateChange.from_json(rho.to_json()) == rho


@given(coordinate_changes(), coordinate_changes(), coordinate_changes())
def test_group_axioms(a, b, c):
    assert group_compose(group_compose(a, b), c) == group_compose(a, group_compose(b, c))
    assert group_compose(a, group_inverse(a)) == ident()
    assert group_compose(group_inverse(a), a) == ident()
    assert group_compose(a, ident()) == a == group_compose(ident(), a)


@given(coordinate_changes())
def test_decomposition_recomposes(rho):
    a, u = decompose_scaling_unipotent(rho)
    assert u.is_unipotent()
    assert group_compose(CoordinateChange.scaling(a), u) == rho


@given(positive_derivations(10))
def test_exp_matches_flow_oracle(v):
    assert list(exp_derivation(v).series.dense()) == flow(list(v.coefficient_series.dense()), 10)


@given(positive_derivations(10))
def test_log_exp_roundtrip(v):
    assert log_coordinate_change(exp_derivation(v)).agrees_with(v)


@given(coordinate_changes(10, unipotent=True))
def test_exp_log_roundtrip(rho):
    assert exp_derivation(log_coordinate_change(rho)) == rho


def derivations(order=8):
    return st.lists(small_rationals, min_size=order, max_size=order).map(
        lambda cs: Derivation.from_coefficients(dict(enumerate(cs)), order))


@given(derivations(), derivations(), derivations())
def test_bracket_antisymmetry_and_jacobi(u, v, w):
    assert lie_bracket(u, v).agrees_with(Fraction(-1) * lie_bracket(v, u))
    jac = (lie_bracket(u, lie_bracket(v, w)) + lie_bracket(v, lie_bracket(w, u))
           + lie_bracket(w, lie_bracket(u, v)))
    assert jac.coefficient_series.is_zero()


@pytest.mark.parametrize("m", range(-1, 4))
@pytest.mark.parametrize("n", range(-1, 4))
def test_witt_relations(m, n):
    got = lie_bracket(Derivation.witt(m, 10), Derivation.witt(n, 10))
    want = (m - n) * Derivation.witt(m + n, 10) if m + n >= -1 else Derivation.from_coefficients({}, 10)
    assert got.agrees_with(want)
