from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from formaldisc import (
    CoordinateChange,
    DensityElement,
    Derivation,
    FractionalPowerUndefined,
    ModuleSpec,
    act_pullback,
    check_admissible,
    derivation_action,
    exp_derivation,
    filtration_truncate,
    grading_operator,
    group_compose,
    lie_bracket,
    translation_operator,
)
from formaldisc.density import TENSOR_DENSITIES, exp_action
from formaldisc.suite import MisSignedGrading

from conftest import coordinate_changes, positive_derivations, small_rationals

SPEC = ModuleSpec(1, 6)
lambdas = st.sampled_from([Fraction(0), Fraction(1), Fraction(2), Fraction(-1), Fraction(1, 2)])


def elements(spec=SPEC):
    return st.lists(small_rationals, min_size=spec.dim, max_size=spec.dim).map(
        lambda cs: DensityElement(spec, cs))


def basis(spec, n, c=1):
    return DensityElement.basis(spec, n, c)


def test_grading_examples():
    assert grading_operator(basis(SPEC, 2)) == basis(SPEC, 2, 3)
    s0 = ModuleSpec(0, 4)
    assert grading_operator(basis(s0, 0)) == DensityElement.zero(s0)
    half = ModuleSpec(Fraction(1, 2), 3)
    got = grading_operator(DensityElement(half, {0: 1, 1: 1}))
    assert got == DensityElement(half, {0: Fraction(1, 2), 1: Fraction(3, 2)})


def test_translation_examples():
    s0 = ModuleSpec(0, 4)
    assert translation_operator(basis(s0, 3)) == basis(s0, 2, -3)
    assert translation_operator(basis(SPEC, 0)) == DensityElement.zero(SPEC)


@pytest.mark.parametrize("lam", [0, 1, Fraction(1, 2), -2])
def test_minus_euler_field_acts_by_minus_grade(lam):
    spec = ModuleSpec(lam, 5)
    v = Derivation.from_coefficients({1: -1}, 10)
    for n in range(spec.dim):
        got = derivation_action(v, basis(spec, n))
        assert got.agrees_with(basis(spec, n, -(n + spec.lam)))
        assert got.agrees_with(grading_operator(basis(spec, n)).scale(-1))


def test_minus_t_squared_kills_constants():
    spec = ModuleSpec(0, 4)
    v = Derivation.from_coefficients({2: -1}, 10)
    assert derivation_action(v, basis(spec, 0)).agrees_with(DensityElement.zero(spec))


@given(elements(), st.integers(-1, 3), st.integers(-1, 3))
def test_action_respects_brackets(e, a, b):
    u, v = Derivation.witt(a, 12), Derivation.witt(b, 12)
    lhs = derivation_action(lie_bracket(u, v), e)
    rhs = derivation_action(u, derivation_action(v, e)) - derivation_action(v, derivation_action(u, e))
    assert lhs.agrees_with(rhs)


def test_pullback_examples():
    e = DensityElement(SPEC, {0: 1, 3: 2})
    assert act_pullback(CoordinateChange.identity(10), e).agrees_with(e)
    assert act_pullback(CoordinateChange.scaling(2, 10), basis(SPEC, 1)).agrees_with(basis(SPEC, 1, 4))
    got = act_pullback(CoordinateChange.from_coefficients({1: 1, 2: 1}, 10), basis(SPEC, 0))
    assert got.agrees_with(DensityElement(SPEC, {0: 1, 1: 2}))
    assert got.known_below == SPEC.dim and not got.overflow


def test_pullback_flags_overflow():
    got = act_pullback(CoordinateChange.from_coefficients({1: 1, 2: 1}, 10), basis(SPEC, 6))
    assert got.overflow and got.components[6] == 1


def test_fractional_weight_needs_unipotent():
    half = ModuleSpec(Fraction(1, 2), 4)
    with pytest.raises(FractionalPowerUndefined):
        act_pullback(CoordinateChange.scaling(2, 8), basis(half, 0))


@given(elements(), coordinate_changes(10), coordinate_changes(10))
def test_representation_law(e, rho, mu):
    # R(rho * mu) = R(rho) R(mu) with (rho * mu)(t) = mu(rho(t))
    lhs = act_pullback(group_compose(rho, mu), e)
    rhs = act_pullback(rho, act_pullback(mu, e))
    assert lhs.known_below == SPEC.dim
    assert lhs.agrees_with(rhs)


def test_representation_law_fails_in_the_other_order():
    e = basis(SPEC, 0)
    rho = CoordinateChange.from_coefficients({1: 1, 2: 1}, 10)
    mu = CoordinateChange.from_coefficients({1: 2, 3: 1}, 10)
    lhs = act_pullback(group_compose(rho, mu), e)
    assert not lhs.agrees_with(act_pullback(mu, act_pullback(rho, e)))


@given(elements(), positive_derivations(10))
def test_exponential_matches_series_of_the_action(e, v):
    assert act_pullback(exp_derivation(v), e).agrees_with(exp_action(TENSOR_DENSITIES, v, e))


@given(elements(), coordinate_changes(10, unipotent=True))
def test_unipotent_acts_trivially_on_graded_pieces(e, rho):
    diff = act_pullback(rho, e) - e
    lead = e.support()[0] if e.support() else None
    if lead is not None:
        assert filtration_truncate(diff, SPEC.grade(lead)).components[: lead + 1] == (0,) * (lead + 1)


def test_filtration_examples():
    e = DensityElement(SPEC, {0: 1, 2: -3, 6: 5})
    assert filtration_truncate(e, SPEC.grade(SPEC.grade_cutoff)) == e
    assert filtration_truncate(e, Fraction(1, 2)) == DensityElement.zero(SPEC)
    assert filtration_truncate(e, 3) == DensityElement(SPEC, {0: 1, 2: -3})


@given(lambdas, st.integers(0, 8))
def test_filtration_steps_have_dimension_one(lam, cutoff):
    spec = ModuleSpec(lam, cutoff)
    first = spec.grade(0)
    for k in range(cutoff + 1):
        m = first + k
        assert spec.filtration_dim(m) - spec.filtration_dim(m - 1) == 1
    assert spec.filtration_dim(first - 1) == 0


@pytest.mark.parametrize("spec", [ModuleSpec(1, 10), ModuleSpec(0, 0), ModuleSpec(Fraction(1, 2), 6),
                                  ModuleSpec(-1, 5)])
def test_admissible(spec):
    report = check_admissible(spec)
    assert report.passed, report.counterexample


def test_mis_signed_grading_is_flagged():
    report = check_admissible(ModuleSpec(1, 10), MisSignedGrading())
    assert not report.passed
    flags = report.details["axioms"]
    assert flags["grading"] is False
    assert all(v for k, v in flags.items() if k != "grading")


def test_json_roundtrip():
    e = DensityElement(ModuleSpec(Fraction(1, 2), 3), {1: Fraction(-2, 3)})
    data = e.to_json()
    assert data == {"lambda": "1/2", "grade_cutoff": 3, "components": [[1, "-2/3"]]}
    assert DensityElement.from_json(data) == e
    with pytest.raises(ValueError):
        DensityElement(SPEC, {7: 1})
