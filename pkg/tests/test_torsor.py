import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from formaldisc import (
    BadRange,
    CoordinateChange,
    CoordinateTorsor,
    DensityElement,
    KDifferential,
    LaurentSeries,
    ModuleSection,
    ModuleSpec,
    PointAtlas,
    TwistElement,
    check_representation_law,
    check_section_invariance,
    exact_sequence_check,
    group_compose,
    pair_dual_section,
    pullback_kdifferential,
    torsor_translate,
    transform_section,
    twist_normalize,
)
from formaldisc.torsor import random_atlas, torsor_act

from conftest import coordinate_changes, small_rationals

C = CoordinateChange.from_coefficients
SPEC = ModuleSpec(1, 6)


# -- torsor -------------------------------------------------------------------

def test_translate_examples():
    rho = C({1: 2, 2: 1, 3: -1})
    assert torsor_translate(rho, rho).is_identity()
    assert torsor_translate(CoordinateChange.identity(), rho) == rho
    assert torsor_translate(C({1: 2}), C({1: 2, 2: 4})) == C({1: 1, 2: 1})


@given(coordinate_changes(), coordinate_changes(), coordinate_changes())
def test_torsor_axioms(a, b, c):
    h = torsor_translate(a, b)
    assert torsor_act(a, h) == b
    # translating a -> b -> c agrees with a -> c
    assert group_compose(torsor_translate(a, b), torsor_translate(b, c)) == torsor_translate(a, c)
    torsor = CoordinateTorsor()
    assert torsor.translate(torsor.base, a) == a


# -- twists ---------------------------------------------------------------------

def test_normalize_examples():
    base = TwistElement(DensityElement.basis(SPEC, 2), CoordinateChange.identity())
    assert twist_normalize(base) is base
    scaled = twist_normalize(TwistElement(DensityElement.basis(SPEC, 1), CoordinateChange.scaling(2)))
    assert scaled.is_normalized()
    assert scaled.density.agrees_with(DensityElement.basis(SPEC, 1, 4))


elements = st.lists(small_rationals, min_size=SPEC.dim, max_size=SPEC.dim).map(
    lambda cs: DensityElement(SPEC, cs))


@given(elements, coordinate_changes(10))
def test_normalize_is_idempotent(g, xi):
    once = twist_normalize(TwistElement(g, xi))
    assert twist_normalize(once) == once


@given(elements, elements, coordinate_changes(10, unipotent=True))
def test_normalize_is_injective(g, h, xi):
    a = twist_normalize(TwistElement(g, xi)).density
    b = twist_normalize(TwistElement(h, xi)).density
    assert a.agrees_with(b) == (g == h)


# -- section invariance ---------------------------------------------------------

def test_identity_atlas():
    S = ModuleSection.basis(SPEC, [1, 3])
    assert transform_section(S, PointAtlas.identity(2)).first_mismatch(S.vector()) is None
    assert check_section_invariance(S, PointAtlas.identity(2)).passed


def test_single_point_scaling():
    S = ModuleSection.basis(SPEC, [2])
    report = check_section_invariance(S, PointAtlas(1, (CoordinateChange.scaling(2),)))
    assert report.passed
    vec = transform_section(S, PointAtlas(1, (CoordinateChange.scaling(2),)))
    (_, factors), = vec.entries
    assert dict(factors[0].coefficients) == {2: 1}


def test_independent_scalings():
    S = ModuleSection.basis(SPEC, [1, 2])
    atlas = PointAtlas(2, (CoordinateChange.scaling(2), CoordinateChange.scaling(3)))
    assert check_section_invariance(S, atlas).passed


def test_unipotent_change_at_one_point():
    S = ModuleSection.basis(SPEC, [0, 2])
    atlas = PointAtlas(2, (C({1: 1, 2: 1}), CoordinateChange.identity()))
    assert check_section_invariance(S, atlas, order=6).passed
    bad = check_section_invariance(S, atlas, order=6, weight_offset=1)
    assert not bad.passed and bad.counterexample["slot"] == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_random_atlases(n):
    rng = random.Random(n)
    for _ in range(15):
        atlas = random_atlas(rng, n)
        S = ModuleSection.basis(SPEC, [rng.randint(0, 4) for _ in range(n)])
        assert check_section_invariance(S, atlas).passed


def test_section_vector_orderings():
    vec = ModuleSection.basis(SPEC, [0, 1, 2]).vector()
    assert [o for o, _ in vec.entries] == [(1, 2, 3), (2, 3, 1), (3, 1, 2)]


def test_atlas_composition_is_consistent():
    S = ModuleSection.basis(SPEC, [1])
    a = PointAtlas(1, (C({1: 1, 2: 1}),))
    b = PointAtlas(1, (C({1: 2, 3: 1}),))
    assert check_section_invariance(S, a.then(b)).passed


def test_atlas_json_roundtrip():
    atlas = PointAtlas(2, (C({1: 2, 2: Fraction(1, 3)}), CoordinateChange.identity()))
    data = atlas.to_json()
    assert data["n"] == 2 and data["centers"] == [["0/1", "0/1"], ["1/1", "0/1"]]
    assert PointAtlas.from_json(data) == atlas
    with pytest.raises(ValueError):
        PointAtlas(2, atlas.changes, (0, 0))


# -- representation law ---------------------------------------------------------

def test_representation_law_examples():
    spec = ModuleSpec(1, 12)
    assert check_representation_law(spec, trials=30, scalings_only=True).passed
    assert check_representation_law(spec, trials=100, unipotent=True).passed
    assert check_representation_law(spec, trials=30).passed
    assert check_representation_law(ModuleSpec(Fraction(1, 2), 8), trials=30).passed
    bad = check_representation_law(spec, trials=30, convention="left")
    assert not bad.passed and bad.details["convention"] == "left"


# -- exact sequence -------------------------------------------------------------

@pytest.mark.parametrize("spec", [ModuleSpec(1, 8), ModuleSpec(Fraction(1, 2), 5), ModuleSpec(0, 3)])
def test_exact_sequence_at_every_grade(spec):
    for n in range(spec.dim):
        report = exact_sequence_check(spec, spec.grade(n))
        assert report.passed, report.counterexample
        assert report.details["dimensions"][2] == 1


def test_exact_sequence_range():
    with pytest.raises(BadRange):
        exact_sequence_check(SPEC, 0)
    with pytest.raises(BadRange):
        exact_sequence_check(SPEC, 8)


# -- dual pairing ---------------------------------------------------------------

def dt_over_t():
    return KDifferential(1, LaurentSeries({-1: 1}, 8))


def test_pairing_examples():
    S = ModuleSection((DensityElement(SPEC, {0: 3, 2: 1}), DensityElement(SPEC, {0: -2})))
    assert pair_dual_section([dt_over_t(), dt_over_t()], S) == (3, -2)
    regular = KDifferential(1, LaurentSeries({0: 1, 1: 5}, 8))
    assert pair_dual_section([regular, regular], S) == (0, 0)


@given(coordinate_changes(10, unipotent=True), st.lists(small_rationals, min_size=4, max_size=4))
def test_pairing_invariant_under_change_at_one_slot(rho, cs):
    g = DensityElement(ModuleSpec(0, 3), cs)
    eta = KDifferential(1, LaurentSeries({-3: 1, -1: 2, 0: 1}, 8))
    before = pair_dual_section([eta], ModuleSection((g,)))
    moved_eta = pullback_kdifferential(eta, rho)
    moved_g = pullback_kdifferential(KDifferential(0, LaurentSeries.from_series(g.as_series())), rho)
    assert pair_dual_section([moved_eta], [moved_g.density]) == before
