from fractions import Fraction

import hypothesis
import hypothesis.strategies as st

from formaldisc import CoordinateChange, Derivation, LaurentSeries, TruncatedSeries

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.load_profile("default")


# coefficients in {-2..2}/{1,2,3}, the range used throughout the acceptance runs
small_rationals = st.builds(Fraction, st.integers(-2, 2), st.integers(1, 3))
nonzero_rationals = small_rationals.filter(bool)


def series(order=8, lowest=0):
    return st.lists(small_rationals, min_size=order - lowest, max_size=order - lowest).map(
        lambda cs: TruncatedSeries({lowest + i: c for i, c in enumerate(cs)}, order))


def coordinate_changes(order=8, unipotent=False):
    lead = st.just(Fraction(1)) if unipotent else nonzero_rationals
    return st.tuples(lead, st.lists(small_rationals, min_size=order - 2, max_size=order - 2)).map(
        lambda p: CoordinateChange.from_coefficients({1: p[0], **{k + 2: c for k, c in enumerate(p[1])}}, order))


def positive_derivations(order=8):
    return st.lists(small_rationals, min_size=order - 2, max_size=order - 2).map(
        lambda cs: Derivation.from_coefficients({k + 2: c for k, c in enumerate(cs)}, order))


def laurent(depth=6, order=8):
    return st.tuples(st.integers(0, depth), st.lists(small_rationals, min_size=order + depth,
                                                     max_size=order + depth)).map(
        lambda p: LaurentSeries({k: c for k, c in zip(range(-p[0], order), p[1])}, order))
