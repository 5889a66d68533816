"""Formal coordinate changes and formal vector fields.

Group law: ``(rho * mu)(t) = mu(rho(t))``, i.e. ``group_compose(rho, mu)``
applies ``rho`` first.  Under this convention the set of coordinates at a
point carries a right action ``xi . h = group_compose(xi, h)``.

Vector fields ``v(t) d/dt`` use the bracket ``[u, v] = u v' - v u'``, so the
Witt generators ``L_m = -t^(m+1) d/dt`` satisfy ``[L_m, L_n] = (m - n) L_(m+n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import NotExponentiable, NotInvertible, NotUnipotent
from .series import TruncatedSeries, _conv

_ZERO = Fraction(0)


@dataclass(frozen=True)
class CoordinateChange:
    """A series ``rho`` with ``rho(0) = 0`` and ``rho'(0) != 0``."""

    series: TruncatedSeries

    def __post_init__(self):
        s = self.series
        if s.order < 2:
            raise NotInvertible("a coordinate change needs a known linear coefficient")
        if s[0] != 0:
            raise NotInvertible(f"rho(0) must be 0, got {s[0]}")
        if s[1] == 0:
            raise NotInvertible("rho'(0) must be nonzero")

    @classmethod
    def identity(cls, order: int = 8) -> "CoordinateChange":
        return cls(TruncatedSeries.variable(order))

    @classmethod
    def from_coefficients(cls, coefficients, order: int = 8) -> "CoordinateChange":
        return cls(TruncatedSeries(coefficients, order))

    @classmethod
    def scaling(cls, factor, order: int = 8) -> "CoordinateChange":
        return cls(TruncatedSeries({1: factor}, order))

    @property
    def order(self) -> int:
        return self.series.order

    @property
    def scale(self) -> Fraction:
        return self.series[1]

    def is_unipotent(self) -> bool:
        return self.scale == 1

    def is_identity(self) -> bool:
        return self.series == TruncatedSeries.variable(self.order)

    def derivative(self) -> TruncatedSeries:
        return self.series.derive()

    def __mul__(self, other: "CoordinateChange") -> "CoordinateChange":
        return group_compose(self, other)

    def agrees_with(self, other: "CoordinateChange") -> bool:
        return self.series.agrees_with(other.series)

    def __repr__(self):
        return f"CoordinateChange({self.series!r})"

    def to_json(self) -> dict:
        return self.series.to_json()

    @classmethod
    def from_json(cls, data: Mapping) -> "CoordinateChange":
        return cls(TruncatedSeries.from_json(data))


@dataclass(frozen=True)
class Derivation:
    """The vector field ``v(t) d/dt``."""

    coefficient_series: TruncatedSeries

    @classmethod
    def from_coefficients(cls, coefficients, order: int = 8) -> "Derivation":
        return cls(TruncatedSeries(coefficients, order))

    @classmethod
    def witt(cls, m: int, order: int = 8) -> "Derivation":
        """``L_m = -t^(m+1) d/dt``, m >= -1."""
        if m < -1:
            raise ValueError("L_m needs m >= -1 to be a regular vector field")
        return cls(TruncatedSeries.monomial(m + 1, -1, order))

    @property
    def order(self) -> int:
        return self.coefficient_series.order

    def is_zero(self) -> bool:
        return self.coefficient_series.is_zero()

    def is_positive(self) -> bool:
        """Vanishes to order 2 at the origin (the nilpotent part)."""
        v = self.coefficient_series
        return v.order >= 2 and v[0] == 0 and v[1] == 0

    def apply(self, f: TruncatedSeries) -> TruncatedSeries:
        """Act on a function: ``v f'``."""
        return self.coefficient_series.mul_tight(f.derive())

    def __add__(self, other: "Derivation") -> "Derivation":
        return Derivation(self.coefficient_series + other.coefficient_series)

    def __sub__(self, other: "Derivation") -> "Derivation":
        return Derivation(self.coefficient_series - other.coefficient_series)

    def __rmul__(self, k) -> "Derivation":
        return Derivation(self.coefficient_series.scale(k))

    def agrees_with(self, other: "Derivation") -> bool:
        return self.coefficient_series.agrees_with(other.coefficient_series)

    def __repr__(self):
        return f"Derivation(({self.coefficient_series!r}) d/dt)"

    def to_json(self) -> dict:
        return {"kind": "derivation", **self.coefficient_series.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> "Derivation":
        return cls(TruncatedSeries.from_json(data))


def group_compose(rho: CoordinateChange, mu: CoordinateChange) -> CoordinateChange:
    """``rho * mu``, the coordinate change ``t -> mu(rho(t))``."""
    return CoordinateChange(mu.series.compose(rho.series))


def group_inverse(rho: CoordinateChange) -> CoordinateChange:
    return CoordinateChange(rho.series.invert_composition())


def decompose_scaling_unipotent(rho: CoordinateChange) -> tuple[Fraction, CoordinateChange]:
    """Split ``rho(t) = u(a t)`` with ``a = rho'(0)`` and ``u'(0) = 1``."""
    a = rho.scale
    unipotent = rho.series.compose(TruncatedSeries({1: 1 / a}, rho.order))
    return a, CoordinateChange(unipotent)


def lie_bracket(u: Derivation, v: Derivation) -> Derivation:
    """``[u, v] = (u v' - v u') d/dt``."""
    a, b = u.coefficient_series, v.coefficient_series
    return Derivation(a.mul_tight(b.derive()) - b.mul_tight(a.derive()))


def _flow_dense(v: tuple[Fraction, ...], n: int) -> list[Fraction]:
    # exp(D) t with D f = v f'; D raises the valuation by at least one when
    # v vanishes to order 2, so at most n terms contribute below t^n
    total = [_ZERO] * n
    term = [_ZERO] * n
    if n > 1:
        term[1] = Fraction(1)
        total[1] = Fraction(1)
    k = 0
    while any(term):
        k += 1
        deriv = [i * term[i] for i in range(1, n)]
        term = [x / k for x in _conv(v, deriv, n)]
        for i, x in enumerate(term):
            total[i] += x
    return total


def exp_derivation(v: Derivation) -> CoordinateChange:
    """Time-one flow of ``v`` started at ``t``.

    Only vector fields vanishing to order 2 are accepted (plus zero): a
    constant term would move the origin, and a linear term ``c t d/dt``
    flows to the irrational scaling ``e^c t``.
    """
    s = v.coefficient_series
    n = s.order
    if n >= 1 and s[0] != 0:
        raise NotExponentiable("translation direction does not fix the origin")
    if n >= 2 and s[1] != 0:
        raise NotExponentiable("the scaling direction c t d/dt exponentiates to e^c, which is not rational")
    if n < 2:
        raise NotExponentiable("vector field order too low to determine a coordinate change")
    return CoordinateChange(TruncatedSeries._raw(_flow_dense(s.dense(), n)))


def log_coordinate_change(rho: CoordinateChange) -> Derivation:
    """The positive vector field whose time-one flow is ``rho``.

    Solved degree by degree: adding ``c t^k`` to ``v`` changes the flow by
    ``c t^k`` plus higher-order terms.
    """
    if not rho.is_unipotent():
        raise NotUnipotent(f"rho'(0) = {rho.scale}, expected 1")
    n = rho.order
    target = rho.series.dense()
    v = [_ZERO] * n
    for k in range(2, n):
        flow = _flow_dense(tuple(v), n)
        v[k] += target[k] - flow[k]
    return Derivation(TruncatedSeries._raw(v))
