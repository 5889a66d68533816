"""k-differentials on the punctured disc and the canonical End-valued differential.

A k-differential ``f(t) (dt)^k`` written in the coordinate ``s = rho(t)``
as ``g(s) (ds)^k`` satisfies ``f(t) = g(rho(t)) rho'(t)^k``;
:func:`pullback_kdifferential` computes the right-hand side.

For a linear map ``a: K -> End(V)`` on a finite-dimensional ``V`` that kills
``t^n`` for ``n`` large, ``omega = sum_n a(t^n) t^(-n-1) dt`` does not depend
on the coordinate.  The bases ``t^n`` and ``t^(-n-1) dt`` are dual under the
residue pairing, so ``omega`` is the image of the identity; the check below
recomputes it in a new coordinate and compares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .coords import CoordinateChange
from .errors import FractionalPowerUndefined, NotNilpotent, TruncationError
from .report import CheckReport
from .series import LaurentSeries, TruncatedSeries
from .rational import format_fraction, to_fraction

Matrix = tuple  # tuple of row tuples of Fractions

_ZERO = Fraction(0)


def zero_matrix(dim: int) -> Matrix:
    return tuple((_ZERO,) * dim for _ in range(dim))


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a, b))


def mat_scale(a: Matrix, k) -> Matrix:
    return tuple(tuple(k * x for x in r) for r in a)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(r, c)), _ZERO) for c in cols) for r in a)


def mat_vec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum((x * y for x, y in zip(r, v)), _ZERO) for r in a)


def mat_is_zero(a: Matrix) -> bool:
    return not any(x for r in a for x in r)


# -- k-differentials ----------------------------------------------------------


@dataclass(frozen=True)
class KDifferential:
    """``density(t) (dt)^weight``."""

    weight: Fraction
    density: LaurentSeries

    def __post_init__(self):
        object.__setattr__(self, "weight", to_fraction(self.weight))
        if isinstance(self.density, TruncatedSeries):
            object.__setattr__(self, "density", LaurentSeries.from_series(self.density))

    def __add__(self, other: "KDifferential") -> "KDifferential":
        if self.weight != other.weight:
            raise ValueError("only differentials of equal weight can be added")
        return KDifferential(self.weight, self.density + other.density)

    def __mul__(self, other: "KDifferential") -> "KDifferential":
        return KDifferential(self.weight + other.weight, self.density * other.density)

    def residue(self) -> Fraction:
        return self.density.residue()

    def agrees_with(self, other: "KDifferential") -> bool:
        return self.weight == other.weight and self.density.agrees_with(other.density)

    def to_json(self) -> dict:
        d = self.density
        return {
            "weight": format_fraction(self.weight),
            "principal": [[k, format_fraction(c)] for k, c in sorted(d.principal.items())],
            "regular": [[k, format_fraction(c)] for k, c in sorted(d.coefficients.items()) if k >= 0],
            "truncation_order": d.order,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KDifferential":
        pairs = {}
        for k, c in list(data.get("principal", [])) + list(data.get("regular", [])):
            pairs[int(k)] = to_fraction(c)
        return cls(to_fraction(data["weight"]), LaurentSeries(pairs, int(data["truncation_order"])))


def jacobian_power(rho: CoordinateChange, k) -> TruncatedSeries:
    """``rho'(t)^k``; rational non-integer k needs ``rho'(0) = 1``."""
    k = to_fraction(k)
    if k.denominator != 1 and not rho.is_unipotent():
        raise FractionalPowerUndefined(
            f"weight {k} is fractional and rho'(0) = {rho.scale} != 1"
        )
    return rho.derivative().power(k)


def pullback_kdifferential(d: KDifferential, rho: CoordinateChange) -> KDifferential:
    """``g(rho(t)) rho'(t)^k (dt)^k`` for ``d = g(s) (ds)^k``.

    Functorial in the contravariant sense:
    ``pullback(pullback(d, rho), mu) == pullback(d, group_compose(mu, rho))``.
    """
    jac = jacobian_power(rho, d.weight)
    return KDifferential(d.weight, d.density.compose(rho.series) * LaurentSeries.from_series(jac))


# -- End-valued differentials -------------------------------------------------


class LinearAction:
    """A linear map from Laurent monomials ``t^n`` to operators on ``Q^dim``.

    ``operator(n)`` must vanish for ``n < -negative_depth`` and for
    ``n >= nilpotence_bound``.  Subclasses implement :meth:`operator`.
    """

    dim: int
    negative_depth: int = 0
    nilpotence_bound: int

    def operator(self, n: int) -> Matrix:
        raise NotImplementedError

    def operator_of(self, f: LaurentSeries) -> Matrix:
        """Linear extension to a Laurent series: ``sum_n f_n operator(n)``."""
        if f.order < self.nilpotence_bound:
            raise TruncationError(
                f"need coefficients below degree {self.nilpotence_bound}, series known to {f.order}"
            )
        out = zero_matrix(self.dim)
        for n in range(max(f.lowest, -self.negative_depth), self.nilpotence_bound):
            c = f[n]
            if c:
                out = mat_add(out, mat_scale(self.operator(n), c))
        return out


class MultiplicationAction(LinearAction):
    """Multiplication on ``Q[t]/t^N`` (basis ``1, t, ..., t^(N-1)``).

    Nonnegative powers act by multiplication; negative powers act by zero.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need N >= 1")
        self.dim = n
        self.nilpotence_bound = n
        self.negative_depth = 0

    def operator(self, k: int) -> Matrix:
        n = self.dim
        rows = [[_ZERO] * n for _ in range(n)]
        if 0 <= k < n:
            for j in range(n - k):
                rows[j + k][j] = Fraction(1)
        return tuple(tuple(r) for r in rows)

    def realize(self, components: Sequence[LaurentSeries]) -> LaurentSeries:
        """Identify the basis vector ``t^j`` of ``Q[t]/t^N`` with ``t^j`` on the disc."""
        total = None
        for j, comp in enumerate(components):
            term = comp.shift(j)
            total = term if total is None else total + term
        return total


@dataclass(frozen=True)
class EndValuedDifferential:
    """``sum_i A_i f_i(t) dt`` with matrices ``A_i`` on one module."""

    dim: int
    terms: tuple = field(default_factory=tuple)  # ((Matrix, LaurentSeries), ...)

    @property
    def order(self) -> int:
        return min((f.order for _, f in self.terms), default=10**9)

    @property
    def lowest(self) -> int:
        return min((f.lowest for _, f in self.terms), default=0)

    def coefficient(self, degree: int) -> Matrix:
        """Matrix coefficient of ``t^degree dt``."""
        out = zero_matrix(self.dim)
        for a, f in self.terms:
            c = f[degree]
            if c:
                out = mat_add(out, mat_scale(a, c))
        return out

    def expanded(self) -> dict[int, Matrix]:
        return {d: self.coefficient(d) for d in range(self.lowest, self.order)}

    def apply(self, vector: Sequence) -> list[LaurentSeries]:
        """``omega(v)``: one Laurent series (times dt) per module coordinate."""
        vector = [to_fraction(x) for x in vector]
        order = self.order
        comps = [LaurentSeries({}, order) for _ in range(self.dim)]
        for a, f in self.terms:
            image = mat_vec(a, vector)
            comps = [c + f.scale(x) for c, x in zip(comps, image)]
        return comps

    def trace(self) -> LaurentSeries:
        total = LaurentSeries({}, self.order)
        for a, f in self.terms:
            total = total + f.scale(sum((a[i][i] for i in range(self.dim)), _ZERO))
        return total

    def perturbed(self, degree: int, row: int, col: int, delta=1) -> "EndValuedDifferential":
        """Copy with one matrix coefficient changed (mutation control)."""
        bump = [[_ZERO] * self.dim for _ in range(self.dim)]
        bump[row][col] = to_fraction(delta)
        extra = (tuple(tuple(r) for r in bump), LaurentSeries.monomial(degree, 1, self.order))
        return EndValuedDifferential(self.dim, self.terms + (extra,))


def canonical_differential(action: LinearAction, order: int = 8) -> EndValuedDifferential:
    """``sum_n action(t^n) t^(-n-1) dt`` over the finitely many nonzero terms.

    The action must kill ``t^n`` from ``nilpotence_bound`` on; this is
    spot-checked on a window of ``dim + 1`` further exponents and on the
    nilpotence of ``action(t)`` itself.
    """
    dim = action.dim
    bound = action.nilpotence_bound
    for n in range(bound, bound + dim + 1):
        if not mat_is_zero(action.operator(n)):
            raise NotNilpotent(f"action(t^{n}) is nonzero beyond the declared bound {bound}")
    generator = action.operator(1)
    power = generator
    for _ in range(max(bound, dim) - 1):
        power = mat_mul(power, generator)
    if bound >= 1 and not mat_is_zero(power):
        raise NotNilpotent("action(t) is not nilpotent within the declared bound")
    terms = []
    for n in range(-action.negative_depth, bound):
        a = action.operator(n)
        if not mat_is_zero(a):
            terms.append((a, LaurentSeries.monomial(-n - 1, 1, order)))
    return EndValuedDifferential(dim, tuple(terms))


def recompute_in_coordinate(action: LinearAction, rho: CoordinateChange) -> EndValuedDifferential:
    """``sum_n action(s^n) s^(-n-1) ds`` for ``s = rho(t)``, written in ``t``.

    Negative ``n`` now contributes (``s^-k`` has a regular part), but only at
    ``t``-degree ``>= k - 1``; the sum is cut where the remaining terms can
    no longer reach the known range.
    """
    m = rho.order
    bound = action.nilpotence_bound
    known = m - 1 - bound
    if known <= -bound:
        raise TruncationError("coordinate change known to too low an order for this action")
    jac = LaurentSeries.from_series(rho.derivative())
    unit_inv = TruncatedSeries._raw(rho.series.dense()[1:]).reciprocal()
    terms = []
    for n in range(-max(known, 0), bound):
        if n >= 0:
            diff = LaurentSeries.from_series(unit_inv.power(n + 1)).shift(-n - 1) * jac
            s_n = LaurentSeries.from_series(rho.series.power(n))
        else:
            k = -n
            s_n = LaurentSeries.from_series(unit_inv.power(k)).shift(-k)
            diff = LaurentSeries.from_series(rho.series.power(k - 1)) * jac
        a = action.operator_of(s_n)
        if not mat_is_zero(a):
            terms.append((a, diff.truncate(min(diff.order, known))))
    return EndValuedDifferential(action.dim, tuple(terms))


def check_differential_invariance(omega: EndValuedDifferential, rho: CoordinateChange,
                                  action: LinearAction) -> CheckReport:
    """Compare ``omega`` with its recomputation in the coordinate ``rho(t)``.

    The transport rule is the linear extension of ``action`` to Laurent
    series (for multiplication actions this is substitution).
    """
    other = recompute_in_coordinate(action, rho)
    lo = min(omega.lowest, other.lowest)
    hi = min(omega.order, other.order)
    for d in range(lo, hi):
        a, b = omega.coefficient(d), other.coefficient(d)
        if a != b:
            for i in range(omega.dim):
                for j in range(omega.dim):
                    if a[i][j] != b[i][j]:
                        return CheckReport(
                            "canonical_differential", False,
                            counterexample={"degree": d, "entry": [i, j],
                                            "expected": format_fraction(b[i][j]),
                                            "actual": format_fraction(a[i][j]),
                                            "rho": rho.to_json()},
                            details={"compared_degrees": [lo, hi]})
    return CheckReport("canonical_differential", True, details={"compared_degrees": [lo, hi]})


def residue_pairing(etas: Sequence[KDifferential], mus: Sequence) -> tuple[Fraction, ...]:
    """Per-slot ``Res(eta_j * mu_j)`` for weight-1 ``eta_j`` and functions ``mu_j``."""
    if len(etas) != len(mus):
        raise ValueError("one differential per slot")
    out = []
    for eta, mu in zip(etas, mus):
        if eta.weight != 1:
            raise ValueError("residue pairing needs weight-1 differentials")
        if isinstance(mu, KDifferential):
            if mu.weight != 0:
                raise ValueError("paired sections must have weight 0")
            mu = mu.density
        if isinstance(mu, TruncatedSeries):
            mu = LaurentSeries.from_series(mu)
        out.append((eta.density * mu).residue())
    return tuple(out)
