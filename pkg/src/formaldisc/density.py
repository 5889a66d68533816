"""Tensor densities of weight lambda: the reference admissible module.

Basis ``t^n (dt)^lam`` for ``0 <= n <= grade_cutoff``; the grade of
``t^n (dt)^lam`` is ``n + lam``.  Vector fields act by the Lie derivative
``v d/dt . f (dt)^lam = (v f' + lam v' f) (dt)^lam`` and coordinate changes by
pullback ``f (dt)^lam -> f(rho) rho'^lam (dt)^lam``.

With the group law of :mod:`formaldisc.coords`,
``act_pullback(group_compose(rho, mu), e) == act_pullback(rho, act_pullback(mu, e))``.

Elements carry a ``precision``: components with index ``>= precision`` are
unknown.  ``precision=None`` means the element is known exactly, including
the fact that it has no components above the cutoff.  ``overflow`` records
that nonzero components were pushed past the cutoff and dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .coords import CoordinateChange, Derivation, exp_derivation, lie_bracket
from .differentials import jacobian_power
from .report import CheckReport
from .rational import format_fraction, to_fraction
from .series import TruncatedSeries

_ZERO = Fraction(0)


@dataclass(frozen=True)
class ModuleSpec:
    lam: Fraction
    grade_cutoff: int

    def __post_init__(self):
        object.__setattr__(self, "lam", to_fraction(self.lam))
        if self.grade_cutoff < 0:
            raise ValueError("grade_cutoff must be >= 0")

    @property
    def dim(self) -> int:
        return self.grade_cutoff + 1

    def grade(self, n: int) -> Fraction:
        return n + self.lam

    def indices_upto(self, m) -> range:
        """Basis indices of grade ``<= m``."""
        top = math.floor(to_fraction(m) - self.lam)
        return range(0, max(0, min(top, self.grade_cutoff) + 1))

    def filtration_dim(self, m) -> int:
        return len(self.indices_upto(m))

    def to_json(self) -> dict:
        return {"lambda": format_fraction(self.lam), "grade_cutoff": self.grade_cutoff}

    @classmethod
    def from_json(cls, data: Mapping) -> "ModuleSpec":
        return cls(to_fraction(data["lambda"]), int(data["grade_cutoff"]))


@dataclass(frozen=True)
class DensityElement:
    spec: ModuleSpec
    components: tuple
    precision: int | None = None
    overflow: bool = False

    def __post_init__(self):
        comps = self.components
        if isinstance(comps, Mapping):
            dense = [_ZERO] * self.spec.dim
            for n, c in comps.items():
                if not 0 <= int(n) <= self.spec.grade_cutoff:
                    raise ValueError(f"basis index {n} outside 0..{self.spec.grade_cutoff}")
                dense[int(n)] += to_fraction(c)
            comps = dense
        comps = tuple(to_fraction(c) for c in comps)
        if len(comps) != self.spec.dim:
            raise ValueError("component vector has the wrong length")
        object.__setattr__(self, "components", comps)
        if self.precision is not None and self.precision > self.spec.dim:
            object.__setattr__(self, "precision", self.spec.dim)

    @classmethod
    def basis(cls, spec: ModuleSpec, n: int, coeff=1) -> "DensityElement":
        return cls(spec, {n: coeff})

    @classmethod
    def zero(cls, spec: ModuleSpec) -> "DensityElement":
        return cls(spec, {})

    @property
    def known_below(self) -> int:
        """Indices below this are known exactly."""
        return self.spec.dim if self.precision is None else self.precision

    @property
    def exact(self) -> bool:
        return self.precision is None and not self.overflow

    def support(self) -> list[int]:
        return [n for n, c in enumerate(self.components) if c]

    def as_series(self, pad: int = 1) -> TruncatedSeries:
        """The density coefficient ``f(t)``; exact elements get ``pad`` known zeros."""
        order = self.spec.dim + pad if self.exact else self.known_below
        return TruncatedSeries._raw(list(self.components[:order]) + [_ZERO] * max(0, order - self.spec.dim))

    def _combine(self, other, comps):
        prec = _min_precision(self.precision, other.precision)
        return DensityElement(self.spec, comps, prec, self.overflow or other.overflow)

    def __add__(self, other: "DensityElement") -> "DensityElement":
        _same_spec(self, other)
        return self._combine(other, [a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "DensityElement") -> "DensityElement":
        _same_spec(self, other)
        return self._combine(other, [a - b for a, b in zip(self.components, other.components)])

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k) -> "DensityElement":
        k = to_fraction(k)
        return DensityElement(self.spec, [k * c for c in self.components], self.precision, self.overflow)

    __rmul__ = scale

    def first_mismatch(self, other: "DensityElement"):
        """First index, within the range known to both, where they differ."""
        _same_spec(self, other)
        n = min(self.known_below, other.known_below)
        for i in range(n):
            if self.components[i] != other.components[i]:
                return i
        return None

    def agrees_with(self, other: "DensityElement") -> bool:
        return self.first_mismatch(other) is None

    def __repr__(self):
        terms = [f"{c}*t^{n}" for n, c in enumerate(self.components) if c]
        tail = "" if self.precision is None else f" + O(t^{self.precision})"
        return f"DensityElement(({' + '.join(terms) or '0'}){tail} (dt)^{self.spec.lam})"

    def to_json(self) -> dict:
        out = {**self.spec.to_json(),
               "components": [[n, format_fraction(c)] for n, c in enumerate(self.components) if c]}
        if self.precision is not None:
            out["precision"] = self.precision
        if self.overflow:
            out["overflow"] = True
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "DensityElement":
        spec = ModuleSpec.from_json(data)
        comps = {int(n): to_fraction(c) for n, c in data.get("components", [])}
        return cls(spec, comps, data.get("precision"), bool(data.get("overflow", False)))


def _min_precision(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _same_spec(a: DensityElement, b: DensityElement):
    if a.spec != b.spec:
        raise ValueError("elements of different modules")


def _from_series(spec: ModuleSpec, s: TruncatedSeries, cap: int | None = None) -> DensityElement:
    """Read components off a series known below ``s.order`` (never exact)."""
    dim = spec.dim
    known = min(s.order, dim if cap is None else cap)
    comps = list(s.dense()[:known]) + [_ZERO] * (dim - known)
    overflow = any(s.dense()[dim:])
    return DensityElement(spec, comps, known, overflow)


class DensityModule:
    """Tensor densities with the Lie-derivative and pullback actions.

    The four methods are the admissible-module contract; other realizations
    can subclass and override them.
    """

    def grading_operator(self, e: DensityElement) -> DensityElement:
        lam = e.spec.lam
        comps = [(n + lam) * c for n, c in enumerate(e.components)]
        return DensityElement(e.spec, comps, e.precision, e.overflow)

    def translation_operator(self, e: DensityElement) -> DensityElement:
        """``-d/dt`` on the coefficient: ``t^n -> -n t^(n-1)``."""
        comps = [-(n + 1) * c for n, c in enumerate(e.components[1:])] + [_ZERO]
        if e.exact:
            return DensityElement(e.spec, comps)
        return DensityElement(e.spec, comps, max(e.known_below - 1, 0), e.overflow)

    def derivation_action(self, v: Derivation, e: DensityElement) -> DensityElement:
        """``(v f' + lam v' f) (dt)^lam``."""
        spec = e.spec
        f = e.as_series(pad=2)
        vs = v.coefficient_series
        result = vs.mul_tight(f.derive())
        if spec.lam:
            result = result + vs.derive().mul_tight(f).scale(spec.lam)
        return _from_series(spec, result)

    def act_pullback(self, rho: CoordinateChange, e: DensityElement) -> DensityElement:
        """``sum_n c_n rho(t)^n rho'(t)^lam (dt)^lam``, re-expanded in the basis."""
        spec = e.spec
        m = rho.order
        unit = TruncatedSeries._raw(rho.series.dense()[1:])  # rho / t
        jac = jacobian_power(rho, spec.lam)
        horizon = 2 * spec.dim + m  # far enough to notice overflow
        known = horizon if e.exact else e.known_below
        total = [_ZERO] * horizon
        power = TruncatedSeries._raw([Fraction(1)] + [_ZERO] * (m - 2))
        support = [n for n in e.support() if n < e.known_below]
        last = support[-1] if support else -1
        for n, c in enumerate(e.components[: last + 1]):
            if c:
                term = (power * jac).shift(n)
                known = min(known, term.order)
                for i, x in enumerate(term.dense()[:horizon]):
                    total[i] += c * x
            power = power * unit
        return _from_series(spec, TruncatedSeries._raw(total[:known]))


TENSOR_DENSITIES = DensityModule()


def grading_operator(e: DensityElement) -> DensityElement:
    return TENSOR_DENSITIES.grading_operator(e)


def translation_operator(e: DensityElement) -> DensityElement:
    return TENSOR_DENSITIES.translation_operator(e)


def derivation_action(v: Derivation, e: DensityElement) -> DensityElement:
    return TENSOR_DENSITIES.derivation_action(v, e)


def act_pullback(rho: CoordinateChange, e: DensityElement) -> DensityElement:
    return TENSOR_DENSITIES.act_pullback(rho, e)


def filtration_truncate(e: DensityElement, m) -> DensityElement:
    """Project onto grades ``<= m`` (zero every component of grade ``> m``)."""
    keep = e.spec.indices_upto(m)
    comps = [c if n in keep else _ZERO for n, c in enumerate(e.components)]
    if len(keep) <= e.known_below:
        return DensityElement(e.spec, comps)
    return DensityElement(e.spec, comps, e.precision, e.overflow)


def exp_action(module: DensityModule, v: Derivation, e: DensityElement) -> DensityElement:
    """``sum_k D^k e / k!`` for the Lie-derivative ``D`` of a positive ``v``."""
    total = e
    term = e
    for k in range(1, e.spec.dim + 1):
        term = module.derivation_action(v, term).scale(Fraction(1, k))
        total = total + term
        if not any(term.components[: term.known_below]):
            break
    return total


def check_admissible(spec: ModuleSpec, module: DensityModule = TENSOR_DENSITIES) -> CheckReport:
    """Verify the admissible-module axioms on the truncated module.

    Axioms checked: grading bounded below by lambda and matching the action
    of ``t d/dt``; one-dimensional graded pieces; translation lowers the
    grade by one and is locally nilpotent; the vector-field action is a Lie
    algebra map; positive vector fields raise the grade (so act nilpotently
    below the cutoff); their exponentials match the group action.
    """
    order = spec.dim + 3
    lam = spec.lam
    basis = [DensityElement.basis(spec, n) for n in range(spec.dim)]
    axioms = {}
    failures = []

    def fail(axiom, **info):
        axioms[axiom] = False
        failures.append({"axiom": axiom, **{k: str(v) for k, v in info.items()}})

    euler = Derivation.from_coefficients({1: 1}, order)
    axioms["grading"] = True
    for n, b in enumerate(basis):
        g = module.grading_operator(b)
        if g.components != b.scale(n + lam).components or n + lam < lam:
            fail("grading", index=n, image=g)
            break
        if not g.agrees_with(module.derivation_action(euler, b)):
            fail("grading", index=n, reason="disagrees with the t d/dt action")
            break

    axioms["finite_graded_pieces"] = True
    grades = [spec.grade(n) for n in range(spec.dim)]
    if len(set(grades)) != len(grades):
        fail("finite_graded_pieces")

    axioms["translation"] = True
    for n, b in enumerate(basis):
        image = module.translation_operator(b)
        expected = DensityElement.basis(spec, n - 1, -n) if n else DensityElement.zero(spec)
        if not image.agrees_with(expected):
            fail("translation", index=n)
            break
        e = b
        for _ in range(n + 1):
            e = module.translation_operator(e)
        if any(e.components):
            fail("translation", index=n, reason="not nilpotent")
            break

    axioms["lie_action"] = True
    witt = {m: Derivation.witt(m, order) for m in range(-1, 3)}
    for a in witt:
        for b in witt:
            bracket = lie_bracket(witt[a], witt[b])
            for e in basis:
                lhs = module.derivation_action(bracket, e)
                rhs = (module.derivation_action(witt[a], module.derivation_action(witt[b], e))
                       - module.derivation_action(witt[b], module.derivation_action(witt[a], e)))
                if not lhs.agrees_with(rhs):
                    fail("lie_action", pair=(a, b), index=e.support())
                    break

    axioms["positive_nilpotent"] = True
    for k in (1, 2):
        for n, b in enumerate(basis):
            image = module.derivation_action(witt[k], b)
            if any(c for i, c in enumerate(image.components[: image.known_below]) if i != n + k):
                fail("positive_nilpotent", generator=k, index=n)
            e = b
            for _ in range(spec.dim):
                e = module.derivation_action(witt[k], e)
            if any(e.components[: e.known_below]):
                fail("positive_nilpotent", generator=k, index=n, reason="not nilpotent")

    axioms["exponentiation"] = True
    samples = [witt[1], witt[2], witt[1] + Fraction(1, 2) * Derivation.witt(3, order)]
    for v in samples:
        rho = exp_derivation(v)
        for e in basis:
            if not module.act_pullback(rho, e).agrees_with(exp_action(module, v, e)):
                fail("exponentiation", vector_field=v, index=e.support())
                break

    return CheckReport("admissibility", all(axioms.values()),
                       counterexample=failures[0] if failures else None,
                       details={"axioms": axioms})
