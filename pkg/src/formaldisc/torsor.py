"""Coordinate torsors, twisted modules and multi-point coordinate independence.

Coordinates at a point form a torsor under coordinate changes with the right
action ``xi . h = group_compose(xi, h)``, the series ``h(xi(t))``.  A twist
element is a pair (density, coordinate) modulo transporting the density by
the group action; normalizing moves it to the standard coordinate.

For several points each coordinate changes independently, so the Jacobian
of a change of all coordinates is diagonal and every slot is transformed by
its own ``rho_j``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .coords import CoordinateChange, group_compose, group_inverse
from .density import DensityElement, ModuleSpec, act_pullback, filtration_truncate
from .differentials import KDifferential, jacobian_power, residue_pairing
from .errors import BadRange
from .config_rational import cyclic_orderings
from .rational import coerce_scalar, format_fraction
from .report import CheckReport
from .series import TruncatedSeries


# -- torsors and twists -----------------------------------------------------

def torsor_act(xi: CoordinateChange, h: CoordinateChange) -> CoordinateChange:
    """``xi . h``, the coordinate ``h(xi(t))``."""
    return group_compose(xi, h)


def torsor_translate(xi: CoordinateChange, xi_tilde: CoordinateChange) -> CoordinateChange:
    """The unique ``h`` with ``h(xi(t)) = xi_tilde(t)``."""
    return group_compose(group_inverse(xi), xi_tilde)


@dataclass(frozen=True)
class CoordinateTorsor:
    """Coordinates at one point, recorded relative to a base coordinate."""

    order: int = 8

    @property
    def base(self) -> CoordinateChange:
        return CoordinateChange.identity(self.order)

    def act(self, xi: CoordinateChange, h: CoordinateChange) -> CoordinateChange:
        return torsor_act(xi, h)

    def translate(self, xi: CoordinateChange, xi_tilde: CoordinateChange) -> CoordinateChange:
        return torsor_translate(xi, xi_tilde)


@dataclass(frozen=True)
class TwistElement:
    density: DensityElement
    coordinate: CoordinateChange

    def is_normalized(self) -> bool:
        return self.coordinate.is_identity()

    def equivalent(self, other: "TwistElement") -> bool:
        return twist_normalize(self).density.agrees_with(twist_normalize(other).density)


def twist_normalize(e: TwistElement) -> TwistElement:
    """Rewrite ``(g, xi)`` as ``(R(xi) g, base)``; idempotent."""
    if e.is_normalized():
        return e
    return TwistElement(act_pullback(e.coordinate, e.density), CoordinateChange.identity(e.coordinate.order))


# -- multi-point data -------------------------------------------------------

@dataclass(frozen=True)
class PointAtlas:
    n: int
    changes: tuple
    centers: tuple = None

    def __post_init__(self):
        changes = tuple(self.changes)
        if len(changes) != self.n:
            raise ValueError("need one coordinate change per point")
        centers = tuple(range(self.n)) if self.centers is None else self.centers
        centers = tuple(coerce_scalar(c) for c in centers)
        if len(centers) != self.n or len(set(centers)) != self.n:
            raise ValueError("centers must be pairwise distinct, one per point")
        object.__setattr__(self, "changes", changes)
        object.__setattr__(self, "centers", centers)

    @classmethod
    def identity(cls, n: int, order: int = 8) -> "PointAtlas":
        return cls(n, tuple(CoordinateChange.identity(order) for _ in range(n)))

    def then(self, other: "PointAtlas") -> "PointAtlas":
        """Pointwise ``group_compose(self_j, other_j)``."""
        return PointAtlas(self.n, tuple(group_compose(a, b) for a, b in zip(self.changes, other.changes)),
                          self.centers)

    def to_json(self) -> dict:
        return {"n": self.n, "changes": [c.to_json() for c in self.changes],
                "centers": [list(v.to_json()) if hasattr(v, "to_json") else [format_fraction(v), "0/1"]
                            for v in self.centers]}

    @classmethod
    def from_json(cls, data: Mapping) -> "PointAtlas":
        centers = data.get("centers")
        return cls(int(data["n"]), tuple(CoordinateChange.from_json(c) for c in data["changes"]),
                   None if centers is None else tuple(tuple(c) for c in centers))


@dataclass(frozen=True)
class ModuleSection:
    """The evaluation family: slot ``j`` is its density ``g_j`` evaluated at ``z_j``.

    As a section it is ``prod_j g_j(z_j) (dz_j)^lam``; it determines one
    product of univariate series per cyclic ordering of the slots.
    """

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels or len({g.spec for g in labels}) != 1:
            raise ValueError("slot densities must share one module")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def basis(cls, spec: ModuleSpec, indices: Sequence[int]) -> "ModuleSection":
        return cls(tuple(DensityElement.basis(spec, m) for m in indices))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def spec(self) -> ModuleSpec:
        return self.labels[0].spec

    def vector(self, order: int = 6) -> "SeriesSectionVector":
        factors = tuple(_density_series(g).truncate(min(order, _density_series(g).order)) for g in self.labels)
        return SeriesSectionVector(tuple((o, factors) for o in cyclic_orderings(self.n)), order)


def _density_series(g: DensityElement) -> TruncatedSeries:
    return g.as_series(pad=0) if g.exact else TruncatedSeries._raw(g.components[: g.known_below])


@dataclass(frozen=True)
class SeriesSectionVector:
    """Entries ``(ordering, factors)``: factor ``j`` is a series in ``z_j``."""

    entries: tuple
    order: int

    def __len__(self):
        return len(self.entries)

    def first_mismatch(self, other: "SeriesSectionVector"):
        for e, ((o1, f1), (o2, f2)) in enumerate(zip(self.entries, other.entries)):
            if o1 != o2:
                return {"entry": e, "orderings": [list(o1), list(o2)]}
            for slot, (a, b) in enumerate(zip(f1, f2), start=1):
                d = a.first_mismatch(b)
                if d is not None:
                    return {"entry": e, "slot": slot, "degree": d,
                            "expected": format_fraction(b[d]), "actual": format_fraction(a[d])}
        return None


def transform_section(S: ModuleSection, atlas: PointAtlas, order: int = 6,
                      weight_offset=0) -> SeriesSectionVector:
    """Write ``S`` in the coordinates ``rho_j`` of ``atlas``.

    Labels are transported by ``R(rho_j)^-1`` and variables substituted
    ``z_j -> rho_j(z_j)``.  Each differential slot then gains the Jacobian
    factor ``rho_j'(z_j)^lam``.  ``weight_offset`` perturbs the
    Jacobian weight (a negative control).
    """
    if atlas.n != S.n:
        raise ValueError("atlas and section have different numbers of points")
    lam = S.spec.lam + weight_offset
    factors = []
    for g, rho in zip(S.labels, atlas.changes):
        moved = act_pullback(group_inverse(rho), g)
        f = _density_series(moved)
        f = f.compose(rho.series.truncate(min(rho.order, f.order))) if f.order else f
        jac = jacobian_power(rho, lam)
        factors.append((f * jac).truncate(min(order, (f * jac).order)))
    factors = tuple(factors)
    # the diagonal Jacobian does not mix slots, so every cyclic ordering sees the same factors
    return SeriesSectionVector(tuple((o, factors) for o in cyclic_orderings(S.n)), order)


def check_section_invariance(S: ModuleSection, atlas: PointAtlas, order: int = 6,
                             weight_offset=0) -> CheckReport:
    """The transformed section equals the original, entry by entry, below ``order``."""
    new = transform_section(S, atlas, order, weight_offset)
    old = S.vector(order)
    bad = new.first_mismatch(old)
    known = min(min(f.order for f in new.entries[0][1]), min(f.order for f in old.entries[0][1]))
    details = {"order": order, "compared_below": known}
    if bad is not None:
        return CheckReport("section_invariance", False, 1, bad, details)
    return CheckReport("section_invariance", True, 1, details=details)


def random_coordinate_change(rng: random.Random, order: int = 8, unipotent: bool = False,
                             scalings=(1, 2, 3, -1, Fraction(1, 2))) -> CoordinateChange:
    """Coefficients drawn from ``{-2..2}/{1,2,3}``; the linear one from ``scalings``."""
    coeffs = {1: Fraction(1) if unipotent else Fraction(rng.choice(scalings))}
    for k in range(2, order):
        coeffs[k] = Fraction(rng.randint(-2, 2), rng.randint(1, 3))
    return CoordinateChange.from_coefficients(coeffs, order)


def random_atlas(rng: random.Random, n: int, order: int = 8, lam=1) -> PointAtlas:
    """Independent changes ``u_j(a_j t)``; scalings only when ``lam`` is integral."""
    changes = []
    for _ in range(n):
        u = random_coordinate_change(rng, order, unipotent=True)
        if Fraction(lam).denominator == 1 and rng.random() < 0.5:
            a = Fraction(rng.choice((2, 3, -1, -2))) / rng.choice((1, 2))
            u = group_compose(CoordinateChange.scaling(a, order), u)
        changes.append(u)
    return PointAtlas(n, tuple(changes))


def check_representation_law(spec: ModuleSpec, trials: int = 100, seed=0, order: int = 8,
                             convention: str = "right", unipotent: bool = False,
                             scalings_only: bool = False) -> CheckReport:
    """``R(rho * mu) = R(rho) R(mu)`` on random witnesses.

    ``convention="left"`` tests ``R(rho * mu) = R(mu) R(rho)`` instead, which
    is false for generic pairs and serves as a negative control.  Comparison
    covers the indices known on both sides (lower components are exact
    because the action never lowers the index).
    """
    if convention not in ("right", "left"):
        raise ValueError("convention must be 'right' or 'left'")
    rng = random.Random(seed)
    fractional = Fraction(spec.lam).denominator != 1
    for trial in range(trials):
        if scalings_only:
            rho = CoordinateChange.scaling(Fraction(rng.randint(1, 5), rng.randint(1, 3)) * rng.choice((1, -1)), order)
            mu = CoordinateChange.scaling(Fraction(rng.randint(1, 5), rng.randint(1, 3)) * rng.choice((1, -1)), order)
        else:
            rho = random_coordinate_change(rng, order, unipotent or fractional)
            mu = random_coordinate_change(rng, order, unipotent or fractional)
        e = DensityElement(spec, {rng.randint(0, spec.grade_cutoff): Fraction(rng.randint(1, 3)),
                                  rng.randint(0, min(2, spec.grade_cutoff)): Fraction(rng.randint(-2, 2))})
        lhs = act_pullback(group_compose(rho, mu), e)
        first, second = (mu, rho) if convention == "right" else (rho, mu)
        rhs = act_pullback(second, act_pullback(first, e))
        bad = lhs.first_mismatch(rhs)
        if bad is not None:
            return CheckReport("representation_law", False, trial + 1,
                               {"trial": trial, "rho": str(rho.series), "mu": str(mu.series),
                                "witness": e.to_json(), "index": bad,
                                "expected": format_fraction(lhs.components[bad]),
                                "actual": format_fraction(rhs.components[bad])},
                               {"convention": convention})
    return CheckReport("representation_law", True, trials, details={"convention": convention})


def exact_sequence_check(spec: ModuleSpec, m, rho: CoordinateChange | None = None) -> CheckReport:
    """``0 -> G_{>m} -> G -> G_{<=m} -> 0`` along the filtration at grade ``m``.

    Dimensions must add up.  ``R(rho)`` must preserve ``G_{>m}`` so that the
    projection to ``G_{<=m}`` is equivariant; for unipotent ``rho`` the
    induced map on the graded piece ``G_m`` must be the identity.
    """
    m = Fraction(m)
    if not spec.lam <= m <= spec.grade_cutoff + spec.lam:
        raise BadRange(f"grade {m} outside [{spec.lam}, {spec.grade_cutoff + spec.lam}]")
    if rho is None:
        rho = CoordinateChange.from_coefficients({1: 1, 2: 1}, spec.dim + 2)
    if not rho.is_unipotent():
        raise ValueError("the graded-piece check needs a unipotent coordinate change")
    dims = (spec.filtration_dim(m), spec.filtration_dim(m - 1), 1 if (m - spec.lam).denominator == 1 else 0)
    if dims[0] != dims[1] + dims[2]:
        return CheckReport("exact_sequence", False, 1, {"grade": str(m), "dimensions": list(dims)})
    for n in range(spec.dim):
        e = DensityElement.basis(spec, n)
        image = act_pullback(rho, e)
        projected = filtration_truncate(image, m)
        kept = filtration_truncate(e, m)
        through = projected if kept == e else filtration_truncate(act_pullback(rho, kept), m)
        if not projected.agrees_with(through):
            return CheckReport("exact_sequence", False, 1, {"grade": str(m), "index": n,
                                                            "reason": "projection not equivariant"})
        leading = filtration_truncate(image - e, spec.grade(n))
        if any(leading.components[: leading.known_below]):
            return CheckReport("exact_sequence", False, 1, {"grade": str(m), "index": n,
                                                            "reason": "not the identity on the graded piece"})
    return CheckReport("exact_sequence", True, 1, details={"grade": str(m), "dimensions": list(dims)})


def pair_dual_section(etas: Sequence[KDifferential], S: ModuleSection | Sequence) -> tuple[Fraction, ...]:
    """Residue of ``eta_j * g_j`` per slot, reading each slot density as a function."""
    if isinstance(S, ModuleSection):
        S = [_density_series(g) for g in S.labels]
    return residue_pairing(etas, S)
