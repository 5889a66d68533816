"""Rational functions on configuration space with poles on the diagonals.

A :class:`RationalSection` is ``N(z) / prod_{i<j} (z_i - z_j)^beta_ij`` with
an exact polynomial numerator ``N``.  Each slot also carries a module basis
label ``m_i`` and a shared density weight ``lam``; labelled families of such
sections are what the covariance checkers below consume.

Permutations are tuples of images on ``{1, ..., n}``: ``sigma[k - 1]`` is
``sigma(k)``.  The action ``(sigma.F)(z_1, ..., z_n) = F(z_sigma(1), ...,
z_sigma(n))`` is a left action: ``sigma.(tau.F) == (sigma o tau).F``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

from .errors import BadRange, DomainViolation, ExpansionBudgetExceeded, OnDiagonal
from .polynomial import Poly
from .rational import binomial, coerce_scalar, format_fraction, norm2, to_fraction
from .report import CheckReport

Permutation = tuple[int, ...]


# -- permutations -----------------------------------------------------------

def compose_permutations(sigma: Permutation, tau: Permutation) -> Permutation:
    """``sigma o tau`` (apply ``tau`` first)."""
    return tuple(sigma[t - 1] for t in tau)


def inverse_permutation(sigma: Permutation) -> Permutation:
    inv = [0] * len(sigma)
    for k, s in enumerate(sigma, start=1):
        inv[s - 1] = k
    return tuple(inv)


def permutation_sign(sigma: Permutation) -> int:
    inversions = sum(1 for a, b in itertools.combinations(sigma, 2) if a > b)
    return -1 if inversions % 2 else 1


def _check_permutation(sigma: Sequence[int], n: int) -> Permutation:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, n + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{n}")
    return sigma


# -- sections ---------------------------------------------------------------

def _zero_beta(n: int) -> tuple:
    return tuple((0,) * n for _ in range(n))


def _normalize_beta(beta, n: int) -> tuple:
    if beta is None:
        return _zero_beta(n)
    rows = tuple(tuple(int(x) for x in row) for row in beta)
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("pole matrix must be n x n")
    for i in range(n):
        if rows[i][i] != 0:
            raise ValueError("pole matrix must have a zero diagonal")
        for j in range(n):
            if rows[i][j] != rows[j][i] or rows[i][j] < 0:
                raise ValueError("pole matrix must be symmetric and non-negative")
    return rows


def _diff(n: int, i: int, j: int) -> Poly:
    """``z_i - z_j`` (0-based indices)."""
    return Poly(n, {tuple(1 if k == i else 0 for k in range(n)): 1,
                    tuple(1 if k == j else 0 for k in range(n)): -1})


def _pairs(n: int):
    return itertools.combinations(range(n), 2)


@dataclass(frozen=True)
class RationalSection:
    n: int
    numerator: Poly
    beta: tuple = None
    lam: Fraction = Fraction(0)
    labels: tuple = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one point")
        if self.numerator.nvars != self.n:
            raise ValueError("numerator has the wrong number of variables")
        object.__setattr__(self, "beta", _normalize_beta(self.beta, self.n))
        object.__setattr__(self, "lam", to_fraction(self.lam))
        labels = (0,) * self.n if self.labels is None else tuple(int(m) for m in self.labels)
        if len(labels) != self.n:
            raise ValueError("need one label per slot")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def polynomial(cls, numerator: Poly, **kw) -> "RationalSection":
        return cls(numerator.nvars, numerator, **kw)

    @classmethod
    def pole(cls, n: int, i: int, j: int, order: int = 1, numerator: Poly | None = None,
             **kw) -> "RationalSection":
        """``numerator / (z_i - z_j)^order`` with 1-based ``i < j``."""
        beta = [[0] * n for _ in range(n)]
        beta[i - 1][j - 1] = beta[j - 1][i - 1] = order
        return cls(n, numerator if numerator is not None else Poly.constant(n, 1), beta, **kw)

    def denominator(self) -> Poly:
        d = Poly.constant(self.n, 1)
        for i, j in _pairs(self.n):
            if self.beta[i][j]:
                d = d * _diff(self.n, i, j) ** self.beta[i][j]
        return d

    def total_pole_order(self) -> int:
        return sum(self.beta[i][j] for i, j in _pairs(self.n))

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    def with_labels(self, labels: Sequence[int]) -> "RationalSection":
        return RationalSection(self.n, self.numerator, self.beta, self.lam, tuple(labels))

    def evaluate(self, point: Sequence):
        pts = [coerce_scalar(p) for p in point]
        if len(pts) != self.n:
            raise ValueError(f"need {self.n} coordinates")
        for i, j in _pairs(self.n):
            if pts[i] == pts[j]:
                raise OnDiagonal(f"z{i + 1} = z{j + 1} = {pts[i]}")
        den = Fraction(1)
        for i, j in _pairs(self.n):
            if self.beta[i][j]:
                den = den * (pts[i] - pts[j]) ** self.beta[i][j]
        return coerce_scalar(self.numerator.evaluate(pts) / den)

    def same_function(self, other: "RationalSection") -> bool:
        """Equal as rational functions (labels ignored)."""
        return self.numerator * other.denominator() == other.numerator * self.denominator()

    def lift(self, beta) -> "RationalSection":
        """Rewrite over a larger pole matrix ``beta >= self.beta``."""
        beta = _normalize_beta(beta, self.n)
        num = self.numerator
        for i, j in _pairs(self.n):
            extra = beta[i][j] - self.beta[i][j]
            if extra < 0:
                raise ValueError("can only lift to larger pole orders")
            if extra:
                num = num * _diff(self.n, i, j) ** extra
        return RationalSection(self.n, num, beta, self.lam, self.labels)

    def _common(self, other: "RationalSection"):
        beta = [[max(a, b) for a, b in zip(r, s)] for r, s in zip(self.beta, other.beta)]
        return self.lift(beta), other.lift(beta)

    def __add__(self, other: "RationalSection") -> "RationalSection":
        a, b = self._common(other)
        return RationalSection(self.n, a.numerator + b.numerator, a.beta, self.lam, self.labels)

    def __sub__(self, other: "RationalSection") -> "RationalSection":
        return self + other.scale(-1)

    def scale(self, c) -> "RationalSection":
        return RationalSection(self.n, self.numerator * c, self.beta, self.lam, self.labels)

    def derive(self, i: int) -> "RationalSection":
        """``d/dz_i`` (1-based); pole orders on pairs through ``i`` grow by one."""
        k = i - 1
        n = self.n
        involved = [(a, b) for a, b in _pairs(n) if k in (a, b) and self.beta[a][b]]
        beta = [list(r) for r in self.beta]
        for a, b in involved:
            beta[a][b] += 1
            beta[b][a] += 1
        linear = {p: _diff(n, *p) for p in involved}
        prod_all = Poly.constant(n, 1)
        for p in involved:
            prod_all = prod_all * linear[p]
        num = self.numerator.derive(k) * prod_all
        for p in involved:
            a, b = p
            sign = 1 if k == a else -1
            others = Poly.constant(n, 1)
            for q in involved:
                if q != p:
                    others = others * linear[q]
            num = num - self.numerator * others * (sign * self.beta[a][b])
        return RationalSection(n, num, beta, self.lam, self.labels)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "numerator": self.numerator.to_json(),
            "beta": [list(r) for r in self.beta],
            "labels": {"lambda": format_fraction(self.lam), "m": list(self.labels)},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RationalSection":
        n = int(data["n"])
        labels = data.get("labels", {})
        return cls(n, Poly.from_json(n, data.get("numerator", [])), data.get("beta"),
                   to_fraction(labels.get("lambda", 0)), labels.get("m"))

    def __repr__(self):
        poles = [f"(z{i + 1}-z{j + 1})^{self.beta[i][j]}" for i, j in _pairs(self.n) if self.beta[i][j]]
        return f"RationalSection({self.numerator!r} / {'*'.join(poles) or '1'}, m={self.labels})"


def evaluate_at(F: RationalSection, point: Sequence):
    return F.evaluate(point)


def permute_action(sigma: Sequence[int], F: RationalSection) -> RationalSection:
    """``(sigma.F)(z) = F(z_sigma(1), ..., z_sigma(n))``; labels travel with their variables."""
    n = F.n
    sigma = _check_permutation(sigma, n)
    num = F.numerator.permute_variables([s - 1 for s in sigma])
    beta = [[0] * n for _ in range(n)]
    labels = [0] * n
    sign = 1
    for k in range(n):
        labels[sigma[k] - 1] = F.labels[k]
    for i, j in _pairs(n):
        b = F.beta[i][j]
        if b:
            a, c = sigma[i] - 1, sigma[j] - 1
            beta[a][c] = beta[c][a] = b
            if a > c and b % 2:
                sign = -sign
    return RationalSection(n, num * sign, beta, F.lam, labels)


@dataclass(frozen=True)
class ShuffleSet:
    m: int
    p: int
    permutations: tuple

    def __len__(self):
        return len(self.permutations)

    def __iter__(self):
        return iter(self.permutations)


def enumerate_shuffles(m: int, p: int) -> ShuffleSet:
    """All ``(p, m - p)`` shuffles in lexicographic order."""
    if not 1 <= p <= m - 1:
        raise BadRange(f"need 1 <= p <= m - 1, got m={m}, p={p}")
    perms = []
    for head in itertools.combinations(range(1, m + 1), p):
        tail = tuple(k for k in range(1, m + 1) if k not in head)
        perms.append(head + tail)
    return ShuffleSet(m, p, tuple(perms))


def shuffle_sum(F: RationalSection, p: int) -> RationalSection:
    """``sum over sigma in J_{n,p}^-1 of sign(sigma) sigma.F``."""
    total = None
    for sigma in enumerate_shuffles(F.n, p):
        inv = inverse_permutation(sigma)
        term = permute_action(inv, F).scale(permutation_sign(inv))
        total = term if total is None else total + term
    return total


# -- labelled families ------------------------------------------------------

LabelMap = Callable[[int], Sequence[tuple]]


@dataclass(frozen=True)
class SectionFamily:
    """Sections indexed by slot labels, with the module data the checks need.

    ``translate_label(m)`` lists ``(coefficient, m')`` pairs describing the
    translation operator on one slot; ``k_grade(m)`` is the grading
    eigenvalue; ``weight`` is the declared ``d`` in ``z^K F = z^d F``.
    """

    n: int
    build: Callable[[tuple], RationalSection]
    translate_label: LabelMap
    k_grade: Callable[[int], Fraction]
    weight: Fraction = Fraction(0)
    lam: Fraction = Fraction(0)
    name: str = "family"
    max_label: int = 3

    def __call__(self, labels: Sequence[int]) -> RationalSection:
        return self.build(tuple(labels)).with_labels(labels)

    def default_labels(self):
        return list(itertools.product(range(self.max_label + 1), repeat=self.n))

    def combination(self, combo: Mapping[tuple, Fraction]) -> RationalSection:
        """``sum c_labels F(labels)`` as one section."""
        total = RationalSection(self.n, Poly.zero(self.n), lam=self.lam)
        for labels, c in sorted(combo.items()):
            if c:
                total = total + self(labels).scale(c)
        return total

    def translate(self, combo: Mapping[tuple, Fraction], slots: Sequence[int]) -> dict:
        """Apply ``sum_{i in slots} T_i`` to a label combination (slots 1-based)."""
        out: dict = {}
        for labels, c in combo.items():
            for i in slots:
                for coeff, new in self.translate_label(labels[i - 1]):
                    key = labels[: i - 1] + (new,) + labels[i:]
                    out[key] = out.get(key, 0) + c * coeff
        return {k: v for k, v in out.items() if v}


def reference_family(n: int, lam=0, variant: str = "reference", max_label: int = 3) -> SectionFamily:
    """``F(m) = prod_j z_j^m_j / m_j!`` with ``T: m -> m - 1`` and grade ``-m``.

    Variants used as negative controls: ``"no_factorial"`` drops the
    factorials, ``"k_sign"`` flips the grade to ``+m``.
    """
    if variant not in ("reference", "no_factorial", "k_sign"):
        raise ValueError(f"unknown variant {variant!r}")
    lam = to_fraction(lam)

    def build(labels):
        c = Fraction(1)
        if variant != "no_factorial":
            for m in labels:
                c /= factorial(m)
        return RationalSection(n, Poly(n, {tuple(labels): c}), lam=lam, labels=labels)

    def translate_label(m):
        return [(1, m - 1)] if m > 0 else []

    sign = 1 if variant == "k_sign" else -1
    return SectionFamily(n, build, translate_label, lambda m: Fraction(sign * m), n * lam, lam,
                         f"reference:{variant}", max_label)


def constant_family(n: int) -> SectionFamily:
    """The constant section 1 with zero translation and zero grade."""
    return SectionFamily(n, lambda labels: RationalSection(n, Poly.constant(n, 1), labels=labels),
                         lambda m: [], lambda m: Fraction(0), Fraction(0), Fraction(0), "constant", 1)


def _show(F: RationalSection) -> str:
    return repr(F)


def check_T_derivative(family: SectionFamily, slot: int | None = None,
                       labels: Sequence[Sequence[int]] | None = None) -> CheckReport:
    """``d/dz_i F(m) == F(T_i m)`` for each slot, and the summed form."""
    slots = range(1, family.n + 1) if slot is None else [slot]
    cases = [tuple(x) for x in (labels or family.default_labels())]
    for lab in cases:
        F = family(lab)
        for i in slots:
            lhs = F.derive(i)
            rhs = family.combination(family.translate({lab: Fraction(1)}, [i]))
            if not lhs.same_function(rhs):
                return CheckReport("T_derivative", False, len(cases),
                                   {"labels": list(lab), "slot": i, "derivative": _show(lhs),
                                    "translated": _show(rhs)})
        total = RationalSection(family.n, Poly.zero(family.n))
        for i in range(1, family.n + 1):
            total = total + F.derive(i)
        rhs = family.combination(family.translate({lab: Fraction(1)}, range(1, family.n + 1)))
        if not total.same_function(rhs):
            return CheckReport("T_derivative", False, len(cases),
                               {"labels": list(lab), "slot": "sum", "derivative": _show(total),
                                "translated": _show(rhs)})
    return CheckReport("T_derivative", True, len(cases))


def _taylor_check(name: str, family: SectionFamily, slots: Sequence[int], labels, order: int,
                  shift, point) -> CheckReport:
    cases = [tuple(x) for x in (labels or family.default_labels())]
    if shift is not None and coerce_scalar(shift) == 0:
        return CheckReport(name, True, len(cases), details={"trivial": True})
    details = {"order": order}
    for lab in cases:
        derived = family(lab)
        combo = {lab: Fraction(1)}
        lhs_terms, rhs_terms = [derived], [family.combination(combo)]
        for k in range(1, order + 1):
            nxt = RationalSection(family.n, Poly.zero(family.n))
            for i in slots:
                nxt = nxt + derived.derive(i)
            derived = nxt
            combo = family.translate(combo, slots)
            lhs = derived.scale(Fraction(1, factorial(k)))
            rhs = family.combination(combo).scale(Fraction(1, factorial(k)))
            if not lhs.same_function(rhs):
                return CheckReport(name, False, len(cases),
                                   {"labels": list(lab), "order": k, "taylor": _show(lhs),
                                    "translated": _show(rhs)})
            lhs_terms.append(lhs)
            rhs_terms.append(rhs)
        if point is not None and shift is not None:
            z = coerce_scalar(shift)
            lhs_val = sum((t.evaluate(point) * z ** k for k, t in enumerate(lhs_terms)), Fraction(0))
            rhs_val = sum((t.evaluate(point) * z ** k for k, t in enumerate(rhs_terms)), Fraction(0))
            if lhs_val != rhs_val:
                return CheckReport(name, False, len(cases),
                                   {"labels": list(lab), "point": str(point), "taylor": str(lhs_val),
                                    "translated": str(rhs_val)})
            nxt = RationalSection(family.n, Poly.zero(family.n))
            for i in slots:
                nxt = nxt + derived.derive(i)
            if nxt.is_zero():
                moved = [coerce_scalar(p) + (z if k + 1 in slots else 0) for k, p in enumerate(point)]
                direct = family(lab).evaluate(moved)
                details["direct_value_compared"] = True
                if direct != lhs_val:
                    return CheckReport(name, False, len(cases),
                                       {"labels": list(lab), "point": str(point), "direct": str(direct),
                                        "series": str(lhs_val)})
    return CheckReport(name, True, len(cases), details=details)


def check_translation(family: SectionFamily, labels=None, order: int = 6, shift=None,
                      point=None) -> CheckReport:
    """Taylor coefficients of ``F(z + shift)`` against ``T_G^k F / k!``.

    The comparison is an identity in the formal shift; if a numeric
    ``shift`` and ``point`` are supplied the truncated sums are also
    evaluated there (and compared with ``F`` itself when the series ends).
    """
    return _taylor_check("translation", family, range(1, family.n + 1), labels, order, shift, point)


def check_insertion_expansion(family: SectionFamily, slot: int = 1, labels=None, order: int = 6,
                              shift=None, point=None) -> CheckReport:
    """The translation check for a single slot, with the disk guard.

    An evaluation needs ``|shift| < min_{j != slot} |z_slot - z_j|``;
    otherwise :class:`DomainViolation` is raised.
    """
    if point is not None and shift is not None:
        pts = [coerce_scalar(p) for p in point]
        z2 = norm2(coerce_scalar(shift))
        bound = [norm2(pts[slot - 1] - pts[j]) for j in range(family.n) if j != slot - 1]
        if bound and z2 >= min(bound):
            raise DomainViolation(f"|z|^2 = {z2} is not below the disk bound {min(bound)}")
    return _taylor_check("insertion_expansion", family, [slot], labels, order, shift, point)


def check_K_property(family: SectionFamily, weight=None, labels=None) -> CheckReport:
    """``z^K F(z * z_n) (with scaled dz slots) == z^d F`` as an identity in ``z``.

    Each homogeneous part of the numerator of degree ``h`` picks up
    ``z^(sum K(m_i) + n lam + h - sum beta)``; every nonzero part must land
    on exponent ``d``.
    """
    d = to_fraction(family.weight if weight is None else weight)
    cases = [tuple(x) for x in (labels or family.default_labels())]
    for lab in cases:
        F = family(lab)
        base = sum((family.k_grade(m) for m in lab), Fraction(0)) + family.n * family.lam - F.total_pole_order()
        for h in F.numerator.homogeneous_parts():
            if base + h != d:
                return CheckReport("K_property", False, len(cases),
                                   {"labels": list(lab), "homogeneous_degree": h,
                                    "exponent": format_fraction(base + h), "weight": format_fraction(d)})
    return CheckReport("K_property", True, len(cases))


def pole_orders(F: RationalSection) -> tuple:
    """Actual pole order along each diagonal ``z_i = z_j``.

    Substituting ``z_j = z_i + eps`` gives a numerator whose ``eps``-adic
    valuation ``v`` cancels part of ``(z_i - z_j)^beta = (-eps)^beta``; the
    other denominator factors stay nonzero at ``eps = 0``.
    """
    n = F.n
    out = [[0] * n for _ in range(n)]
    for i, j in _pairs(n):
        b = F.beta[i][j]
        if not b or F.is_zero():
            continue
        images = [Poly.variable(n + 1, k) for k in range(n)]
        images[j] = Poly.variable(n + 1, i) + Poly.variable(n + 1, n)
        shifted = F.numerator.substitute(images)
        v = shifted.min_degree_in(n)
        out[i][j] = out[j][i] = max(0, b - v)
    return tuple(tuple(r) for r in out)


def check_pole_bounds(F: RationalSection, bounds=None) -> CheckReport:
    """Pass iff every actual pole order is at most the bound (default ``beta``)."""
    limit = F.beta if bounds is None else _normalize_beta(bounds, F.n)
    actual = pole_orders(F)
    for i, j in _pairs(F.n):
        if actual[i][j] > limit[i][j]:
            return CheckReport("pole_bounds", False, 1,
                               {"pair": [i + 1, j + 1], "order": actual[i][j], "bound": limit[i][j]},
                               {"orders": [list(r) for r in actual]})
    return CheckReport("pole_bounds", True, 1, details={"orders": [list(r) for r in actual]})


# -- block expansions -------------------------------------------------------

@dataclass(frozen=True)
class InsertionFrame:
    """Slots grouped into consecutive blocks, block ``i`` expanded about ``centers[i]``.

    A center of ``None`` marks an outer block: its variables stay symbolic
    and are larger than every offset of a block centered at the origin.
    ``k`` is carried as metadata only.
    """

    partition: tuple
    centers: tuple
    expansion_order: int = 8
    k: int | None = None

    def __post_init__(self):
        part = tuple(int(x) for x in self.partition)
        if not part or any(x < 1 for x in part):
            raise ValueError("partition entries must be positive")
        centers = tuple(None if c is None else coerce_scalar(c) for c in self.centers)
        if len(centers) != len(part):
            raise ValueError("need one center per block")
        numeric = [c for c in centers if c is not None]
        if len(set(numeric)) != len(numeric):
            raise ValueError("block centers must be pairwise distinct")
        if self.expansion_order < 0:
            raise ValueError("expansion_order must be non-negative")
        object.__setattr__(self, "partition", part)
        object.__setattr__(self, "centers", centers)

    @property
    def size(self) -> int:
        return sum(self.partition)

    def block_of(self) -> list[int]:
        out = []
        for b, size in enumerate(self.partition):
            out.extend([b] * size)
        return out


def _less_sum(a2, b2, c2) -> bool:
    """``sqrt(a2) + sqrt(b2) < sqrt(c2)`` exactly."""
    gap = c2 - a2 - b2
    return gap > 0 and 4 * a2 * b2 < gap * gap


def in_convergence_domain(frame: InsertionFrame, points: Sequence) -> bool:
    """All strict inequalities ``|z_p - zeta_i| + |z_q - zeta_j| < |zeta_i - zeta_j|``.

    For an outer block the condition against an inner block ``j`` reads
    ``|z_q - zeta_j| < |z_p - zeta_j|``.
    """
    pts = [coerce_scalar(p) for p in points]
    if len(pts) != frame.size:
        raise ValueError(f"need {frame.size} points")
    block = frame.block_of()
    for p, q in itertools.combinations(range(len(pts)), 2):
        bi, bj = block[p], block[q]
        if bi == bj:
            continue
        ci, cj = frame.centers[bi], frame.centers[bj]
        if ci is None and cj is None:
            continue
        if ci is None or cj is None:
            outer, inner, c = (p, q, cj) if ci is None else (q, p, ci)
            if not norm2(pts[inner] - c) < norm2(pts[outer] - c):
                return False
            continue
        if not _less_sum(norm2(pts[p] - ci), norm2(pts[q] - cj), norm2(ci - cj)):
            return False
    return True


def _classify(F: RationalSection, frame: InsertionFrame):
    if frame.size != F.n:
        raise ValueError("frame partition does not match the number of points")
    block = frame.block_of()
    center = [frame.centers[b] for b in block]
    cross, kept = [], []
    for i, j in _pairs(F.n):
        if not F.beta[i][j]:
            continue
        if block[i] == block[j] or (center[i] is None and center[j] is None):
            kept.append((i, j))
        else:
            if (center[i] is None and center[j] != 0) or (center[j] is None and center[i] != 0):
                raise ValueError("outer blocks only pair with blocks centered at the origin")
            cross.append((i, j))
    inner = [k for k in range(F.n) if center[k] is not None]
    return center, cross, kept, inner


def _budget(F: RationalSection, frame: InsertionFrame, max_degree: int):
    need = frame.expansion_order + max(F.numerator.degree(), 0)
    if need > max_degree:
        raise ExpansionBudgetExceeded(f"expansion needs degree {need}, cap is {max_degree}")


def block_expansion(F: RationalSection, frame: InsertionFrame, max_degree: int = 64) -> Poly:
    """Expand the cross-block pole factors of ``F`` binomially.

    Variables of numeric blocks become offsets from their centers; outer
    variables stay as they are.  Poles inside a block (or between outer
    blocks) are left out: they are common to both sides of any comparison.
    The result keeps offset degree ``<= expansion_order``.
    """
    _budget(F, frame, max_degree)
    n, D = F.n, frame.expansion_order
    center, cross, _, inner = _classify(F, frame)
    images = [Poly.variable(n, k) + (center[k] if center[k] is not None else 0) for k in range(n)]
    result = F.numerator.substitute(images).truncate_total_degree(D, inner)
    for i, j in cross:
        b = F.beta[i][j]
        if center[i] is not None and center[j] is not None:
            c = center[i] - center[j]
            step = _diff(n, i, j)
            series = Poly.zero(n)
            for k in range(D + 1):
                series = series + step ** k * (binomial(-b, k) / c ** (b + k))
        else:
            outer, inn = (i, j) if center[i] is None else (j, i)
            sign = 1 if outer == i else (-1) ** b
            z = Poly.variable(n, outer)
            w = Poly.variable(n, inn)
            series = Poly.zero(n)
            for k in range(D + 1):
                series = series + (w ** k) * (z ** (-b - k)) * (binomial(-b, k) * (-1) ** k * sign)
        result = (result * series).truncate_total_degree(D, inner)
    return result


def _taylor_expansion(F: RationalSection, frame: InsertionFrame) -> Poly:
    """Same expansion from derivatives at the centers: ``sum d^a G(zeta) w^a / a!``."""
    n, D = F.n, frame.expansion_order
    center, cross, _, inner = _classify(F, frame)
    beta = [[0] * n for _ in range(n)]
    for i, j in cross:
        beta[i][j] = beta[j][i] = F.beta[i][j]
    G = RationalSection(n, F.numerator, beta)
    images = [Poly.constant(n, center[k]) if center[k] is not None else Poly.variable(n, k)
              for k in range(n)]
    total = Poly.zero(n)
    frontier = {(0,) * len(inner): G}
    for degree in range(D + 1):
        nxt = {}
        for alpha, section in frontier.items():
            num = section.numerator.substitute(images)
            den = Poly.constant(n, 1)
            for i, j in cross:
                b = section.beta[i][j]
                if center[i] is not None and center[j] is not None:
                    den = den * (center[i] - center[j]) ** b
                elif center[i] is None:
                    den = den * Poly.variable(n, i) ** b
                else:
                    den = den * (-Poly.variable(n, j)) ** b
            (dexp, dc), = den.terms.items()
            coeff = Fraction(1)
            for a in alpha:
                coeff /= factorial(a)
            mono = {inner[k]: a for k, a in enumerate(alpha) if a}
            scaled = Poly._raw(n, {tuple(e - x for e, x in zip(exp, dexp)): c * coeff / dc
                                   for exp, c in num.terms.items()})
            total = total + scaled * Poly.monomial(n, mono)
            if degree < D:
                last = max((k for k, a in enumerate(alpha) if a), default=0)
                for k in range(last, len(inner)):
                    beta_next = list(alpha)
                    beta_next[k] += 1
                    nxt[tuple(beta_next)] = section.derive(inner[k] + 1)
        frontier = nxt
    return total


def check_insertion_composition(F: RationalSection, frame: InsertionFrame,
                                max_degree: int = 64) -> CheckReport:
    """Block expansion of ``F`` against its Taylor expansion at the centers.

    Both are exact polynomials in the offsets up to ``expansion_order``;
    they must agree term by term.
    """
    a = block_expansion(F, frame, max_degree)
    b = _taylor_expansion(F, frame)
    if a != b:
        diff = a - b
        exp = min(diff.terms)
        return CheckReport("insertion_composition", False, 1,
                           {"term": list(exp), "expansion": str(a.terms.get(exp, 0)),
                            "taylor": str(b.terms.get(exp, 0))})
    return CheckReport("insertion_composition", True, 1,
                       details={"terms": len(a.terms), "order": frame.expansion_order})


# -- section vectors --------------------------------------------------------

@dataclass(frozen=True)
class SectionEntry:
    ordering: tuple
    section: RationalSection


@dataclass(frozen=True)
class SectionVector:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, j):
        return self.entries[j]

    @property
    def orderings(self) -> list[tuple]:
        return [e.ordering for e in self.entries]


def cyclic_orderings(n: int) -> list[tuple]:
    base = list(range(1, n + 1))
    return [tuple(base[j:] + base[:j]) for j in range(n)]


def build_section_vector(F: RationalSection) -> SectionVector:
    """Entry ``j`` carries the differential slots in the order ``(j, ..., n, 1, ..., j - 1)``."""
    return SectionVector(tuple(SectionEntry(o, F) for o in cyclic_orderings(F.n)))


def _nullspace(columns: list[dict], keys: list) -> list[list[Fraction]]:
    """Rational nullspace of the matrix whose ``j``-th column is ``columns[j]``."""
    rows = [[Fraction(col.get(k, 0)) for col in columns] for k in keys]
    ncols = len(columns)
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -rows[i][free]
        basis.append(v)
    return basis


def shuffle_kernel(n: int, p: int, degree: int) -> list[RationalSection]:
    """A basis of homogeneous polynomials of ``degree`` killed by ``shuffle_sum(., p)``."""
    monomials = [e for e in itertools.product(range(degree + 1), repeat=n) if sum(e) == degree]
    images = [shuffle_sum(RationalSection(n, Poly(n, {e: 1})), p).numerator.terms for e in monomials]
    keys = sorted({k for img in images for k in img})
    return [RationalSection(n, Poly(n, {e: c for e, c in zip(monomials, v) if c}))
            for v in _nullspace(images, keys)]
