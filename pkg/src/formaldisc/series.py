"""Exact truncated power series and Laurent series in one variable ``t``.

A :class:`TruncatedSeries` of order ``N`` knows its coefficients of degree
``0 .. N-1``; everything from degree ``N`` on is *unknown*, not zero.
Arithmetic keeps track of which coefficients are still determined by the
inputs and never reports a coefficient it cannot justify.

>>> t = TruncatedSeries.variable(6)
>>> (t + t * t).invert_composition()
t - t^2 + 2*t^3 - 5*t^4 + 14*t^5 + O(t^6)
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import NonZeroConstantTerm, NotInvertible, TruncationError, FractionalPowerUndefined
from .rational import binomial, format_fraction, to_fraction

PRINCIPAL_DEPTH_LIMIT = 16

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _conv(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> list[Fraction]:
    """Cauchy product of dense coefficient lists, truncated to length n."""
    out = [_ZERO] * n
    for i, x in enumerate(a[:n]):
        if not x:
            continue
        for j, y in enumerate(b[: n - i]):
            if y:
                out[i + j] += x * y
    return out


def _valuation(c: Sequence[Fraction], default: int) -> int:
    for i, x in enumerate(c):
        if x:
            return i
    return default


def _dense(coefficients, order: int, lowest: int = 0) -> list[Fraction]:
    """Dense list for degrees ``lowest .. order-1`` from a list or a mapping."""
    size = max(order - lowest, 0)
    out = [_ZERO] * size
    if isinstance(coefficients, Mapping):
        items = coefficients.items()
    else:
        items = ((lowest + i, c) for i, c in enumerate(coefficients))
    for deg, value in items:
        deg = int(deg)
        value = to_fraction(value)
        if deg < lowest:
            if value:
                raise ValueError(f"degree {deg} below the allowed range")
            continue
        if deg >= order:
            if value:
                raise TruncationError(
                    f"coefficient at degree {deg} lies at or above truncation order {order}"
                )
            continue
        out[deg - lowest] += value
    return out


def _format_terms(pairs, order) -> str:
    parts = []
    for deg, c in pairs:
        if not c:
            continue
        mono = "" if deg == 0 else ("t" if deg == 1 else f"t^{deg}")
        if mono and abs(c) == 1:
            coeff = ""
        else:
            coeff = str(abs(c)) + ("*" if mono else "")
        sign = "-" if c < 0 else "+"
        parts.append((sign, coeff + mono))
    if not parts:
        text = "0"
    else:
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
    return f"{text} + O(t^{order})"


class TruncatedSeries:
    """Power series ``sum c_n t^n`` known up to (excluding) ``order``."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable | Mapping = (), order: int = 8):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        if not isinstance(coefficients, Mapping):
            coefficients = list(coefficients)
        self._c = tuple(_dense(coefficients, order))

    @classmethod
    def _raw(cls, coeffs: Sequence[Fraction]) -> "TruncatedSeries":
        obj = cls.__new__(cls)
        obj._c = tuple(coeffs)
        return obj

    @classmethod
    def variable(cls, order: int = 8) -> "TruncatedSeries":
        return cls({1: 1}, order)

    @classmethod
    def constant(cls, value, order: int = 8) -> "TruncatedSeries":
        return cls({0: value}, order)

    @classmethod
    def monomial(cls, degree: int, coeff=1, order: int = 8) -> "TruncatedSeries":
        return cls({degree: coeff} if degree < order else {}, order)

    # -- access --------------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self._c)

    @property
    def coefficients(self) -> dict[int, Fraction]:
        """Nonzero known coefficients by degree."""
        return {i: c for i, c in enumerate(self._c) if c}

    def dense(self) -> tuple[Fraction, ...]:
        return self._c

    def __getitem__(self, degree: int) -> Fraction:
        if degree < 0:
            return _ZERO
        if degree >= self.order:
            raise TruncationError(f"degree {degree} is unknown at order {self.order}")
        return self._c[degree]

    def valuation(self) -> int:
        """Lowest degree with a nonzero coefficient; ``order`` if none is known."""
        return _valuation(self._c, self.order)

    def is_zero(self) -> bool:
        return not any(self._c)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise TruncationError("cannot raise the truncation order")
        return TruncatedSeries._raw(self._c[:order])

    def agrees_with(self, other: "TruncatedSeries") -> bool:
        """Equality on the degrees known to both operands."""
        n = min(self.order, other.order)
        return self._c[:n] == other._c[:n]

    def first_mismatch(self, other: "TruncatedSeries"):
        n = min(self.order, other.order)
        for i in range(n):
            if self._c[i] != other._c[i]:
                return i
        return None

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(self._c)

    def __repr__(self):
        return _format_terms(enumerate(self._c), self.order)

    # -- ring operations -----------------------------------------------------

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        return TruncatedSeries({0: to_fraction(other)}, self.order)

    def __add__(self, other):
        if not isinstance(other, (TruncatedSeries, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        n = min(self.order, other.order)
        return TruncatedSeries._raw([self._c[i] + other._c[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw([-c for c in self._c])

    def __sub__(self, other):
        if not isinstance(other, (TruncatedSeries, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return TruncatedSeries._raw(_conv(self._c, other._c, n))

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def scale(self, k) -> "TruncatedSeries":
        k = to_fraction(k)
        return TruncatedSeries._raw([k * c for c in self._c])

    def mul_tight(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Product keeping every coefficient the operands determine.

        The unknown tail of ``a`` is ``O(t^a.order)``; multiplied by ``b`` it
        is ``O(t^(a.order + val b))``, so the product is known below
        ``min(a.order + val(b), b.order + val(a))``.
        """
        n = min(self.order + other.valuation(), other.order + self.valuation())
        return TruncatedSeries._raw(_conv(self._c, other._c, n))

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``t^k`` (k >= 0)."""
        if k < 0:
            raise ValueError("use LaurentSeries for negative shifts")
        return TruncatedSeries._raw([_ZERO] * k + list(self._c))

    def reciprocal(self) -> "TruncatedSeries":
        """Multiplicative inverse; requires an invertible constant term."""
        if self.order == 0 or self._c[0] == 0:
            raise NotInvertible("constant term must be nonzero to invert multiplicatively")
        n = self.order
        inv0 = 1 / self._c[0]
        out = [inv0] + [_ZERO] * (n - 1)
        for k in range(1, n):
            acc = sum((self._c[j] * out[k - j] for j in range(1, k + 1)), _ZERO)
            out[k] = -acc * inv0
        return TruncatedSeries._raw(out)

    def power(self, exponent) -> "TruncatedSeries":
        """``self ** exponent`` for integer or rational exponents.

        Non-integer exponents use the binomial series and need constant
        term 1, which avoids choosing a branch of a root.
        """
        exponent = to_fraction(exponent)
        if exponent.denominator == 1:
            k = int(exponent)
            base = self if k >= 0 else self.reciprocal()
            k = abs(k)
            result = TruncatedSeries._raw([_ONE] + [_ZERO] * (self.order - 1)) if self.order else self
            while k:
                if k & 1:
                    result = result * base
                base = base * base
                k >>= 1
            return result
        if self.order == 0 or self._c[0] != 1:
            raise FractionalPowerUndefined(
                f"rational power {exponent} needs constant term 1, got "
                f"{self._c[0] if self.order else 'unknown'}"
            )
        w = list(self._c)
        w[0] = _ZERO
        w = TruncatedSeries._raw(w)
        result = [_ZERO] * self.order
        term = TruncatedSeries._raw([_ONE] + [_ZERO] * (self.order - 1))
        for k in range(self.order):
            c = binomial(exponent, k)
            for i, x in enumerate(term._c):
                result[i] += c * x
            term = term * w
            if term.is_zero():
                break
        return TruncatedSeries._raw(result)

    def __pow__(self, exponent):
        return self.power(exponent)

    # -- calculus and composition ---------------------------------------------

    def derive(self) -> "TruncatedSeries":
        """Termwise derivative; the truncation order drops by one."""
        return TruncatedSeries._raw([i * self._c[i] for i in range(1, self.order)])

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """``self(inner(t))`` by Horner substitution; ``inner(0)`` must vanish."""
        if inner.order == 0 or inner._c[0] != 0:
            raise NonZeroConstantTerm("inner series must have zero constant term")
        n = min(self.order, inner.order)
        acc = [_ZERO] * n
        for c in reversed(self._c[:n]):
            acc = _conv(acc, inner._c, n)
            acc[0] += c
        return TruncatedSeries._raw(acc)

    def __call__(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        return self.compose(inner)

    def invert_composition(self) -> "TruncatedSeries":
        """Compositional inverse by Lagrange inversion.

        For ``f = a_1 t + ...`` the inverse ``g`` has
        ``[t^n] g = (1/n) [t^(n-1)] (t / f)^n``.
        """
        if self.order < 2:
            raise NotInvertible("need at least the linear coefficient to invert")
        if self._c[0] != 0:
            raise NotInvertible("f(0) must be 0")
        if self._c[1] == 0:
            raise NotInvertible("f'(0) must be nonzero")
        n = self.order
        # t / f = 1 / (f / t); f / t is known to order n - 1
        quotient = TruncatedSeries._raw(self._c[1:]).reciprocal()
        out = [_ZERO] * n
        power = TruncatedSeries._raw([_ONE] + [_ZERO] * (n - 2))
        for k in range(1, n):
            power = power * quotient
            out[k] = power._c[k - 1] / k
        return TruncatedSeries._raw(out)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "coefficients": [[i, format_fraction(c)] for i, c in enumerate(self._c) if c],
            "truncation_order": self.order,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TruncatedSeries":
        order = int(data["truncation_order"])
        pairs = {}
        for deg, value in data.get("coefficients", []):
            deg = int(deg)
            if deg < 0:
                raise ValueError("power series cannot have negative degrees")
            pairs[deg] = pairs.get(deg, _ZERO) + to_fraction(value)
        return cls(pairs, order)


class LaurentSeries:
    """Laurent series with a finite principal part, known below ``order``.

    ``order`` may be any integer larger than the lowest stored degree; when
    ``order <= -1`` even the residue is unknown.
    """

    __slots__ = ("_low", "_c")

    def __init__(self, coefficients: Mapping | Iterable = (), order: int = 8, *, lowest: int | None = None,
                 max_depth: int = PRINCIPAL_DEPTH_LIMIT):
        if isinstance(coefficients, Mapping):
            degs = [int(d) for d, v in coefficients.items() if to_fraction(v)]
            low = min([0] + degs) if lowest is None else lowest
            low = min(low, order)
            dense = _dense(coefficients, order, low)
        else:
            low = min(0 if lowest is None else lowest, order)
            dense = _dense(list(coefficients), order, low)
        if low < -max_depth and any(dense[: -max_depth - low]):
            raise ValueError(f"principal part deeper than {max_depth}")
        if order < low:
            raise ValueError("order must not lie below the lowest degree")
        self._low = low
        self._c = tuple(dense)

    @classmethod
    def _raw(cls, low: int, coeffs: Sequence[Fraction]) -> "LaurentSeries":
        obj = cls.__new__(cls)
        obj._low = low
        obj._c = tuple(coeffs)
        return obj._normalized()

    def _normalized(self) -> "LaurentSeries":
        low, c = self._low, list(self._c)
        while low < 0 and c and c[0] == 0:
            c.pop(0)
            low += 1
        obj = LaurentSeries.__new__(LaurentSeries)
        obj._low = low
        obj._c = tuple(c)
        return obj

    @classmethod
    def from_series(cls, s: TruncatedSeries) -> "LaurentSeries":
        return cls._raw(0, s.dense())

    @classmethod
    def monomial(cls, degree: int, coeff=1, order: int = 8) -> "LaurentSeries":
        return cls({degree: coeff} if degree < order else {}, order,
                   lowest=min(degree, 0), max_depth=max(PRINCIPAL_DEPTH_LIMIT, -degree))

    # -- access --------------------------------------------------------------

    @property
    def order(self) -> int:
        return self._low + len(self._c)

    @property
    def lowest(self) -> int:
        return self._low

    def __getitem__(self, degree: int) -> Fraction:
        if degree >= self.order:
            raise TruncationError(f"degree {degree} is unknown at order {self.order}")
        if degree < self._low:
            return _ZERO
        return self._c[degree - self._low]

    @property
    def coefficients(self) -> dict[int, Fraction]:
        return {self._low + i: c for i, c in enumerate(self._c) if c}

    @property
    def principal(self) -> dict[int, Fraction]:
        return {d: c for d, c in self.coefficients.items() if d < 0}

    @property
    def regular(self) -> TruncatedSeries:
        if self.order < 0:
            raise TruncationError("regular part entirely unknown")
        return TruncatedSeries._raw([self[d] for d in range(0, self.order)])

    @property
    def depth(self) -> int:
        """Pole order: the largest k with a nonzero coefficient at ``t^-k``."""
        p = self.principal
        return -min(p) if p else 0

    def valuation(self) -> int:
        for i, c in enumerate(self._c):
            if c:
                return self._low + i
        return self.order

    def residue(self) -> Fraction:
        """Coefficient of ``t^-1``."""
        return self[-1]

    def is_zero(self) -> bool:
        return not any(self._c)

    def truncate(self, order: int) -> "LaurentSeries":
        if order > self.order:
            raise TruncationError("cannot raise the truncation order")
        return LaurentSeries._raw(self._low, self._c[: max(order - self._low, 0)])

    def agrees_with(self, other: "LaurentSeries") -> bool:
        return self.first_mismatch(other) is None

    def first_mismatch(self, other: "LaurentSeries"):
        hi = min(self.order, other.order)
        lo = min(self._low, other._low)
        for d in range(lo, hi):
            if self[d] != other[d]:
                return d
        return None

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.order == other.order and self.coefficients == other.coefficients

    def __hash__(self):
        return hash((self.order, tuple(sorted(self.coefficients.items()))))

    def __repr__(self):
        return _format_terms(((self._low + i, c) for i, c in enumerate(self._c)), self.order)

    # -- arithmetic ------------------------------------------------------------

    def _coerce(self, other) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return other
        if isinstance(other, TruncatedSeries):
            return LaurentSeries.from_series(other)
        return LaurentSeries._raw(0, [to_fraction(other)] + [_ZERO] * max(self.order - 1, 0))

    def __add__(self, other):
        if not isinstance(other, (LaurentSeries, TruncatedSeries, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        lo = min(self._low, other._low)
        hi = min(self.order, other.order)
        return LaurentSeries._raw(lo, [self[d] + other[d] if d < hi else _ZERO for d in range(lo, hi)])

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries._raw(self._low, [-c for c in self._c])

    def __sub__(self, other):
        if not isinstance(other, (LaurentSeries, TruncatedSeries, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, k) -> "LaurentSeries":
        k = to_fraction(k)
        return LaurentSeries._raw(self._low, [k * c for c in self._c])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, (LaurentSeries, TruncatedSeries)):
            return NotImplemented
        other = self._coerce(other)
        # unknown tail of each factor, times the other's leading term
        hi = min(self.order + other.valuation(), other.order + self.valuation())
        lo = self._low + other._low
        out = [_ZERO] * max(hi - lo, 0)
        for i, x in enumerate(self._c):
            if not x:
                continue
            for j, y in enumerate(other._c):
                d = i + j
                if d >= len(out):
                    break
                out[d] += x * y
        return LaurentSeries._raw(lo, out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``t^k`` for any integer k."""
        return LaurentSeries._raw(self._low + k, self._c)

    def derive(self) -> "LaurentSeries":
        """Termwise derivative; the truncation order drops by one."""
        low = self._low - 1
        return LaurentSeries._raw(low, [(low + 1 + i) * c for i, c in enumerate(self._c)][: self.order - 1 - low])

    def compose(self, rho: TruncatedSeries, max_depth: int = PRINCIPAL_DEPTH_LIMIT) -> "LaurentSeries":
        """Substitute ``t -> rho(t)``; ``rho`` must be a coordinate (rho(0)=0, rho'(0)!=0)."""
        if rho.order < 2 or rho[0] != 0:
            raise NonZeroConstantTerm("substituted series must vanish at 0")
        if rho[1] == 0:
            raise NotInvertible("substituted series must have nonzero linear term")
        if self.depth > max_depth:
            raise ValueError(f"principal part deeper than {max_depth}")
        result = LaurentSeries.from_series(self.regular.compose(rho)) if self.order > 0 else None
        principal = self.principal
        if principal:
            # rho^-k = t^-k (rho/t)^-k, and rho/t is a unit
            unit_inv = TruncatedSeries._raw(rho.dense()[1:]).reciprocal()
            power = unit_inv
            for k in range(1, self.depth + 1):
                if -k in principal:
                    term = LaurentSeries.from_series(power).shift(-k).scale(principal[-k])
                    result = term if result is None else result + term
                power = power * unit_inv
        if result is None:
            return LaurentSeries._raw(self.order, [])
        # the unknown tail O(t^order) stays O(t^order) under a coordinate change
        if self.order < result.order:
            result = result.truncate(self.order)
        return result

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "coefficients": [[d, format_fraction(c)] for d, c in sorted(self.coefficients.items())],
            "truncation_order": self.order,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentSeries":
        pairs = {}
        for deg, value in data.get("coefficients", []):
            pairs[int(deg)] = pairs.get(int(deg), _ZERO) + to_fraction(value)
        return cls(pairs, int(data["truncation_order"]))


# Operation-level aliases.

def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    return outer.compose(inner)


def series_invert_composition(f: TruncatedSeries) -> TruncatedSeries:
    return f.invert_composition()


def series_derive(f):
    return f.derive()


def series_residue(f: LaurentSeries) -> Fraction:
    return f.residue()
