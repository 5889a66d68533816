"""Sparse multivariate (Laurent) polynomials with exact coefficients.

A polynomial in ``nvars`` variables is a mapping from exponent tuples to
nonzero coefficients.  Coefficients may be Fractions or Gaussian rationals;
negative exponents are allowed so expansions in ``1/z`` fit the same type.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .rational import coerce_scalar, format_scalar

Exponent = tuple[int, ...]


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} does not have {nvars} entries")
            c = coerce_scalar(c)
            if c:
                clean[exp] = clean.get(exp, 0) + c
                if not clean[exp]:
                    del clean[exp]
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Poly":
        p = object.__new__(cls)
        object.__setattr__(p, "nvars", nvars)
        object.__setattr__(p, "terms", {e: c for e, c in terms.items() if c})
        return p

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Poly":
        """The coordinate ``z_(i+1)`` (0-based index ``i``)."""
        return cls.monomial(nvars, {i: 1})

    @classmethod
    def monomial(cls, nvars: int, powers: Mapping[int, int], c=1) -> "Poly":
        exp = [0] * nvars
        for i, e in powers.items():
            exp[i] += e
        return cls(nvars, {tuple(exp): c})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials in different numbers of variables")
            return other
        return Poly.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = coerce_scalar(other)
            return Poly._raw(self.nvars, {e: c * x for e, x in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly._raw(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            if len(self.terms) == 1:
                (e, c), = self.terms.items()
                return Poly(self.nvars, {tuple(x * k for x in e): 1 / c ** -k})
            raise ValueError("only monomials have negative powers")
        result = Poly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def degree(self) -> int:
        """Total degree (maximum over terms); -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def min_degree_in(self, i: int) -> int | None:
        return min((e[i] for e in self.terms), default=None)

    def homogeneous_parts(self) -> dict[int, "Poly"]:
        parts: dict[int, dict] = {}
        for e, c in self.terms.items():
            parts.setdefault(sum(e), {})[e] = c
        return {d: Poly._raw(self.nvars, t) for d, t in sorted(parts.items())}

    def derive(self, i: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return Poly._raw(self.nvars, out)

    def evaluate(self, point: Sequence):
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * (x ** k)
            total = total + term
        return total

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Replace variable ``i`` by ``images[i]`` (all in a common ring)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        m = images[0].nvars if images else 0
        cache: dict = {}
        total = Poly.zero(m)
        for e, c in self.terms.items():
            term = Poly.constant(m, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        cache[key] = images[i] ** k
                    term = term * cache[key]
            total = total + term
        return total

    def permute_variables(self, sigma: Sequence[int]) -> "Poly":
        """Rename variable ``k`` to ``sigma[k]`` (0-based)."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * self.nvars
            for k, x in enumerate(e):
                ne[sigma[k]] += x
            out[tuple(ne)] = c
        return Poly._raw(self.nvars, out)

    def truncate_total_degree(self, d: int, variables: Sequence[int] | None = None) -> "Poly":
        """Drop terms whose degree in ``variables`` (default all) exceeds ``d``."""
        vs = range(self.nvars) if variables is None else variables
        return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e[i] for i in vs) <= d})

    def embed(self, nvars: int) -> "Poly":
        """View as a polynomial in ``nvars >= self.nvars`` variables."""
        pad = (0,) * (nvars - self.nvars)
        return Poly._raw(nvars, {e + pad: c for e, c in self.terms.items()})

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"z{i + 1}" + (f"^{k}" if k != 1 else "") for i, k in enumerate(e) if k)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "Poly(" + " + ".join(parts) + ")"

    def to_json(self) -> list:
        return [[*e, format_scalar(c)] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, nvars: int, data: Sequence) -> "Poly":
        terms = {}
        for row in data:
            *exp, c = row
            if isinstance(c, list):
                c = tuple(c)
            terms[tuple(exp)] = coerce_scalar(c)
        return cls(nvars, terms)


def linear_form(nvars: int, coeffs: Mapping[int, object], const=0) -> Poly:
    """``const + sum c_i z_i``."""
    terms = {(0,) * nvars: const}
    for i, c in coeffs.items():
        exp = [0] * nvars
        exp[i] = 1
        terms[tuple(exp)] = c
    return Poly(nvars, terms)
