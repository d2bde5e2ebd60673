"""Sparse trivariate polynomials with exact term arithmetic.

Terms live in a dict keyed by exponent triples (i, j, k), meaning
x**i * y**j * z**k.  Addition, multiplication, and differentiation are
exact over the coefficient arithmetic: no term is ever truncated, and
int or Fraction coefficients stay int or Fraction.  Floats round only
per IEEE operation.  Zero coefficients are never stored.

Every polynomial carries a `unit` tag.  The tag is informational
metadata: addition insists that non-empty tags agree, multiplication
concatenates them, and differentiation leaves them alone (callers that
differentiate with respect to a dimensional coordinate retag the
result via `with_unit`).
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, Tuple

from .errors import UnitMismatchError

Exponents = Tuple[int, int, int]

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}
_AXIS_NAMES = ("x", "y", "z")


def _combine_units(a: str, b: str) -> str:
    if not a:
        return b
    if not b:
        return a
    return f"{a}*{b}"


class TrivariatePolynomial:
    """Immutable sparse polynomial in (x, y, z)."""

    __slots__ = ("_terms", "unit")

    def __init__(self, terms: Mapping[Exponents, object] | None = None,
                 unit: str = ""):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                i, j, k = key
                if i < 0 or j < 0 or k < 0:
                    raise ValueError(f"negative exponent in {key}")
                if coeff == 0:
                    continue
                clean[(int(i), int(j), int(k))] = coeff
        object.__setattr__(self, "_terms", clean)
        object.__setattr__(self, "unit", unit)

    def __setattr__(self, name, value):
        raise AttributeError("TrivariatePolynomial is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, unit: str = "") -> "TrivariatePolynomial":
        return cls({}, unit)

    @classmethod
    def constant(cls, value, unit: str = "") -> "TrivariatePolynomial":
        return cls({(0, 0, 0): value}, unit)

    @classmethod
    def monomial(cls, exponents: Exponents, coeff=1,
                 unit: str = "") -> "TrivariatePolynomial":
        return cls({tuple(exponents): coeff}, unit)

    @classmethod
    def variable(cls, axis, unit: str = "") -> "TrivariatePolynomial":
        exps = [0, 0, 0]
        exps[_AXIS_INDEX[axis]] = 1
        return cls({tuple(exps): 1}, unit)

    @classmethod
    def variables(cls, unit: str = ""):
        """The coordinate polynomials (x, y, z)."""
        return tuple(cls.variable(a, unit) for a in _AXIS_NAMES)

    # -- inspection ----------------------------------------------------

    @property
    def terms(self) -> dict:
        """Copy of the term map; mutating it does not affect self."""
        return dict(self._terms)

    def coefficient(self, exponents: Exponents):
        return self._terms.get(tuple(exponents), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def total_degree(self) -> int:
        """Highest total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(i + j + k for (i, j, k) in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def with_unit(self, unit: str) -> "TrivariatePolynomial":
        return TrivariatePolynomial(self._terms, unit)

    # -- arithmetic ----------------------------------------------------

    def _check_add_unit(self, other: "TrivariatePolynomial") -> str:
        if self.unit and other.unit and self.unit != other.unit:
            raise UnitMismatchError(
                f"cannot add {self.unit!r} to {other.unit!r}")
        return self.unit or other.unit

    def __add__(self, other):
        if not isinstance(other, TrivariatePolynomial):
            return NotImplemented
        unit = self._check_add_unit(other)
        out = dict(self._terms)
        for key, coeff in other._terms.items():
            new = out.get(key, 0) + coeff
            if new == 0:
                out.pop(key, None)
            else:
                out[key] = new
        return TrivariatePolynomial(out, unit)

    def __sub__(self, other):
        if not isinstance(other, TrivariatePolynomial):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TrivariatePolynomial(
            {k: -c for k, c in self._terms.items()}, self.unit)

    def __mul__(self, other):
        if isinstance(other, TrivariatePolynomial):
            out: dict = {}
            for (i1, j1, k1), c1 in self._terms.items():
                for (i2, j2, k2), c2 in other._terms.items():
                    key = (i1 + i2, j1 + j2, k1 + k2)
                    new = out.get(key, 0) + c1 * c2
                    if new == 0:
                        out.pop(key, None)
                    else:
                        out[key] = new
            return TrivariatePolynomial(
                out, _combine_units(self.unit, other.unit))
        # scalar
        if other == 0:
            return TrivariatePolynomial.zero(self.unit)
        return TrivariatePolynomial(
            {k: c * other for k, c in self._terms.items()}, self.unit)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = TrivariatePolynomial.constant(1)
        for _ in range(n):
            result = result * self
        if self.unit and n > 1:
            result = result.with_unit(f"({self.unit})^{n}")
        return result

    # -- calculus ------------------------------------------------------

    def derivative(self, axis) -> "TrivariatePolynomial":
        """Partial derivative with respect to x, y, or z.

        The unit tag is preserved; retag with `with_unit` when the
        differentiation variable is dimensional.
        """
        ax = _AXIS_INDEX[axis]
        out = {}
        for key, coeff in self._terms.items():
            e = key[ax]
            if e == 0:
                continue
            new_key = list(key)
            new_key[ax] = e - 1
            out[tuple(new_key)] = coeff * e
        return TrivariatePolynomial(out, self.unit)

    def gradient(self):
        return tuple(self.derivative(a) for a in range(3))

    def laplacian(self) -> "TrivariatePolynomial":
        out = TrivariatePolynomial.zero(self.unit)
        for a in range(3):
            out = out + self.derivative(a).derivative(a)
        return out

    # -- substitution --------------------------------------------------

    def scale_arguments(self, sx, sy, sz) -> "TrivariatePolynomial":
        """Return Q with Q(x, y, z) = P(sx*x, sy*y, sz*z).

        Substituting x -> x/r0 is scale_arguments(1/r0, 1/r0, 1/r0).
        """
        out = {}
        for (i, j, k), coeff in self._terms.items():
            out[(i, j, k)] = coeff * sx**i * sy**j * sz**k
        return TrivariatePolynomial(out, self.unit)

    def shift_arguments(self, dx, dy, dz) -> "TrivariatePolynomial":
        """Return Q with Q(x, y, z) = P(x + dx, y + dy, z + dz).

        This is the exact Taylor re-centering about (-dx, -dy, -dz).
        """
        out: dict = {}
        for (i, j, k), coeff in self._terms.items():
            for a in range(i + 1):
                ca = coeff * math.comb(i, a) * _ipow(dx, i - a)
                if ca == 0:
                    continue
                for b in range(j + 1):
                    cb = ca * math.comb(j, b) * _ipow(dy, j - b)
                    if cb == 0:
                        continue
                    for c in range(k + 1):
                        cc = cb * math.comb(k, c) * _ipow(dz, k - c)
                        if cc == 0:
                            continue
                        key = (a, b, c)
                        new = out.get(key, 0) + cc
                        if new == 0:
                            out.pop(key, None)
                        else:
                            out[key] = new
        return TrivariatePolynomial(out, self.unit)

    def truncate(self, max_total_degree: int) -> "TrivariatePolynomial":
        """Drop every term of total degree above `max_total_degree`."""
        out = {k: c for k, c in self._terms.items()
               if sum(k) <= max_total_degree}
        return TrivariatePolynomial(out, self.unit)

    def drop(self, *exponents: Exponents) -> "TrivariatePolynomial":
        """Remove specific monomials (used to discard constant offsets)."""
        banned = {tuple(e) for e in exponents}
        out = {k: c for k, c in self._terms.items() if k not in banned}
        return TrivariatePolynomial(out, self.unit)

    def as_float(self) -> "TrivariatePolynomial":
        """Copy with every coefficient converted to float."""
        return TrivariatePolynomial(
            {k: float(c) for k, c in self._terms.items()}, self.unit)

    # -- evaluation ----------------------------------------------------

    def evaluate(self, x, y, z):
        """Evaluate at a point or numpy-broadcastable arrays.

        Coefficients are converted to float here; this is the numeric
        boundary of the exact representation.
        """
        total = x * 0.0 + y * 0.0 + z * 0.0
        for (i, j, k), coeff in self._terms.items():
            total = total + float(coeff) * x**i * y**j * z**k
        return total

    def __call__(self, x, y, z):
        return self.evaluate(x, y, z)

    # -- comparison / display -------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, TrivariatePolynomial):
            return NotImplemented
        return self._terms == other._terms and self.unit == other.unit

    __hash__ = None

    def almost_equal(self, other: "TrivariatePolynomial",
                     rtol: float = 1e-12, atol: float = 0.0) -> bool:
        keys = set(self._terms) | set(other._terms)
        for key in keys:
            a = float(self._terms.get(key, 0))
            b = float(other._terms.get(key, 0))
            if abs(a - b) > atol + rtol * max(abs(a), abs(b)):
                return False
        return True

    def sorted_terms(self):
        """Terms ordered by (total degree, exponents); stable for display."""
        return sorted(self._terms.items(),
                      key=lambda kv: (sum(kv[0]), kv[0]))

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for key, coeff in self.sorted_terms():
            parts.append(_format_term(key, coeff))
        text = " + ".join(parts).replace("+ -", "- ")
        return text

    def __repr__(self):
        terms = {k: v for k, v in self.sorted_terms()}
        return (f"TrivariatePolynomial({terms!r}, unit={self.unit!r})")


def _ipow(base, exp: int):
    """base**exp that keeps ints/Fractions exact and handles 0**0 = 1."""
    if exp == 0:
        return 1
    return base**exp


def _format_term(key: Exponents, coeff) -> str:
    vars_part = "*".join(
        f"{name}" if e == 1 else f"{name}**{e}"
        for name, e in zip(_AXIS_NAMES, key) if e > 0)
    if not vars_part:
        return f"{coeff}"
    if coeff == 1:
        return vars_part
    if coeff == -1:
        return f"-{vars_part}"
    return f"{coeff}*{vars_part}"


def polynomial_sum(polys: Iterable[TrivariatePolynomial],
                   unit: str = "") -> TrivariatePolynomial:
    total = TrivariatePolynomial.zero(unit)
    for p in polys:
        total = total + p
    return total
