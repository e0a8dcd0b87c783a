"""Dimension-tracked scalars for CGS bookkeeping.

Everything in this package computes in unprefixed CGS (gram, centimetre,
second). A Quantity pairs one float with exponents over the three base
dimensions and checks them under arithmetic, so formula tests can assert that
e.g. a collapse strength really carries cm^3 s^-1 g^-2. The heavy numerics
(lattice dynamics, Monte-Carlo loops) deliberately run on raw floats; Quantity
is the boundary layer used by constants, solver outputs, config parsing and
the test suite. Powers keep exact rational exponents so square roots of clean
combinations (hbar*c/G and friends) stay clean.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

Dim = tuple[Fraction, Fraction, Fraction]  # exponents of (g, cm, s)

DIMENSIONLESS: Dim = (Fraction(0), Fraction(0), Fraction(0))

_BASE_UNITS: dict[str, tuple[int, int, int]] = {
    "g": (1, 0, 0),
    "cm": (0, 1, 0),
    "s": (0, 0, 1),
    # common CGS composites, all coherent (value factor 1)
    "erg": (1, 2, -2),
    "dyn": (1, 1, -2),
    "1": (0, 0, 0),
}

_TOKEN = re.compile(r"^([A-Za-z]+|1)(?:\^(-?\d+))?$")


class DimensionError(ValueError):
    """Raised when an operation mixes incompatible dimensions."""


def parse_unit(text: str) -> Dim:
    """Parse a CGS unit string like "cm^3*g^-1*s^-2" or "g/cm^3" into a Dim.

    Grammar: factors joined by '*' or '/', each a base symbol with an optional
    integer '^' exponent. '1' is the dimensionless placeholder ("1/s" etc).
    """
    dim = [Fraction(0)] * 3
    sign = 1
    for piece in re.split(r"([*/])", text.replace(" ", "")):
        if piece == "*":
            continue
        if piece == "/":
            sign = -1  # applies to the next factor only
            continue
        if piece == "":
            raise DimensionError(f"empty factor in unit {text!r}")
        m = _TOKEN.match(piece)
        if m is None or m.group(1) not in _BASE_UNITS:
            raise DimensionError(f"unknown unit token {piece!r} in {text!r}")
        exp = int(m.group(2) or 1) * sign
        for i, base_exp in enumerate(_BASE_UNITS[m.group(1)]):
            dim[i] += Fraction(base_exp * exp)
        sign = 1
    return (dim[0], dim[1], dim[2])


def format_dim(dim: Dim) -> str:
    """Render a Dim back to a canonical unit string ("1" if dimensionless)."""
    parts = []
    for symbol, exp in zip(("g", "cm", "s"), dim):
        if exp == 0:
            continue
        if exp == 1:
            parts.append(symbol)
        elif exp.denominator == 1:
            parts.append(f"{symbol}^{exp.numerator}")
        else:
            parts.append(f"{symbol}^{exp.numerator}/{exp.denominator}")
    return "*".join(parts) if parts else "1"


def _as_dim(spec) -> Dim:
    if isinstance(spec, str):
        return parse_unit(spec)
    d = tuple(Fraction(x) for x in spec)
    if len(d) != 3:
        raise DimensionError(f"dimension needs 3 exponents, got {spec!r}")
    return d  # type: ignore[return-value]


@dataclass(frozen=True)
class Quantity:
    """One finite real value plus CGS dimension exponents."""

    value: float
    dim: Dim = DIMENSIONLESS

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "dim", _as_dim(self.dim))
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite quantity: {self.value!r}")

    # --- helpers ------------------------------------------------------
    @property
    def is_dimensionless(self) -> bool:
        return self.dim == DIMENSIONLESS

    def require(self, unit: str) -> "Quantity":
        """Assert this quantity carries `unit`'s dimension; returns self."""
        want = parse_unit(unit)
        if self.dim != want:
            raise DimensionError(
                f"expected [{unit}] = {format_dim(want)}, got {format_dim(self.dim)}"
            )
        return self

    def in_unit(self, unit: str) -> float:
        """Value as a float, checking the dimension matches `unit`."""
        return self.require(unit).value

    # --- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "Quantity":
        if isinstance(other, Quantity):
            return other
        if isinstance(other, Real):
            return Quantity(float(other))
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        if q.dim != self.dim:
            raise DimensionError(
                f"cannot add {format_dim(self.dim)} and {format_dim(q.dim)}"
            )
        return Quantity(self.value + q.value, self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        if q.dim != self.dim:
            raise DimensionError(
                f"cannot subtract {format_dim(q.dim)} from {format_dim(self.dim)}"
            )
        return Quantity(self.value - q.value, self.dim)

    def __rsub__(self, other):
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        return q.__sub__(self)

    def __neg__(self):
        return Quantity(-self.value, self.dim)

    def __mul__(self, other):
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        return Quantity(
            self.value * q.value,
            tuple(a + b for a, b in zip(self.dim, q.dim)),  # type: ignore[arg-type]
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        return Quantity(
            self.value / q.value,
            tuple(a - b for a, b in zip(self.dim, q.dim)),  # type: ignore[arg-type]
        )

    def __rtruediv__(self, other):
        q = self._coerce(other)
        if q is NotImplemented:
            return NotImplemented
        return q.__truediv__(self)

    def __pow__(self, exponent):
        e = Fraction(exponent).limit_denominator(1_000_000)
        if abs(float(e) - float(exponent)) > 1e-12:
            raise DimensionError(f"irrational exponent {exponent!r} on a quantity")
        return Quantity(
            self.value ** float(e),
            tuple(a * e for a in self.dim),  # type: ignore[arg-type]
        )

    def sqrt(self) -> "Quantity":
        return self ** Fraction(1, 2)

    def __float__(self) -> float:
        if not self.is_dimensionless:
            raise DimensionError(
                f"refusing to strip dimension {format_dim(self.dim)}; use .in_unit()"
            )
        return self.value

    def __repr__(self) -> str:
        return f"Quantity({self.value!r}, {format_dim(self.dim)!r})"


def quantity(value: float, unit: str = "1") -> Quantity:
    """Convenience constructor: quantity(6.674e-8, "cm^3*g^-1*s^-2")."""
    return Quantity(value, parse_unit(unit))
