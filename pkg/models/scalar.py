"""
Scalar Model

Exact-rational and tolerance-based float arithmetic behind one interface.
"""

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float]

_RATIONAL_RE = re.compile(r'^\s*([+-]?\d+)\s*/\s*(\d+)\s*$')


def parse_rational(text: str) -> Fraction:
    """
    Parse a probability literal exactly.

    Args:
        text: "p/q" rational, integer or decimal literal

    Returns:
        Fraction in lowest terms

    Raises:
        ValueError: If the literal is malformed or has a zero denominator
    """
    match = _RATIONAL_RE.match(text)
    if match:
        denominator = int(match.group(2))
        if denominator == 0:
            raise ValueError(f"zero denominator in '{text}'")
        return Fraction(int(match.group(1)), denominator)
    try:
        # Decimal keeps "0.1" as 1/10 instead of the nearest double
        return Fraction(Decimal(text.strip()))
    except (InvalidOperation, ValueError):
        raise ValueError(f"not a rational literal: '{text}'")


def format_rational(value: Scalar) -> str:
    """Render a scalar as "p/q" (integers without denominator); floats via repr."""
    if isinstance(value, float):
        return repr(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Scalar) -> str:
    """Render a scalar as a terminating decimal ("1.2") when it has one, else as "p/q"."""
    if isinstance(value, float):
        return repr(value)
    value = Fraction(value)
    rest, twos, fives = value.denominator, 0, 0
    while rest % 2 == 0:
        rest, twos = rest // 2, twos + 1
    while rest % 5 == 0:
        rest, fives = rest // 5, fives + 1
    if rest != 1:
        return format_rational(value)
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = abs(value.numerator) * 10 ** digits // value.denominator
    sign = "-" if value < 0 else ""
    whole, frac = divmod(scaled, 10 ** digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


@dataclass(frozen=True)
class Arithmetic:
    """
    Number mode for a computation.

    In exact mode all values are Fractions and comparisons are exact. In float
    mode values are doubles and every comparison allows `tolerance` slack.
    """

    exact: bool = True
    tolerance: float = 1e-9

    @classmethod
    def exact_mode(cls) -> 'Arithmetic':
        return cls(exact=True, tolerance=0.0)

    @classmethod
    def float_mode(cls, tolerance: float = 1e-9) -> 'Arithmetic':
        return cls(exact=False, tolerance=tolerance)

    @property
    def zero(self) -> Scalar:
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self) -> Scalar:
        return Fraction(1) if self.exact else 1.0

    def coerce(self, value) -> Scalar:
        """Convert a number into this mode's representation."""
        if self.exact:
            return Fraction(value)
        return float(value)

    def ge(self, a: Scalar, b: Scalar) -> bool:
        """a ≥ b (within tolerance in float mode)."""
        if self.exact:
            return a >= b
        return a >= b - self.tolerance

    def le(self, a: Scalar, b: Scalar) -> bool:
        """a ≤ b (within tolerance in float mode)."""
        return self.ge(b, a)

    def gt(self, a: Scalar, b: Scalar) -> bool:
        """a > b by more than the tolerance."""
        return not self.le(a, b)

    def lt(self, a: Scalar, b: Scalar) -> bool:
        return not self.ge(a, b)

    def eq(self, a: Scalar, b: Scalar) -> bool:
        if self.exact:
            return a == b
        return abs(a - b) <= self.tolerance

    def is_zero(self, value: Scalar) -> bool:
        return self.eq(value, self.zero)


EXACT = Arithmetic.exact_mode()
