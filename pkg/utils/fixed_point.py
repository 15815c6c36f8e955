"""
Fixed-point interpretation of register basis labels.

A register of `width` bits whose binary point sits `point` bits from the
right represents the label k as the real k * 2**(-point). Integer inputs such
as the oracle values use point 0 (alpha.0); the uniformly superposed grid of
the amplitude register uses point m (0.j).
"""

from dataclasses import dataclass

import sympy

from utils.errors import ValidationError


@dataclass(frozen=True)
class FixedPointFormat:
    """Width in bits plus binary-point position counted from the right."""

    width: int
    point: int = 0

    def __post_init__(self):
        if self.width < 1:
            raise ValidationError(f"fixed-point width must be >= 1, got {self.width}")
        if not 0 <= self.point <= self.width:
            raise ValidationError(
                f"binary point must lie in [0, {self.width}], got {self.point}"
            )

    @property
    def size(self):
        return 1 << self.width

    def value(self, label):
        """
        Interpret a basis label as a real number.

        Args:
            label: Integer basis label of the register

        Returns:
            label * 2**(-point) as a float
        """
        self.check_label(label)
        return label / float(1 << self.point)

    def rational(self, label):
        """Exact value of a label as a sympy Rational."""
        self.check_label(label)
        return sympy.Rational(label, 1 << self.point)

    def check_label(self, label):
        if not 0 <= label < self.size:
            raise ValidationError(
                f"label {label} does not fit a {self.width}-bit register"
            )

    def encode(self, value):
        """
        Truncate a non-negative real (or sympy number) onto the grid.

        Args:
            value: Non-negative number to encode

        Returns:
            floor(value * 2**point) as a Python int
        """
        label = _truncate(value, self.point)
        self.check_label(label)
        return label

    def aligned(self, label, point):
        """
        Left-shift a label so it is expressed with a larger binary point.

        Args:
            label: Label in this format
            point: Target binary point (>= self.point)

        Returns:
            Integer label with the same value under the target point
        """
        if point < self.point:
            raise ValidationError(
                f"cannot align point {self.point} down to {point} without rounding"
            )
        return label << (point - self.point)

    @classmethod
    def integer(cls, max_value):
        """Smallest integer format holding every value up to max_value."""
        return cls(width=max(1, int(max_value).bit_length()), point=0)

    @classmethod
    def fitting(cls, values, point):
        """
        Narrowest format with the given binary point that encodes every value.

        Args:
            values: Non-negative numbers (ints, floats or sympy numbers)
            point: Binary point

        Returns:
            FixedPointFormat of width >= max(1, point)
        """
        # truncation is monotone, so the largest value sets the width
        top = _truncate(max(values), point)
        return cls(width=max(1, point, top.bit_length()), point=point)


def _truncate(value, point):
    """floor(value * 2**point) computed exactly."""
    if isinstance(value, int):
        return value << point
    # floats convert to their exact binary fraction
    exact = sympy.Rational(value) if isinstance(value, float) else sympy.sympify(value)
    return int(sympy.floor(exact * (1 << point)))
