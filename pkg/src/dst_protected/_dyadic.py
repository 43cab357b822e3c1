"""Dyadic rationals as ``(numerator, exponent)`` pairs meaning numerator / 2**exponent.

Every DST expectation has a power-of-two denominator, and near N = 2000 those
denominators run to millions of bits. ``Fraction`` normalises with a gcd that
is quadratic in the operand size, so the heavy loops work on plain integers
and convert back only at the API boundary.
"""

from __future__ import annotations

from fractions import Fraction


def reduce(numerator: int, exponent: int) -> tuple[int, int]:
    if numerator == 0:
        return 0, 0
    shift = min((numerator & -numerator).bit_length() - 1, exponent)
    return numerator >> shift, exponent - shift


def to_fraction(numerator: int, exponent: int) -> Fraction:
    numerator, exponent = reduce(numerator, exponent)
    if exponent < 0:
        return Fraction(numerator << -exponent)
    # already in lowest terms: skip Fraction's gcd
    result = Fraction.__new__(Fraction)
    result._numerator = numerator
    result._denominator = 1 << exponent
    return result


def is_dyadic(value: Fraction) -> bool:
    d = value.denominator
    return d & (d - 1) == 0


def from_fraction(value: Fraction) -> tuple[int, int]:
    if not is_dyadic(value):
        raise ValueError(f"denominator of {value} is not a power of two")
    return value.numerator, value.denominator.bit_length() - 1


def align(pairs) -> tuple[list[int], int]:
    """Rescale pairs to a shared exponent; returns (numerators, exponent)."""
    pairs = list(pairs)
    top = max((e for _, e in pairs), default=0)
    return [n << (top - e) for n, e in pairs], top
