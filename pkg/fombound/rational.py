"""Exact parsing and high precision helpers shared by the construction, simulator and CLI."""
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Union

from .const import HIGH_PRECISION_DIGITS, HIGH_PRECISION_SLACK
from .exceptions import InvalidParameters

Number = Union[int, float, str, Fraction]


def parse_rational(value: Number) -> Fraction:
    """Convert "p/q", decimal strings and numbers to an exact Fraction in lowest terms."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # go through repr so that 7.233629 becomes 7233629/1000000 rather than its binary expansion
        value = repr(value)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exception:
        raise InvalidParameters(f"cannot parse {value!r} as a rational number") from exception


def parse_real(value: Number) -> float:
    """Convert "p/q", decimal strings and numbers to a float."""
    if isinstance(value, (int, float)):
        return float(value)
    return float(parse_rational(value))


def parse_list(text: str) -> list[str]:
    """Split a comma separated command line list, ignoring blanks."""
    return [item.strip() for item in text.split(",") if item.strip() != ""]


def format_fraction(value: Fraction) -> str:
    """Render a Fraction as "p/q" (or "p" when integral)."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def to_decimal(value: Fraction, rounding: str = ROUND_FLOOR) -> Decimal:
    """Convert a Fraction to a Decimal with HIGH_PRECISION_DIGITS digits, rounding in the given direction."""
    with localcontext() as ctx:
        ctx.prec = HIGH_PRECISION_DIGITS + 10
        ctx.rounding = rounding
        return Decimal(value.numerator) / Decimal(value.denominator)


def one_minus_exp_upper(exponent: Fraction) -> Fraction:
    """
    Return a rational upper bound for 1 - exp(-exponent).

    The exponential is evaluated with HIGH_PRECISION_DIGITS significant digits and the result is moved
    outwards by HIGH_PRECISION_SLACK, so the bound holds although e is irrational.
    """
    with localcontext() as ctx:
        ctx.prec = HIGH_PRECISION_DIGITS
        # exp(-x) is decreasing, rounding x up gives a smaller exp and thus a larger 1 - exp
        approx = (-to_decimal(exponent, ROUND_CEILING)).exp()
        upper = Decimal(1) - approx + Decimal(HIGH_PRECISION_SLACK)
    return Fraction(upper)


def one_minus_exp_lower(exponent: Fraction) -> Fraction:
    """Return a rational lower bound for 1 - exp(-exponent), see one_minus_exp_upper."""
    with localcontext() as ctx:
        ctx.prec = HIGH_PRECISION_DIGITS
        approx = (-to_decimal(exponent, ROUND_FLOOR)).exp()
        lower = Decimal(1) - approx - Decimal(HIGH_PRECISION_SLACK)
    return Fraction(lower)
