"""Exact-arithmetic helpers shared by every module.

Money is carried as :class:`decimal.Decimal`.  Consensus amounts are GWei,
AMM amounts are token units with 18 fractional digits.  Ratios that must
compare exactly (edge weights, bribed fractions) use :class:`fractions.Fraction`.
"""

from __future__ import annotations

import functools
from decimal import (
    ROUND_DOWN,
    ROUND_HALF_EVEN,
    Context,
    Decimal,
    DivisionByZero,
    InvalidOperation,
    Overflow,
    localcontext,
)
from fractions import Fraction

GWEI_PER_ETH = Decimal(10) ** 9
WEI_QUANTUM = Decimal("1e-18")
GWEI_QUANTUM = Decimal("1e-9")

# 80 significant digits covers 10**24-sized reserves at 18 fractional digits
# with headroom for intermediate products.
CONTEXT = Context(
    prec=80,
    rounding=ROUND_HALF_EVEN,
    traps=[InvalidOperation, DivisionByZero, Overflow],
)


def exact(fn):
    """Run ``fn`` under the package decimal context (thread-safe)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with localcontext(CONTEXT):
            return fn(*args, **kwargs)

    return wrapper


def to_decimal(value) -> Decimal:
    """Convert ints, strings, floats (via their repr) and fractions to Decimal."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not amounts")
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        return Decimal(repr(value))
    if isinstance(value, Fraction):
        with localcontext(CONTEXT):
            return Decimal(value.numerator) / Decimal(value.denominator)
    if isinstance(value, str):
        try:
            d = Decimal(value.strip())
        except InvalidOperation:
            raise ValueError(f"not a decimal number: {value!r}") from None
        if not d.is_finite():
            raise ValueError(f"not a finite decimal number: {value!r}")
        return d
    raise TypeError(f"cannot convert {type(value).__name__} to Decimal")


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(to_decimal(value))


def floor_amount(value: Decimal) -> Decimal:
    """Round toward zero onto the 18-digit token grid."""
    return value.quantize(WEI_QUANTUM, rounding=ROUND_DOWN, context=CONTEXT)


def round_gwei(value: Decimal) -> Decimal:
    return value.quantize(GWEI_QUANTUM, rounding=ROUND_HALF_EVEN, context=CONTEXT)


def gwei_to_eth(value) -> Decimal:
    return CONTEXT.divide(to_decimal(value), GWEI_PER_ETH)


def eth_to_gwei(value) -> Decimal:
    return CONTEXT.multiply(to_decimal(value), GWEI_PER_ETH)


def fmt(value: Decimal) -> str:
    """Canonical decimal string: no exponent, no trailing zeros."""
    if value == 0:
        return "0"
    s = format(value.normalize(CONTEXT), "f")
    return s
