"""Values with symmetric absolute uncertainty and quadrature propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ZeroDenominator


@dataclass(frozen=True)
class MeasuredQuantity:
    value: float
    error: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"value must be finite, got {self.value!r}")
        if not self.error >= 0:
            raise ValueError(f"error must be >= 0, got {self.error!r}")

    def __neg__(self):
        return MeasuredQuantity(-self.value, self.error)

    def __str__(self):
        return format_printed(self.value, self.error)

    def to_dict(self):
        return {"value": self.value, "error": self.error,
                "printed": format_printed(self.value, self.error)}


def propagate_sum(terms: Iterable[MeasuredQuantity]) -> MeasuredQuantity:
    """Add already-signed terms; absolute errors combine in quadrature."""
    terms = list(terms)
    value = math.fsum(t.value for t in terms)
    error = math.sqrt(math.fsum(t.error * t.error for t in terms))
    return MeasuredQuantity(value, error)


def propagate_ratio(numerator: MeasuredQuantity,
                    denominator: MeasuredQuantity) -> MeasuredQuantity:
    """Divide, combining relative errors in quadrature.

    Uses the equivalent absolute form sqrt((ea/b)^2 + (a*eb/b^2)^2) so a zero
    numerator does not produce 0/0.
    """
    a, b = numerator.value, denominator.value
    if b == 0:
        raise ZeroDenominator("denominator value is zero")
    value = a / b
    error = math.hypot(numerator.error / b, a * denominator.error / (b * b))
    return MeasuredQuantity(value, abs(error))


def _error_decimals(error: float) -> int:
    # errors >= 1 print as integers, smaller ones to one significant figure
    if error <= 0 or not math.isfinite(error):
        return 0
    if error >= 1:
        return 0
    return -math.floor(math.log10(error))


def round_to_error(value: float, error: float) -> tuple[float, float, int]:
    """Round ``error`` to printed precision and ``value`` to the same place.

    Returns (value, error, decimals).
    """
    decimals = _error_decimals(error)
    rounded_error = round(error, decimals)
    # rounding can carry into the next decade (0.96 -> 1.0)
    again = _error_decimals(rounded_error)
    if again < decimals:
        decimals = again
        rounded_error = round(error, decimals)
    return round(value, decimals), rounded_error, decimals


def format_printed(value: float, error: float, unit: str | None = None) -> str:
    """Printed form, value rounded to the error's place.

    e.g. ``-(0.28 ± 0.04)`` or ``(11 ± 9) mg P/L``.
    """
    v, e, decimals = round_to_error(value, error)
    d = max(decimals, 0)
    body = f"({abs(v):.{d}f} ± {e:.{d}f})"
    text = "-" + body if v < 0 else body
    return f"{text} {unit}" if unit else text
