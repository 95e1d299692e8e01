"""Percentage formatting shared by the corpus statistics and the evaluator."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def pct(numerator: int, denominator: int) -> float:
    """``100 * numerator / denominator`` rounded half-up to one decimal place.

    Exact rational arithmetic avoids the binary-float cases where 67.25 would
    come out as 67.2. An empty denominator gives 0.0.
    """
    if denominator == 0:
        return 0.0
    value = Decimal(100 * numerator) / Decimal(denominator)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))
