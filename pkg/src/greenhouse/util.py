"""Small numeric helpers shared across modules."""

from __future__ import annotations

import math


def round_half_away(x: float) -> int:
    """Round with ties going away from zero (so -0.5 -> -1, 0.5 -> 1)."""
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def clamp(value: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, value))
