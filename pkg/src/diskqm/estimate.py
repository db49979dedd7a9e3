"""Numerical values carried with an error bound."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class QmEstimate:
    value: float
    error_bound: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.error_bound >= 0.0) or self.error_bound == float("inf"):
            raise ValueError(f"error bound must be finite and nonnegative, got {self.error_bound}")

    def __float__(self):
        return float(self.value)

    def __sub__(self, other: "QmEstimate") -> "QmEstimate":
        return QmEstimate(self.value - other.value, self.error_bound + other.error_bound)

    def __add__(self, other: "QmEstimate") -> "QmEstimate":
        return QmEstimate(self.value + other.value, self.error_bound + other.error_bound)

    def scaled(self, c: float) -> "QmEstimate":
        return QmEstimate(c * self.value, abs(c) * self.error_bound, self.meta)
