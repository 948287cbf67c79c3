"""Certified rational intervals."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class Enclosure:
    """``lo <= value <= hi``; ``hi - lo`` equals the tail bound that produced it."""

    lo: Fraction
    hi: Fraction
    terms_used: int
    tail_bound: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
        if self.hi - self.lo != self.tail_bound:
            raise ValueError("interval width must equal the tail bound")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class MeasureEnclosure(Enclosure):
    """An enclosure of a coin-flip measure, hence inside [0, 1]."""

    def __post_init__(self):
        super().__post_init__()
        if self.lo < 0 or self.hi > 1:
            raise ValueError(f"measure enclosure [{self.lo}, {self.hi}] leaves [0, 1]")
