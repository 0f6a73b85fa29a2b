"""Verdicts returned by the two checking procedures."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Holds:
    c_star: float
    bound: float
    kind: str = "Holds"


@dataclass(frozen=True)
class Inconclusive:
    c_star: float
    bound: float
    reason: str = ""
    kind: str = "Inconclusive"


@dataclass(frozen=True)
class WitnessFound:
    schedulers: tuple  # one FiniteMemoryScheduler per scheduler variable
    value: float
    iteration: int
    indices: tuple = ()
    kind: str = "WitnessFound"


@dataclass(frozen=True)
class NoWitnessWithinBound:
    bound: int
    schedulers_checked: int
    notes: tuple = field(default=())
    kind: str = "NoWitnessWithinBound"


Verdict = Holds | Inconclusive | WitnessFound | NoWitnessWithinBound
