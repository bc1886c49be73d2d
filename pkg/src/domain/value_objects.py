from __future__ import annotations

from enum import Enum
from typing import NamedTuple

NodeId = int


class Edge(NamedTuple):
    """Направленное ребро сетки (source -> target)"""
    source: NodeId
    target: NodeId

    def reversed(self) -> "Edge":
        return Edge(self.target, self.source)

    def __str__(self) -> str:
        return f"{self.source}->{self.target}"


class QuadVariant(str, Enum):
    """Какие диагонали квадрата участвуют в ограничении пересечения"""
    INTERIOR = "interior"
    ENTRY_AT_ANCHOR = "entry_at_anchor"      # i ∈ P: нет (i+1+n, i)
    ENTRY_AT_RIGHT = "entry_at_right"        # i+1 ∈ P: нет (i+n, i+1)
    ENTRY_AT_BELOW = "entry_at_below"        # i+n ∈ P: нет (i+1, i+n)
    ENTRY_AT_OPPOSITE = "entry_at_opposite"  # i+n+1 ∈ P: нет (i, i+1+n)
    RUNWAY_CORNER = "runway_corner"
    PARTIAL = "partial"                      # препятствия или несколько особых углов


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"
    ERROR = "error"

    @property
    def has_solution(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE)


class ChainMode(str, Enum):
    """Режимы цепочки периодов: a - независимо, b - переходящие ВС, c - согласованность, d - b+c"""
    INDEPENDENT = "a"
    CARRYOVER = "b"
    CONSISTENCY = "c"
    BOTH = "d"

    @property
    def uses_carryover(self) -> bool:
        return self in (ChainMode.CARRYOVER, ChainMode.BOTH)

    @property
    def uses_consistency(self) -> bool:
        return self in (ChainMode.CONSISTENCY, ChainMode.BOTH)


def parse_clock(value: str) -> int:
    """'05:03' -> минуты от полуночи"""
    hours, sep, minutes = value.strip().partition(":")
    if not sep or not hours.isdigit() or not minutes.isdigit() or len(minutes) != 2:
        raise ValueError(f"expected hh:mm, got {value!r}")
    if int(minutes) >= 60:
        raise ValueError(f"minutes out of range in {value!r}")
    return int(hours) * 60 + int(minutes)


def format_clock(minute_of_day: int) -> str:
    if minute_of_day < 0:
        raise ValueError(f"negative clock time {minute_of_day}")
    return f"{minute_of_day // 60:02d}:{minute_of_day % 60:02d}"
