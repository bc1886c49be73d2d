from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

from src.domain.mip import MipModel
from src.domain.value_objects import SolveStatus


@dataclass(frozen=True)
class SolveLimits:
    """Ограничения одного запуска решателя"""
    time_limit_s: float = 3600.0
    mip_gap_abs: float = 0.0
    threads: int | None = None
    seed: int | None = None
    msg: bool = False


@dataclass
class SolveResult:
    status: SolveStatus
    values: dict[str, float] = field(default_factory=dict)
    objective: float | None = None
    gap: float | None = None
    runtime_s: float = 0.0


@runtime_checkable
class SolverBackend(Protocol):
    """Контракт MIP-решателя: бинарные и непрерывные переменные, линейные ограничения, минимизация"""

    name: str

    def available(self) -> bool:
        """Установлен ли движок"""
        ...

    def solve(self, model: MipModel, limits: SolveLimits) -> SolveResult:
        """Решить модель; для optimal/feasible вернуть полное присваивание"""
        ...

    def dump(self, model: MipModel, path: Path) -> Path:
        """Записать модель в LP-файл для автономного решения"""
        ...
