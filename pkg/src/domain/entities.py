from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

from src.domain.value_objects import Edge, NodeId, SolveStatus

if TYPE_CHECKING:
    from src.domain.pathgen import Path
    from src.domain.trajectories import ProfileStore


@dataclass(frozen=True, slots=True)
class Aircraft:
    """Прибывающее ВС: точка входа, плановое время, категория турбулентности"""
    id: str
    entry: NodeId
    planned_time: int
    category: int = 1


@dataclass(frozen=True)
class SeparationMatrix:
    """σ[(лидер, ведомый)] в минутах; Ω = max σ"""
    sigma: Mapping[tuple[int, int], int]

    def __post_init__(self) -> None:
        if not self.sigma:
            raise ValueError("separation matrix is empty")
        for pair, value in self.sigma.items():
            if value < 1:
                raise ValueError(f"separation {pair} must be >= 1, got {value}")
        for k1 in self.categories:
            for k2 in self.categories:
                if (k1, k2) not in self.sigma:
                    raise ValueError(f"separation matrix lacks pair {(k1, k2)}")

    @property
    def categories(self) -> tuple[int, ...]:
        return tuple(sorted({k for pair in self.sigma for k in pair}))

    @property
    def omega(self) -> int:
        return max(self.sigma.values())

    def __call__(self, leader: int, trailer: int) -> int:
        return self.sigma[(leader, trailer)]

    def collapsed(self) -> "SeparationMatrix":
        first = self.categories[0]
        return SeparationMatrix({(first, first): self.sigma[(first, first)]})

    @classmethod
    def from_rows(cls, rows: list[list[int]]) -> "SeparationMatrix":
        return cls({
            (i + 1, j + 1): value
            for i, row in enumerate(rows)
            for j, value in enumerate(row)
        })


@dataclass(frozen=True, slots=True)
class NodeOccupancy:
    category: int
    node: NodeId
    time: int


@dataclass(frozen=True, slots=True)
class EdgeOccupancy:
    edge: Edge
    t_start: int
    t_end: int

    def __post_init__(self) -> None:
        if self.t_start > self.t_end:
            raise ValueError(f"edge occupancy {self.edge} ends before it starts")


@dataclass(frozen=True)
class CarryoverState:
    """Занятость узлов и рёбер ВС, оставшихся в TMA с прошлого периода"""
    node_occupancies: tuple[NodeOccupancy, ...] = ()
    edge_occupancies: tuple[EdgeOccupancy, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.node_occupancies and not self.edge_occupancies


@dataclass(frozen=True)
class ConsistencyOptions:
    previous_tree: frozenset[Edge]
    budget: int


@dataclass(frozen=True)
class ModelOptions:
    beta: float = 0.1
    mu: int = 0
    lambda_nodes: int = 14
    gamma_deg: float = 135.0
    single_category: bool = False
    fixed_entry: bool = False
    single_final_approach: bool = True
    consistency: ConsistencyOptions | None = None
    carryover: CarryoverState | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")

    @property
    def effective_mu(self) -> int:
        return 0 if self.fixed_entry else self.mu

    @property
    def uses_tempo(self) -> bool:
        return self.fixed_entry and self.single_category

    @property
    def uses_window_cap(self) -> bool:
        return self.single_category and not self.fixed_entry

    def category_of(self, aircraft: Aircraft) -> int:
        return 1 if self.single_category else aircraft.category

    def separations(self, matrix: SeparationMatrix) -> SeparationMatrix:
        return matrix.collapsed() if self.single_category else matrix


@dataclass(frozen=True)
class GridLayout:
    """Входные данные сетки из файла сценария"""
    rows: int
    cols: int
    pixel_side: float
    entries: Mapping[str, NodeId]
    runway: NodeId
    runway_name: str = "RWY"
    obstacles: frozenset[NodeId] = frozenset()
    orientation: str = ""

    def entry_name(self, node: NodeId) -> str:
        for name, entry in self.entries.items():
            if entry == node:
                return name
        return str(node)


@dataclass
class Scenario:
    name: str
    layout: GridLayout
    aircraft: list[Aircraft]
    separation: SeparationMatrix
    horizon: int
    origin: int = 0
    period_start: int | None = None
    category_names: tuple[str, ...] = ("default",)
    profiles: ProfileStore | None = None
    provenance: str = ""

    def aircraft_at(self, entry: NodeId) -> list[Aircraft]:
        return [a for a in self.aircraft if a.entry == entry]

    def category_name(self, category: int) -> str:
        return self.category_names[category - 1]

    def count_in_category(self, category: int) -> int:
        return sum(1 for a in self.aircraft if a.category == category)


@dataclass(frozen=True, slots=True)
class Assignment:
    path_id: int
    entry_time: int


@dataclass
class ArrivalSolution:
    """Дерево, пути по точкам входа и расписание ВС"""
    status: SolveStatus
    objective: float | None = None
    tree_edges: frozenset[Edge] = frozenset()
    chosen_paths: dict[NodeId, Path] = field(default_factory=dict)
    assignments: dict[str, Assignment] = field(default_factory=dict)
    schedule: dict[str, tuple[tuple[NodeId, int], ...]] = field(default_factory=dict)
    avg_deviation: float | None = None
    gap: float | None = None
    runtime_s: float = 0.0

    @property
    def feasible(self) -> bool:
        return self.status.has_solution


@dataclass(frozen=True)
class TimetableRow:
    """Строка опубликованного расписания: вход, метки слияния и ВПП в минутах суток"""
    entry: str
    aircraft: str
    category: int
    planned: int
    scheduled: int
    merges: Mapping[str, int]
    runway: int


@dataclass(frozen=True)
class Timetable:
    name: str
    mu: int
    rows: tuple[TimetableRow, ...]
    runway_name: str = "RWY"
    period_start: int | None = None
    provenance: str = ""
    separation: SeparationMatrix | None = None

    def occupancies(self, row: TimetableRow) -> tuple[tuple[str, int], ...]:
        # метки слияния у каждого дерева свои, входы и ВПП общие
        merges = tuple((f"{self.name}:{label}", t) for label, t in sorted(row.merges.items()))
        return ((row.entry, row.scheduled), *merges, (self.runway_name, row.runway))
