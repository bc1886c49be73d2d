from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from src.core.logging import get_logger
from src.domain.grid import GridGraph, TurnTable
from src.domain.value_objects import Edge, NodeId

log = get_logger(__name__)


@dataclass(frozen=True)
class Path:
    """Маршрут от точки входа до ВПП"""
    nodes: tuple[NodeId, ...]
    length: float  # в единицах сетки

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(Edge(a, b) for a, b in zip(self.nodes, self.nodes[1:]))

    @property
    def entry(self) -> NodeId:
        return self.nodes[0]

    @property
    def hop_count(self) -> int:
        return len(self.nodes) - 1

    def physical_length(self, pixel_side: float) -> float:
        return self.length * pixel_side


def _make_path(g: GridGraph, nodes: Iterable[NodeId]) -> Path:
    nodes = tuple(nodes)
    length = sum(g.length(Edge(a, b)) for a, b in zip(nodes, nodes[1:]))
    return Path(nodes=nodes, length=length)


def find_all_paths(
    g: GridGraph,
    turns: TurnTable,
    delta: Mapping[NodeId, float],
    start: NodeId,
    lambda_nodes: int,
) -> list[Path]:
    """Поиск в глубину с отсечением по δ: простые пути не длиннее λ узлов"""
    if lambda_nodes < 1:
        raise ValueError(f"lambda must be >= 1, got {lambda_nodes}")
    if start == g.runway:
        return [Path(nodes=(start,), length=0.0)]

    found: list[Path] = []
    stack: list[NodeId] = [start]
    on_path: set[NodeId] = {start}

    def visit(node: NodeId, incoming: Edge | None) -> None:
        hops = len(stack) - 1  # ι
        blocked = turns.forbidden_after(incoming)
        for nxt in g.adjacency(node):
            if nxt in on_path or nxt in blocked:
                continue
            if not hops + delta.get(nxt, float("inf")) < lambda_nodes - 1:
                continue
            if nxt == g.runway:
                found.append(_make_path(g, (*stack, nxt)))
                continue
            stack.append(nxt)
            on_path.add(nxt)
            visit(nxt, Edge(node, nxt))
            on_path.discard(nxt)
            stack.pop()

    visit(start, None)
    return found


@dataclass(frozen=True)
class PathCatalog:
    """Все пути и обратные индексы: Π_b, Π̄_i, ζ_ij"""
    paths: tuple[Path, ...]
    per_entry: Mapping[NodeId, tuple[int, ...]]
    by_node: Mapping[NodeId, frozenset[int]]
    by_edge: Mapping[Edge, frozenset[int]]

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, path_id: int) -> Path:
        return self.paths[path_id]

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    def edges_of(self, path_id: int) -> tuple[Edge, ...]:
        """θ_π"""
        return self.paths[path_id].edges

    def through_node(self, node: NodeId) -> frozenset[int]:
        return self.by_node.get(node, frozenset())

    def through_edge(self, edge: Edge) -> frozenset[int]:
        return self.by_edge.get(edge, frozenset())

    def entry_paths(self, entry: NodeId) -> tuple[int, ...]:
        return self.per_entry.get(entry, ())

    def path_id(self, nodes: Iterable[NodeId]) -> int | None:
        key = tuple(nodes)
        for pid in self.entry_paths(key[0]) if key else ():
            if self.paths[pid].nodes == key:
                return pid
        return None

    def counts(self) -> dict[NodeId, int]:
        return {entry: len(ids) for entry, ids in self.per_entry.items()}


def build_catalog(paths_per_entry: Mapping[NodeId, list[Path]]) -> PathCatalog:
    paths: list[Path] = []
    per_entry: dict[NodeId, tuple[int, ...]] = {}
    by_node: dict[NodeId, set[int]] = {}
    by_edge: dict[Edge, set[int]] = {}
    for entry in sorted(paths_per_entry):
        ids = []
        for path in paths_per_entry[entry]:
            pid = len(paths)
            paths.append(path)
            ids.append(pid)
            for node in path.nodes:
                by_node.setdefault(node, set()).add(pid)
            for edge in path.edges:
                by_edge.setdefault(edge, set()).add(pid)
        per_entry[entry] = tuple(ids)
    return PathCatalog(
        paths=tuple(paths),
        per_entry=per_entry,
        by_node={k: frozenset(v) for k, v in by_node.items()},
        by_edge={k: frozenset(v) for k, v in by_edge.items()},
    )


def generate_catalog(
    g: GridGraph, turns: TurnTable, delta: Mapping[NodeId, float], lambda_nodes: int
) -> PathCatalog:
    per_entry = {
        entry: find_all_paths(g, turns, delta, entry, lambda_nodes) for entry in g.entries
    }
    catalog = build_catalog(per_entry)
    log.info(
        f"generated {len(catalog)} paths for lambda={lambda_nodes}",
        extra={"per_entry": catalog.counts()},
    )
    return catalog
