"""Дискретизация TMA: сетка с восемью соседями, таблицы поворотов, квадраты пересечений"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import networkx as nx

from src.core.errors import NotAdjacentError, OffGridError, OverlapError
from src.core.logging import get_logger
from src.domain.value_objects import Edge, NodeId, QuadVariant

log = get_logger(__name__)

UNREACHABLE = math.inf

_NEIGHBOR_STEPS = tuple(
    (dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)
)


@dataclass(frozen=True)
class GridGraph:
    rows: int
    cols: int
    pixel_side: float
    entries: tuple[NodeId, ...]
    runway: NodeId
    removed: frozenset[NodeId]
    digraph: nx.DiGraph = field(repr=False, compare=False)

    # --- координаты ---
    def node(self, row: int, col: int) -> NodeId:
        return row * self.cols + col

    def coords(self, node: NodeId) -> tuple[int, int]:
        return divmod(node, self.cols)

    @property
    def nodes(self) -> list[NodeId]:
        return sorted(self.digraph.nodes)

    @property
    def edges(self) -> list[Edge]:
        return sorted(Edge(i, j) for i, j in self.digraph.edges)

    @property
    def special(self) -> frozenset[NodeId]:
        return frozenset(self.entries) | {self.runway}

    def adjacency(self, node: NodeId) -> list[NodeId]:
        """Λ_i: упорядоченный список последователей"""
        if node not in self.digraph:
            return []
        return sorted(self.digraph.successors(node))

    def predecessors(self, node: NodeId) -> list[NodeId]:
        if node not in self.digraph:
            return []
        return sorted(self.digraph.predecessors(node))

    def has_edge(self, edge: Edge) -> bool:
        return self.digraph.has_edge(*edge)

    def length(self, edge: Edge) -> float:
        """Длина в единицах сетки: 1 или √2"""
        return self.digraph.edges[edge]["length"]

    def physical_length(self, edge: Edge) -> float:
        return self.length(edge) * self.pixel_side

    def in_edges(self, node: NodeId) -> list[Edge]:
        return [Edge(j, node) for j in self.predecessors(node)]

    def out_edges(self, node: NodeId) -> list[Edge]:
        return [Edge(node, k) for k in self.adjacency(node)]

    def is_diagonal(self, edge: Edge) -> bool:
        (r1, c1), (r2, c2) = self.coords(edge.source), self.coords(edge.target)
        return r1 != r2 and c1 != c2

    def crossing_pair(self, edge: Edge) -> tuple[Edge, Edge] | None:
        """Для диагонали (i,j) - обе ориентации второй диагонали того же квадрата"""
        if not self.is_diagonal(edge):
            return None
        (r1, c1), (r2, c2) = self.coords(edge.source), self.coords(edge.target)
        a, b = self.node(r1, c2), self.node(r2, c1)
        return Edge(a, b), Edge(b, a)


def _check_on_grid(rows: int, cols: int, node: NodeId, what: str) -> None:
    if not 0 <= node < rows * cols:
        raise OffGridError(f"{what} {node} is outside a {rows}x{cols} grid", node=node)


def build_grid(
    rows: int,
    cols: int,
    pixel_side: float,
    entries: Iterable[NodeId],
    runway: NodeId,
    obstacles: Iterable[NodeId] = (),
) -> GridGraph:
    if rows < 2 or cols < 2:
        raise ValueError(f"grid must be at least 2x2, got {rows}x{cols}")
    if pixel_side <= 0:
        raise ValueError(f"pixel side must be positive, got {pixel_side}")

    entries = tuple(entries)
    removed = frozenset(obstacles)
    for node in (*entries, runway, *removed):
        _check_on_grid(rows, cols, node, "node")
    if runway in entries:
        raise OverlapError(f"runway {runway} coincides with an entry point", node=runway)
    if len(set(entries)) != len(entries):
        raise OverlapError("duplicate entry points", entries=list(entries))
    blocked = removed & (set(entries) | {runway})
    if blocked:
        raise OverlapError(f"entry/runway nodes {sorted(blocked)} are obstacles")

    entry_set = set(entries)
    graph = nx.DiGraph()
    graph.add_nodes_from(n for n in range(rows * cols) if n not in removed)
    for node in list(graph.nodes):
        r, c = divmod(node, cols)
        if node == runway:
            continue  # из ВПП рёбер нет
        for dr, dc in _NEIGHBOR_STEPS:
            rr, cc = r + dr, c + dc
            if not (0 <= rr < rows and 0 <= cc < cols):
                continue
            nbr = rr * cols + cc
            if nbr in removed or nbr in entry_set:
                continue  # в точку входа рёбер нет
            graph.add_edge(node, nbr, length=math.sqrt(2.0) if dr and dc else 1.0)

    log.debug(
        f"grid {rows}x{cols}: {graph.number_of_nodes()} nodes, {graph.number_of_edges()} edges"
    )
    return GridGraph(
        rows=rows,
        cols=cols,
        pixel_side=pixel_side,
        entries=entries,
        runway=runway,
        removed=removed,
        digraph=graph,
    )


def edge_angle(g: GridGraph, e1: Edge, e2: Edge) -> float:
    """Внутренний угол в общем узле: 180 - прямо, 0 - разворот"""
    if e1.target != e2.source:
        raise NotAdjacentError(f"{e1} does not end where {e2} starts")
    (r0, c0), (r1, c1), (r2, c2) = (
        g.coords(e1.source), g.coords(e1.target), g.coords(e2.target)
    )
    back = (r0 - r1, c0 - c1)
    ahead = (r2 - r1, c2 - c1)
    norm = math.hypot(*back) * math.hypot(*ahead)
    cos = (back[0] * ahead[0] + back[1] * ahead[1]) / norm
    return round(math.degrees(math.acos(max(-1.0, min(1.0, cos)))), 9)


@dataclass(frozen=True)
class TurnTable:
    gamma_deg: float
    forbidden: Mapping[Edge, frozenset[NodeId]]

    def forbidden_after(self, edge: Edge | None) -> frozenset[NodeId]:
        # у первого ребра пути предшественника нет
        if edge is None:
            return frozenset()
        return self.forbidden.get(edge, frozenset())

    def m1_forbidden(self, edge: Edge) -> frozenset[Edge]:
        """Γ_ij в рёберной форме"""
        return frozenset(Edge(edge.target, k) for k in self.forbidden_after(edge))


def build_turn_table(g: GridGraph, gamma_deg: float) -> TurnTable:
    if not 0 <= gamma_deg <= 180:
        raise ValueError(f"gamma must lie in [0, 180], got {gamma_deg}")
    forbidden: dict[Edge, frozenset[NodeId]] = {}
    for edge in g.edges:
        forbidden[edge] = frozenset(
            k for k in g.adjacency(edge.target)
            if edge_angle(g, edge, Edge(edge.target, k)) < gamma_deg
        )
    return TurnTable(gamma_deg=gamma_deg, forbidden=forbidden)


def reverse_bfs_distances(g: GridGraph) -> dict[NodeId, float]:
    """δ: минимальное число переходов до ВПП по направлению рёбер"""
    hops = nx.single_source_shortest_path_length(g.digraph.reverse(copy=False), g.runway)
    return {node: hops.get(node, UNREACHABLE) for node in g.nodes}


@dataclass(frozen=True)
class CrossQuad:
    anchor: NodeId
    edges: tuple[Edge, ...]
    variant: QuadVariant


def _quad_variant(g: GridGraph, anchor: NodeId) -> QuadVariant:
    n = g.cols
    corners = {
        anchor: QuadVariant.ENTRY_AT_ANCHOR,
        anchor + 1: QuadVariant.ENTRY_AT_RIGHT,
        anchor + n: QuadVariant.ENTRY_AT_BELOW,
        anchor + n + 1: QuadVariant.ENTRY_AT_OPPOSITE,
    }
    entries = [corners[c] for c in corners if c in g.entries]
    has_runway = g.runway in corners
    has_obstacle = any(c in g.removed for c in corners)
    if has_obstacle or len(entries) + has_runway > 1:
        return QuadVariant.PARTIAL
    if entries:
        return entries[0]
    if has_runway:
        return QuadVariant.RUNWAY_CORNER
    return QuadVariant.INTERIOR


def crossing_quads(g: GridGraph) -> list[CrossQuad]:
    """По квадрату на каждую якорную вершину из V' с существующими диагоналями"""
    n = g.cols
    quads: list[CrossQuad] = []
    for row in range(g.rows - 1):
        for col in range(n - 1):
            i = g.node(row, col)
            diagonals = (
                Edge(i, i + 1 + n), Edge(i + 1 + n, i), Edge(i + n, i + 1), Edge(i + 1, i + n)
            )
            present = tuple(e for e in diagonals if g.has_edge(e))
            if len(present) < 2:
                continue
            quads.append(CrossQuad(anchor=i, edges=present, variant=_quad_variant(g, i)))
    return quads
