import math

import pytest

from src.core.errors import NotAdjacentError, OffGridError, OverlapError
from src.domain.grid import (
    UNREACHABLE,
    build_grid,
    build_turn_table,
    crossing_quads,
    edge_angle,
    reverse_bfs_distances,
)
from src.domain.value_objects import Edge, QuadVariant


class TestBuildGrid:
    """Построение 8-связной сетки"""

    def test_edge_count(self, grid_3x3):
        """40 ориентированных рёбер минус 3 в точку входа и 3 из ВПП"""
        g, _ = grid_3x3
        assert len(g.edges) == 34

    def test_no_edges_into_entry(self, grid_3x3):
        g, _ = grid_3x3
        assert g.in_edges(0) == []
        assert [e.target for e in g.out_edges(0)] == [1, 3, 4]

    def test_no_edges_out_of_runway(self, grid_3x3):
        g, _ = grid_3x3
        assert g.out_edges(8) == []
        assert sorted(e.source for e in g.in_edges(8)) == [4, 5, 7]

    def test_lengths(self, grid_3x3):
        g, _ = grid_3x3
        assert g.length(Edge(1, 2)) == 1.0
        assert g.length(Edge(1, 5)) == pytest.approx(math.sqrt(2))
        assert g.physical_length(Edge(1, 5)) == pytest.approx(6 * math.sqrt(2))

    def test_obstacle_removes_node(self):
        g = build_grid(3, 3, 6.0, [0], 8, obstacles=[4])
        assert 4 not in g.nodes
        assert not any(4 in e for e in g.edges)

    def test_runway_on_entry_rejected(self):
        with pytest.raises(OverlapError):
            build_grid(3, 3, 6.0, [0, 8], 8)

    def test_obstacle_on_entry_rejected(self):
        with pytest.raises(OverlapError):
            build_grid(3, 3, 6.0, [0], 8, obstacles=[0])

    def test_off_grid_rejected(self):
        with pytest.raises(OffGridError):
            build_grid(3, 3, 6.0, [9], 8)

    def test_degenerate_grid_rejected(self):
        with pytest.raises(ValueError):
            build_grid(1, 5, 6.0, [0], 4)

    def test_crossing_pair(self, grid_3x3):
        g, _ = grid_3x3
        assert g.crossing_pair(Edge(1, 5)) == (Edge(2, 4), Edge(4, 2))
        assert g.crossing_pair(Edge(1, 2)) is None


class TestTurns:
    """Углы поворота и таблица запрещённых продолжений"""

    def test_edge_angle(self, grid_3x3):
        g, _ = grid_3x3
        assert edge_angle(g, Edge(3, 4), Edge(4, 5)) == 180.0
        assert edge_angle(g, Edge(3, 4), Edge(4, 8)) == 135.0
        assert edge_angle(g, Edge(3, 4), Edge(4, 7)) == 90.0

    def test_edge_angle_needs_shared_node(self, grid_3x3):
        g, _ = grid_3x3
        with pytest.raises(NotAdjacentError):
            edge_angle(g, Edge(3, 4), Edge(5, 8))

    def test_forbidden_after(self, grid_3x3):
        """После шага на восток запрещены повороты круче 45 градусов"""
        _, turns = grid_3x3
        assert turns.forbidden_after(Edge(0, 1)) == frozenset({3, 4})
        assert turns.forbidden_after(None) == frozenset()

    def test_gamma_zero_forbids_nothing(self, grid_3x3):
        g, _ = grid_3x3
        turns = build_turn_table(g, 0.0)
        assert all(not blocked for blocked in turns.forbidden.values())

    def test_gamma_out_of_range(self, grid_3x3):
        g, _ = grid_3x3
        with pytest.raises(ValueError):
            build_turn_table(g, 200.0)

    def test_m1_forbidden_in_edge_form(self, grid_3x3):
        _, turns = grid_3x3
        assert turns.m1_forbidden(Edge(0, 1)) == frozenset({Edge(1, 3), Edge(1, 4)})


class TestDistances:
    def test_desk_grid(self):
        g = build_grid(5, 5, 6.0, [0, 4], 22)
        delta = reverse_bfs_distances(g)
        assert delta[22] == 0
        assert delta[0] == 4
        assert delta[4] == 4
        assert delta[17] == 1

    def test_unreachable_behind_obstacles(self):
        # столбец 1 закрыт целиком: от входа до ВПП не дойти
        g = build_grid(3, 3, 6.0, [0], 8, obstacles=[1, 4, 7])
        assert reverse_bfs_distances(g)[0] == UNREACHABLE

    def test_arlanda_entries(self):
        """Кратчайшие маршруты 8, 5, 5 и 6 переходов"""
        g = build_grid(15, 11, 6.0, [6, 77, 65, 158], 93)
        delta = reverse_bfs_distances(g)
        assert [delta[b] for b in g.entries] == [8, 5, 5, 6]


class TestCrossingQuads:
    def test_variants(self, grid_3x3):
        g, _ = grid_3x3
        quads = {q.anchor: q for q in crossing_quads(g)}
        assert quads[0].variant is QuadVariant.ENTRY_AT_ANCHOR
        assert quads[1].variant is QuadVariant.INTERIOR
        assert quads[4].variant is QuadVariant.RUNWAY_CORNER

    def test_missing_diagonals_dropped(self, grid_3x3):
        g, _ = grid_3x3
        quads = {q.anchor: q for q in crossing_quads(g)}
        assert len(quads[1].edges) == 4
        assert Edge(4, 0) not in quads[0].edges
        assert Edge(8, 4) not in quads[4].edges
