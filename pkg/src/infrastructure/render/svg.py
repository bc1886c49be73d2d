"""SVG дерева прибытия поверх сетки; одинаковые входы дают побайтно одинаковый документ"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import drawsvg as draw

from src.domain.entities import ArrivalSolution, GridLayout
from src.domain.value_objects import Edge, NodeId


@dataclass(frozen=True)
class SvgTheme:
    cell: float = 40.0
    margin: float = 40.0
    background: str = "#ffffff"
    grid_node: str = "#c8c8c8"
    obstacle: str = "#7a7a7a"
    tree: str = "#1f3a93"
    previous: str = "#2e9e44"
    entry: str = "#d35400"
    runway: str = "#c0392b"
    font_size: int = 12


def _center(layout: GridLayout, node: NodeId, theme: SvgTheme) -> tuple[float, float]:
    row, col = divmod(node, layout.cols)
    return theme.margin + col * theme.cell, theme.margin + row * theme.cell


def emit_svg(
    solution: ArrivalSolution | None,
    layout: GridLayout,
    previous_tree: Iterable[Edge] | None = None,
    theme: SvgTheme | None = None,
) -> str:
    theme = theme or SvgTheme()
    width = 2 * theme.margin + (layout.cols - 1) * theme.cell
    height = 2 * theme.margin + (layout.rows - 1) * theme.cell
    d = draw.Drawing(width, height)
    d.append(draw.Rectangle(0, 0, width, height, fill=theme.background))

    for node in range(layout.rows * layout.cols):
        x, y = _center(layout, node, theme)
        if node in layout.obstacles:
            d.append(draw.Rectangle(x - 5, y - 5, 10, 10, fill=theme.obstacle))
        else:
            d.append(draw.Circle(x, y, 2.5, fill=theme.grid_node))

    for edge in sorted(previous_tree or ()):
        (x1, y1), (x2, y2) = _center(layout, edge.source, theme), _center(layout, edge.target, theme)
        d.append(draw.Line(
            x1, y1, x2, y2, stroke=theme.previous, stroke_width=2, stroke_dasharray="6,4", fill="none"
        ))

    if solution is not None and solution.feasible:
        drawn: set[Edge] = set()
        for entry in sorted(solution.chosen_paths):
            path = solution.chosen_paths[entry]
            points = [c for node in path.nodes for c in _center(layout, node, theme)]
            d.append(draw.Lines(*points, close=False, stroke=theme.tree, stroke_width=3, fill="none"))
            drawn.update(path.edges)
        # рёбра дерева, не покрытые выбранными путями
        for edge in sorted(solution.tree_edges - drawn):
            (x1, y1), (x2, y2) = _center(layout, edge.source, theme), _center(layout, edge.target, theme)
            d.append(draw.Line(x1, y1, x2, y2, stroke=theme.tree, stroke_width=1, fill="none"))

    for name, node in sorted(layout.entries.items()):
        x, y = _center(layout, node, theme)
        d.append(draw.Circle(x, y, 6, fill=theme.entry))
        d.append(draw.Text(name, theme.font_size, x, y - 10, text_anchor="middle", fill=theme.entry))
    x, y = _center(layout, layout.runway, theme)
    d.append(draw.Rectangle(x - 7, y - 7, 14, 14, fill=theme.runway))
    d.append(draw.Text(
        layout.runway_name, theme.font_size, x, y + 22, text_anchor="middle", fill=theme.runway
    ))
    return d.as_svg()
