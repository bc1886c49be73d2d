from __future__ import annotations

from collections import defaultdict

from src.application.documents import GridDoc, ParametersDoc, ScenarioDoc
from src.application.dto import PathRecord, SolutionFile, SolutionRow
from src.core.errors import OffGridError, ParseError, ScenarioReferenceError
from src.domain.entities import (
    Aircraft,
    ArrivalSolution,
    Assignment,
    CarryoverState,
    ConsistencyOptions,
    EdgeOccupancy,
    GridLayout,
    ModelOptions,
    NodeOccupancy,
    Scenario,
    SeparationMatrix,
    Timetable,
    TimetableRow,
)
from src.domain.pathgen import Path
from src.domain.trajectories import (
    ProfileClassSpec,
    ProfileStore,
    ProfileSynthesisSpec,
    SpeedProfile,
    synthesize_profiles,
)
from src.domain.value_objects import Edge, NodeId, SolveStatus, format_clock, parse_clock
from src.infrastructure.persistence.models import ProfileFileDoc, TimetableDoc


def _cell(grid: GridDoc, cell: tuple[int, int], what: str) -> NodeId:
    row, col = cell
    if not (0 <= row < grid.rows and 0 <= col < grid.cols):
        raise OffGridError(f"{what} {cell} is outside a {grid.rows}x{grid.cols} grid", field=what)
    return row * grid.cols + col


def layout_from_doc(grid: GridDoc) -> GridLayout:
    """Документ сетки -> GridLayout; клетки (строка, столбец) в номера узлов"""
    return GridLayout(
        rows=grid.rows,
        cols=grid.cols,
        pixel_side=grid.pixel_side_nm,
        entries={name: _cell(grid, cell, f"entries.{name}") for name, cell in grid.entries.items()},
        runway=_cell(grid, grid.runway, "runway"),
        runway_name=grid.runway_name,
        obstacles=frozenset(_cell(grid, c, "obstacles") for c in grid.obstacles),
        orientation=grid.orientation,
    )


def separation_from_rows(categories: list[str], sigma: list[list[int]]) -> SeparationMatrix:
    if len(sigma) != len(categories) or any(len(r) != len(categories) for r in sigma):
        raise ParseError(
            f"separation matrix must be {len(categories)}x{len(categories)}", field="separation.sigma"
        )
    try:
        return SeparationMatrix.from_rows(sigma)
    except ValueError as exc:
        raise ParseError(str(exc), field="separation.sigma") from exc


def _category_index(categories: list[str] | tuple[str, ...], name: str | None, where: str) -> int:
    if name is None:
        return 1
    if name not in categories:
        raise ScenarioReferenceError(f"unknown wake category {name!r}", field=where)
    return list(categories).index(name) + 1


def scenario_from_doc(doc: ScenarioDoc, profiles: ProfileStore | None = None) -> Scenario:
    header = doc.scenario
    layout = layout_from_doc(doc.grid)
    origin = parse_clock(header.origin)
    horizon = parse_clock(header.horizon_end) - origin
    if horizon <= 0:
        raise ParseError("horizon_end must lie after origin", field="scenario.horizon_end")
    categories = doc.separation.categories

    aircraft: list[Aircraft] = []
    seen: set[str] = set()
    for n, item in enumerate(doc.aircraft):
        where = f"aircraft[{n}]"
        if item.id in seen:
            raise ParseError(f"duplicate aircraft id {item.id!r}", field=f"{where}.id")
        seen.add(item.id)
        if item.entry not in layout.entries:
            raise ScenarioReferenceError(f"unknown entry point {item.entry!r}", field=f"{where}.entry")
        planned = parse_clock(item.planned) - origin
        if not 0 <= planned <= horizon:
            raise ParseError(f"planned time {item.planned} is outside the horizon", field=f"{where}.planned")
        aircraft.append(Aircraft(
            id=item.id,
            entry=layout.entries[item.entry],
            planned_time=planned,
            category=_category_index(categories, item.category, f"{where}.category"),
        ))

    return Scenario(
        name=header.name,
        layout=layout,
        aircraft=aircraft,
        separation=separation_from_rows(categories, doc.separation.sigma),
        horizon=horizon,
        origin=origin,
        period_start=None if header.period_start is None else parse_clock(header.period_start) - origin,
        category_names=tuple(categories),
        profiles=profiles,
        provenance=header.provenance,
    )


def options_from_doc(
    params: ParametersDoc,
    previous_tree: frozenset[Edge] | None = None,
    carryover: CarryoverState | None = None,
    **overrides,
) -> ModelOptions:
    values = params.model_dump()
    values.update({k: v for k, v in overrides.items() if v is not None})
    consistency = None
    if previous_tree is not None and values.get("consistency_u") is not None:
        consistency = ConsistencyOptions(previous_tree=previous_tree, budget=values["consistency_u"])
    return ModelOptions(
        beta=values["beta"],
        mu=values["mu"],
        lambda_nodes=values["lambda_nodes"],
        gamma_deg=values["gamma_deg"],
        single_category=values["single_category"],
        fixed_entry=values["fixed_entry"],
        single_final_approach=values["single_final_approach"],
        consistency=consistency,
        carryover=carryover,
    )


def profiles_from_doc(doc: ProfileFileDoc) -> ProfileStore:
    store = ProfileStore()
    if doc.synthesis is not None:
        s = doc.synthesis
        store = synthesize_profiles(ProfileSynthesisSpec(
            pixel_side_nm=s.pixel_side_nm,
            min_length=s.min_length,
            max_length=s.max_length,
            constant_minutes=s.constant_minutes,
            classes={
                key: ProfileClassSpec(c.final_speed_kt, c.slope_kt_per_hop, c.cap_speed_kt)
                for key, c in s.classes.items()
            },
        ))
    # явно заданные профили перекрывают синтезированные
    for n, item in enumerate(doc.profile):
        try:
            store.add(SpeedProfile(item.key, tuple(item.segments)))
        except ValueError as exc:
            raise ParseError(str(exc), field=f"profile[{n}].segments") from exc
    return store


def timetable_from_doc(doc: TimetableDoc) -> Timetable:
    header = doc.timetable
    rows = tuple(
        TimetableRow(
            entry=row.entry,
            aircraft=row.aircraft,
            category=_category_index(doc.categories, row.category, f"row[{n}].category"),
            planned=parse_clock(row.planned),
            scheduled=parse_clock(row.scheduled),
            merges={label: parse_clock(t) for label, t in row.merges.items()},
            runway=parse_clock(row.runway),
        )
        for n, row in enumerate(doc.row)
    )
    return Timetable(
        name=header.name,
        mu=header.mu,
        rows=rows,
        runway_name=header.runway_name,
        period_start=None if header.period_start is None else parse_clock(header.period_start),
        provenance=header.provenance,
        separation=separation_from_rows(doc.categories, doc.sigma),
    )


# --- решения ---

def merge_labels(tree: frozenset[Edge], runway: NodeId, special: frozenset[NodeId]) -> dict[str, NodeId]:
    """Узлы слияния: n<номер> всегда, M1..M3 по удалённости от ВПП, если слияний не больше трёх"""
    indeg: dict[NodeId, int] = defaultdict(int)
    succ: dict[NodeId, NodeId] = {}
    for e in tree:
        indeg[e.target] += 1
        succ[e.source] = e.target
    merges = [n for n, d in indeg.items() if d >= 2 and n not in special]

    def hops(node: NodeId) -> int:
        count, seen = 0, {node}
        while node != runway and node in succ:
            node = succ[node]
            if node in seen:
                break
            seen.add(node)
            count += 1
        return count

    labels = {f"n{node}": node for node in sorted(merges)}
    if len(merges) <= 3:
        ordered = sorted(merges, key=lambda n: (-hops(n), n))
        labels.update({f"M{k}": node for k, node in enumerate(ordered, start=1)})
    return labels


def solution_to_file(solution: ArrivalSolution, scenario: Scenario) -> SolutionFile:
    layout = scenario.layout
    origin = scenario.origin

    def clock(t: int) -> str:
        return format_clock(origin + t)

    doc = SolutionFile(
        scenario=scenario.name,
        origin=format_clock(origin),
        status=solution.status.value,
        objective=solution.objective,
        gap=solution.gap,
        runtime_s=solution.runtime_s,
        avg_deviation=solution.avg_deviation,
    )
    if not solution.feasible:
        return doc

    special = frozenset(layout.entries.values()) | {layout.runway}
    labels = merge_labels(solution.tree_edges, layout.runway, special)
    # при трёх и меньше слияниях в строках - метки M1..M3, иначе номера узлов
    short = {node: label for label, node in labels.items() if label.startswith("M")}
    by_node = short or {node: label for label, node in labels.items()}

    doc.tree_edges = sorted((e.source, e.target) for e in solution.tree_edges)
    doc.merge_labels = labels
    doc.paths = [
        PathRecord(entry=layout.entry_name(entry), nodes=list(path.nodes), length=path.length)
        for entry, path in sorted(solution.chosen_paths.items())
    ]
    for a in scenario.aircraft:
        rows = solution.schedule[a.id]
        doc.rows.append(SolutionRow(
            entry=layout.entry_name(a.entry),
            aircraft=a.id,
            category=scenario.category_name(a.category),
            planned=clock(a.planned_time),
            scheduled=clock(rows[0][1]),
            merges={by_node[n]: clock(t) for n, t in rows if n in by_node},
            runway=clock(rows[-1][1]),
            path_id=solution.assignments[a.id].path_id,
            nodes=[n for n, _ in rows],
            times=[clock(t) for _, t in rows],
        ))
    return doc


def solution_from_file(doc: SolutionFile, scenario: Scenario) -> ArrivalSolution:
    layout = scenario.layout
    status = SolveStatus(doc.status)
    solution = ArrivalSolution(
        status=status,
        objective=doc.objective,
        gap=doc.gap,
        runtime_s=doc.runtime_s,
        avg_deviation=doc.avg_deviation,
    )
    if not status.has_solution:
        return solution

    origin = parse_clock(doc.origin)
    solution.tree_edges = frozenset(Edge(i, j) for i, j in doc.tree_edges)
    for record in doc.paths:
        if record.entry not in layout.entries:
            raise ScenarioReferenceError(f"unknown entry point {record.entry!r}", field="paths.entry")
        solution.chosen_paths[layout.entries[record.entry]] = Path(tuple(record.nodes), record.length)
    for row in doc.rows:
        times = [parse_clock(t) - origin for t in row.times]
        solution.schedule[row.aircraft] = tuple(zip(row.nodes, times))
        solution.assignments[row.aircraft] = Assignment(path_id=row.path_id, entry_time=times[0])
    return solution


def tree_from_file(doc: SolutionFile) -> frozenset[Edge]:
    return frozenset(Edge(i, j) for i, j in doc.tree_edges)


def carryover_from_file(doc: SolutionFile, scenario: Scenario) -> CarryoverState:
    """Занятость ВС прошлого периода, чья посадка не раньше начала нового периода.

    Берутся только моменты от начала нового периода: узлы с t >= start, рёбра с t2 >= start.
    """
    if not doc.feasible:
        return CarryoverState()
    start = scenario.period_start if scenario.period_start is not None else 0
    boundary = scenario.origin + start
    nodes: list[NodeOccupancy] = []
    edges: list[EdgeOccupancy] = []
    for row in doc.rows:
        if parse_clock(row.runway) < boundary:
            continue
        category = _category_index(scenario.category_names, row.category, f"{row.aircraft}.category")
        times = [parse_clock(t) - scenario.origin for t in row.times]
        nodes += [NodeOccupancy(category, n, t) for n, t in zip(row.nodes, times) if t >= start]
        edges += [
            EdgeOccupancy(Edge(a, b), t1, t2)
            for (a, t1), (b, t2) in zip(zip(row.nodes, times), zip(row.nodes[1:], times[1:]))
            if t2 >= start
        ]
    return CarryoverState(node_occupancies=tuple(nodes), edge_occupancies=tuple(edges))


def carried_aircraft(doc: SolutionFile, scenario: Scenario) -> list[str]:
    start = scenario.period_start if scenario.period_start is not None else 0
    boundary = scenario.origin + start
    return [row.aircraft for row in doc.rows if parse_clock(row.runway) >= boundary]
