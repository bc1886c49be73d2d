"""Независимая проверка решения без обращения к MIP"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Hashable, Iterable, Mapping, Sequence

from src.core.errors import MissingProfileError
from src.domain.entities import (
    ArrivalSolution,
    CarryoverState,
    ModelOptions,
    Scenario,
    SeparationMatrix,
    Timetable,
)
from src.domain.grid import GridGraph, TurnTable, crossing_quads, edge_angle
from src.domain.trajectories import entry_window
from src.domain.value_objects import Edge, NodeId

if TYPE_CHECKING:
    from src.domain.trajectories import ProfileStore

FAMILIES = (
    "tree_degrees",
    "crossings",
    "turn_angles",
    "path_membership",
    "entry_windows",
    "separation",
    "carryover",
    "horizon",
    "profile_length",
    "consistency",
)


@dataclass(frozen=True)
class Violation:
    family: str
    message: str
    entities: tuple[str, ...] = ()
    times: tuple[int, ...] = ()


@dataclass
class ValidationReport:
    checked: list[str] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def passed(self, family: str) -> bool:
        return family in self.checked and not self.of(family)

    def of(self, family: str) -> list[Violation]:
        return [v for v in self.violations if v.family == family]

    def extend(self, family: str, found: Iterable[Violation]) -> None:
        if family not in self.checked:
            self.checked.append(family)
        self.violations.extend(found)

    def summary(self) -> dict[str, int]:
        return {family: len(self.of(family)) for family in self.checked}


Occupancy = tuple[Hashable, int]


def separation_violations(
    schedules: Mapping[str, Sequence[Occupancy]],
    categories: Mapping[str, int],
    sep: SeparationMatrix,
    fixed: Iterable[tuple[int, Hashable, int]] = (),
    fixed_family: str = "carryover",
) -> list[Violation]:
    """Попарно в каждом узле: разрыв >= σ(категория лидера, категория ведомого)"""
    at_node: dict[Hashable, list[tuple[int, str, int, bool]]] = defaultdict(list)
    for aid, rows in schedules.items():
        for node, t in rows:
            at_node[node].append((t, aid, categories[aid], False))
    for n, (category, node, t) in enumerate(fixed):
        at_node[node].append((t, f"carryover#{n}", category, True))

    found: list[Violation] = []
    for node in sorted(at_node, key=str):
        occupants = sorted(at_node[node], key=lambda o: (o[0], o[1]))
        for i, (t1, a1, k1, fixed1) in enumerate(occupants):
            for t2, a2, k2, fixed2 in occupants[i + 1:]:
                if fixed1 and fixed2:
                    continue
                required = sep(k1, k2)
                if t2 - t1 >= required:
                    continue
                family = fixed_family if (fixed1 or fixed2) else "separation"
                found.append(Violation(
                    family,
                    f"node {node}: {a2} trails {a1} by {t2 - t1} min, needs {required}",
                    (a1, a2, str(node)),
                    (t1, t2),
                ))
    return found


def edge_usage(
    schedules: Mapping[str, Sequence[tuple[NodeId, int]]]
) -> dict[str, list[tuple[Edge, int]]]:
    """ВС -> [(ребро, время в начале ребра)]"""
    return {
        aid: [(Edge(a, b), t) for (a, t), (b, _) in zip(rows, rows[1:])]
        for aid, rows in schedules.items()
    }


def carryover_edge_violations(
    usage: Mapping[str, Sequence[tuple[Edge, int]]],
    state: CarryoverState,
    crossing_pair: Callable[[Edge], tuple[Edge, Edge] | None],
) -> list[Violation]:
    found: list[Violation] = []
    for occ in state.edge_occupancies:
        blocked = [occ.edge.reversed(), *(crossing_pair(occ.edge) or ())]
        for aid, edges in usage.items():
            for edge, t in edges:
                if edge in blocked and occ.t_start <= t <= occ.t_end:
                    found.append(Violation(
                        "carryover",
                        f"{aid} uses {edge} at {t} against carryover on {occ.edge}",
                        (aid, str(edge)),
                        (t, occ.t_start, occ.t_end),
                    ))
    return found


def tree_violations(g: GridGraph, tree: frozenset[Edge], single_final_approach: bool) -> list[Violation]:
    found: list[Violation] = []
    indeg: dict[NodeId, int] = defaultdict(int)
    outdeg: dict[NodeId, int] = defaultdict(int)
    for e in tree:
        outdeg[e.source] += 1
        indeg[e.target] += 1
    for node in sorted(set(indeg) | set(outdeg)):
        if node in g.special:
            continue
        if indeg[node] > 2:
            found.append(Violation("tree_degrees", f"node {node} merges {indeg[node]} routes", (str(node),)))
        if outdeg[node] > 1:
            found.append(Violation("tree_degrees", f"node {node} splits into {outdeg[node]}", (str(node),)))
    if single_final_approach and indeg[g.runway] > 1:
        found.append(Violation("tree_degrees", f"runway entered by {indeg[g.runway]} edges"))
    return found


def crossing_violations(g: GridGraph, tree: frozenset[Edge]) -> list[Violation]:
    found = []
    for quad in crossing_quads(g):
        used = [e for e in quad.edges if e in tree]
        if len(used) > 1:
            found.append(Violation(
                "crossings", f"square at {quad.anchor} uses {len(used)} diagonals",
                tuple(str(e) for e in used),
            ))
    return found


def turn_violations(g: GridGraph, turns: TurnTable, tree: frozenset[Edge]) -> list[Violation]:
    found = []
    outgoing: dict[NodeId, list[Edge]] = defaultdict(list)
    for e in tree:
        outgoing[e.source].append(e)
    for e1 in sorted(tree):
        for e2 in outgoing.get(e1.target, ()):
            if e2.target == e1.source:
                continue
            angle = edge_angle(g, e1, e2)
            if angle < turns.gamma_deg:
                found.append(Violation(
                    "turn_angles", f"{e1} then {e2} turns at {angle:g} deg", (str(e1), str(e2))
                ))
    return found


def avg_deviation(solution: ArrivalSolution, scenario: Scenario) -> float:
    """Среднее |фактический вход - плановый|"""
    if not scenario.aircraft:
        return 0.0
    total = 0
    for a in scenario.aircraft:
        entry_time = solution.schedule[a.id][0][1]
        total += abs(entry_time - a.planned_time)
    return total / len(scenario.aircraft)


def validate(
    solution: ArrivalSolution,
    g: GridGraph,
    turns: TurnTable,
    scenario: Scenario,
    opts: ModelOptions,
    profiles: ProfileStore | None = None,
) -> ValidationReport:
    report = ValidationReport()
    if not solution.feasible:
        return report
    tree = solution.tree_edges

    report.extend("tree_degrees", tree_violations(g, tree, opts.single_final_approach))
    report.extend("crossings", crossing_violations(g, tree))
    report.extend("turn_angles", turn_violations(g, turns, tree))
    report.extend("path_membership", _membership_violations(solution, g, turns, scenario, opts))

    window_found, horizon_found, profile_found = [], [], []
    for a in scenario.aircraft:
        rows = solution.schedule.get(a.id)
        if not rows:
            continue
        entry_time, landing = rows[0][1], rows[-1][1]
        window = entry_window(a, opts.effective_mu)
        if entry_time not in window:
            window_found.append(Violation(
                "entry_windows", f"{a.id} enters at {entry_time}, planned {a.planned_time}",
                (a.id,), (entry_time,),
            ))
        if landing > scenario.horizon:
            horizon_found.append(Violation(
                "horizon", f"{a.id} lands at {landing} > {scenario.horizon}", (a.id,), (landing,)
            ))
        if profiles is not None and len(rows) > 1:
            profile_found.extend(_profile_violations(a, rows, profiles, scenario))
    report.extend("entry_windows", window_found)
    report.extend("horizon", horizon_found)
    if profiles is not None:
        report.extend("profile_length", profile_found)

    sep = opts.separations(scenario.separation)
    categories = {a.id: opts.category_of(a) for a in scenario.aircraft}
    schedules = {aid: rows for aid, rows in solution.schedule.items() if aid in categories}
    state = opts.carryover or CarryoverState()
    fixed = [
        (sep.categories[0] if opts.single_category else occ.category, occ.node, occ.time)
        for occ in state.node_occupancies
    ]
    found = separation_violations(schedules, categories, sep, fixed)
    report.extend("separation", [v for v in found if v.family == "separation"])
    if opts.carryover is not None:
        carried = [v for v in found if v.family == "carryover"]
        carried += carryover_edge_violations(edge_usage(schedules), state, g.crossing_pair)
        report.extend("carryover", carried)

    if opts.consistency is not None:
        report.extend("consistency", _consistency_violations(solution, opts))
    return report


def _membership_violations(
    solution: ArrivalSolution,
    g: GridGraph,
    turns: TurnTable,
    scenario: Scenario,
    opts: ModelOptions,
) -> list[Violation]:
    found: list[Violation] = []
    for entry in g.entries:
        path = solution.chosen_paths.get(entry)
        if path is None:
            found.append(Violation("path_membership", f"entry {entry} has no chosen path"))
            continue
        nodes = path.nodes
        if nodes[0] != entry or nodes[-1] != g.runway:
            found.append(Violation("path_membership", f"path of {entry} does not run entry->runway"))
        if len(set(nodes)) != len(nodes):
            found.append(Violation("path_membership", f"path of {entry} repeats a node"))
        if len(nodes) > opts.lambda_nodes:
            found.append(Violation("path_membership", f"path of {entry} has {len(nodes)} nodes"))
        if any(n in g.removed for n in nodes):
            found.append(Violation("path_membership", f"path of {entry} visits an obstacle"))
        missing = [e for e in path.edges if e not in solution.tree_edges or not g.has_edge(e)]
        if missing:
            found.append(Violation("path_membership", f"path of {entry} leaves the tree at {missing[0]}"))
        for e1, e2 in zip(path.edges, path.edges[1:]):
            if e2.target in turns.forbidden_after(e1):
                found.append(Violation("path_membership", f"path of {entry} turns sharply at {e1.target}"))

    for a in scenario.aircraft:
        rows = solution.schedule.get(a.id)
        path = solution.chosen_paths.get(a.entry)
        if rows is None:
            found.append(Violation("path_membership", f"aircraft {a.id} is not scheduled", (a.id,)))
            continue
        if path is None or tuple(n for n, _ in rows) != path.nodes:
            found.append(Violation(
                "path_membership", f"aircraft {a.id} does not ride its entry's path", (a.id,)
            ))
    return found


def _profile_violations(a, rows, profiles: ProfileStore, scenario: Scenario) -> list[Violation]:
    try:
        profile = profiles.lookup(a, len(rows) - 1, scenario.category_name(a.category))
    except MissingProfileError as exc:
        return [Violation("profile_length", str(exc), (a.id,))]
    expected = [rows[0][1]]
    for u in profile.segment_times:
        expected.append(expected[-1] + u)
    actual = [t for _, t in rows]
    if actual != expected:
        return [Violation(
            "profile_length", f"{a.id} times {actual} differ from profile {expected}", (a.id,)
        )]
    return []


def _consistency_violations(solution: ArrivalSolution, opts: ModelOptions) -> list[Violation]:
    assert opts.consistency is not None
    previous = opts.consistency.previous_tree
    changed = len(previous ^ solution.tree_edges)
    found = []
    if changed > opts.consistency.budget:
        found.append(Violation(
            "consistency", f"tree differs in {changed} edges, budget {opts.consistency.budget}"
        ))
    used = {e for path in solution.chosen_paths.values() for e in path.edges}
    for edge in sorted(previous & solution.tree_edges):
        if edge not in used:
            found.append(Violation("consistency", f"kept edge {edge} carries no route", (str(edge),)))
    return found


def carried_rows(previous: Timetable, boundary: int) -> list:
    """Строки прошлого расписания, чьи ВС ещё в TMA к началу следующего периода"""
    return [row for row in previous.rows if row.runway >= boundary]


def validate_timetable(
    timetable: Timetable,
    sep: SeparationMatrix | None = None,
    previous: Timetable | None = None,
) -> ValidationReport:
    """Проверка опубликованного расписания без сетки: окна входа, разделение, переходящие ВС"""
    sep = sep or timetable.separation
    if sep is None:
        raise ValueError(f"timetable {timetable.name} has no separation matrix")
    report = ValidationReport()
    report.extend("entry_windows", [
        Violation(
            "entry_windows",
            f"{row.aircraft} enters at {row.scheduled}, planned {row.planned}",
            (row.aircraft,), (row.scheduled,),
        )
        for row in timetable.rows
        if abs(row.scheduled - row.planned) > timetable.mu
    ])

    schedules = {row.aircraft: timetable.occupancies(row) for row in timetable.rows}
    categories = {row.aircraft: row.category for row in timetable.rows}
    fixed: list[tuple[int, Hashable, int]] = []
    if previous is not None:
        boundary = timetable.period_start
        if boundary is None:
            boundary = min(row.scheduled for row in timetable.rows)
        for row in carried_rows(previous, boundary):
            fixed += [(row.category, node, t) for node, t in previous.occupancies(row) if t >= boundary]

    found = separation_violations(schedules, categories, sep, fixed)
    report.extend("separation", [v for v in found if v.family == "separation"])
    if previous is not None:
        report.extend("carryover", [v for v in found if v.family == "carryover"])
    return report


def timetable_deviation(timetable: Timetable) -> float:
    if not timetable.rows:
        return 0.0
    return sum(abs(row.scheduled - row.planned) for row in timetable.rows) / len(timetable.rows)
