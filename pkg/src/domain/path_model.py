from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from src.core.errors import DecodeError, EmptyCatalogError, IndexMismatchError, UnknownEdgeError
from src.core.logging import get_logger
from src.domain.entities import (
    Aircraft,
    ArrivalSolution,
    Assignment,
    CarryoverState,
    ModelOptions,
    Scenario,
    SeparationMatrix,
)
from src.domain.grid import GridGraph, crossing_quads
from src.domain.mip import MipModel, Number
from src.domain.pathgen import PathCatalog
from src.domain.trajectories import OccupancyIndex, entry_window
from src.domain.validator import avg_deviation
from src.domain.value_objects import Edge, NodeId, SolveStatus

log = get_logger(__name__)

TrajectoryKey = tuple[str, int, int]


@dataclass
class PathModel:
    """MIP на путях плюс связь имён переменных с объектами предметной области"""
    mip: MipModel
    g: GridGraph
    catalog: PathCatalog
    index: OccupancyIndex
    scenario: Scenario
    opts: ModelOptions
    rho: dict[int, str] = field(default_factory=dict)
    x: dict[Edge, str] = field(default_factory=dict)
    tau: dict[TrajectoryKey, str] = field(default_factory=dict)
    xdelta: dict[Edge, str] = field(default_factory=dict)
    # (узел, время) -> [(ВС, траектория)]
    occupancy: dict[tuple[NodeId, int], list[tuple[str, TrajectoryKey]]] = field(
        default_factory=lambda: defaultdict(list)
    )
    keys_by_path: dict[int, list[TrajectoryKey]] = field(default_factory=lambda: defaultdict(list))
    aircraft: dict[str, Aircraft] = field(default_factory=dict)

    def traj_var(self, key: TrajectoryKey) -> str:
        # в режиме tempo траектория однозначно задаётся путём
        if self.opts.uses_tempo:
            return self.rho[key[1]]
        return self.tau[key]

    def category(self, aircraft_id: str) -> int:
        return self.opts.category_of(self.aircraft[aircraft_id])

    @property
    def separations(self) -> SeparationMatrix:
        return self.opts.separations(self.scenario.separation)

    def vars_at(
        self, node: NodeId, t_from: int, t_to: int, aircraft: Iterable[str] | None = None
    ) -> list[tuple[str, str]]:
        allowed = set(aircraft) if aircraft is not None else None
        out: list[tuple[str, str]] = []
        for t in range(t_from, t_to + 1):
            for aid, key in self.occupancy.get((node, t), ()):
                if allowed is None or aid in allowed:
                    out.append((aid, self.traj_var(key)))
        return out


def _retained_keys(
    scenario: Scenario, catalog: PathCatalog, index: OccupancyIndex, opts: ModelOptions
) -> dict[str, list[TrajectoryKey]]:
    excluded = set(index.excluded)
    keys: dict[str, list[TrajectoryKey]] = {}
    for a in scenario.aircraft:
        keys[a.id] = []
        for pid in catalog.entry_paths(a.entry):
            for t0 in entry_window(a, opts.effective_mu):
                key = (a.id, pid, t0)
                if key in index.trajectories:
                    keys[a.id].append(key)
                elif key not in excluded:
                    raise IndexMismatchError(
                        f"trajectory {key} is missing from the occupancy index",
                        aircraft=a.id, path=pid, entry_time=t0,
                    )
    return keys


def build_m2(
    g: GridGraph,
    catalog: PathCatalog,
    index: OccupancyIndex,
    scenario: Scenario,
    opts: ModelOptions,
) -> PathModel:
    for entry in g.entries:
        if not catalog.entry_paths(entry):
            raise EmptyCatalogError(f"entry {entry} has no feasible path", entry=entry)

    pm = PathModel(
        mip=MipModel(name=f"m2_{scenario.name}"),
        g=g, catalog=catalog, index=index, scenario=scenario, opts=opts,
        aircraft={a.id: a for a in scenario.aircraft},
    )
    mip = pm.mip

    for pid in range(len(catalog)):
        pm.rho[pid] = mip.add_var(f"rho_{pid}")
    for edge in g.edges:
        pm.x[edge] = mip.add_var(f"x_{edge.source}_{edge.target}")

    retained = _retained_keys(scenario, catalog, index, opts)
    aircraft_no = {a.id: n for n, a in enumerate(scenario.aircraft)}
    for aid, keys in retained.items():
        for key in keys:
            if not opts.uses_tempo:
                pm.tau[key] = mip.add_var(f"tau_{aircraft_no[aid]}_{key[1]}_{key[2]}")
            pm.keys_by_path[key[1]].append(key)
            trajectory = index.trajectories[key]
            for node, t in zip(catalog[key[1]].nodes, trajectory.times):
                pm.occupancy[(node, t)].append((aid, key))

    # M2.0: вес дерева и длины путей с кратностью |A_b|
    objective: list[tuple[str, Number]] = [
        (pm.x[e], opts.beta * g.physical_length(e)) for e in g.edges
    ]
    for entry in g.entries:
        demand = len(scenario.aircraft_at(entry))
        if not demand:
            continue
        for pid in catalog.entry_paths(entry):
            weight = (1 - opts.beta) * demand * catalog[pid].physical_length(g.pixel_side)
            objective.append((pm.rho[pid], weight))
    mip.set_objective(objective)

    _add_tree_rows(pm)
    _add_path_rows(pm, retained)
    if opts.uses_tempo:
        _add_tempo_rows(pm)
    elif opts.uses_window_cap:
        _add_window_cap_rows(pm)
    else:
        _add_separation_rows(pm)

    if opts.consistency is not None:
        add_consistency(pm, opts.consistency.previous_tree, opts.consistency.budget)
    if opts.carryover is not None:
        add_carryover(pm, opts.carryover)

    log.info(f"built path model {mip.name}", extra={**mip.stats(), "tags": dict(mip.tag_census())})
    return pm


def _add_tree_rows(pm: PathModel) -> None:
    g, mip = pm.g, pm.mip
    for node in g.nodes:
        if node in g.special:
            continue
        mip.add_constraint("indegree", {pm.x[e]: 1 for e in g.in_edges(node)}, "<=", 2)
        mip.add_constraint("outdegree", {pm.x[e]: 1 for e in g.out_edges(node)}, "<=", 1)
    if pm.opts.single_final_approach:
        mip.add_constraint("runway_indegree", {pm.x[e]: 1 for e in g.in_edges(g.runway)}, "<=", 1)
    for quad in crossing_quads(g):
        mip.add_constraint("crossing", {pm.x[e]: 1 for e in quad.edges}, "<=", 1)


def _add_path_rows(pm: PathModel, retained: Mapping[str, list[TrajectoryKey]]) -> None:
    g, mip, catalog = pm.g, pm.mip, pm.catalog
    for entry in g.entries:
        mip.add_constraint("one_path", {pm.rho[p]: 1 for p in catalog.entry_paths(entry)}, "==", 1)
    for pid in range(len(catalog)):
        for edge in catalog.edges_of(pid):
            mip.add_constraint("path_edge_link", {pm.rho[pid]: 1, pm.x[edge]: -1}, "<=", 0)

    if pm.opts.uses_tempo:
        # путь, на котором какое-то ВС не успевает до T̄, выбирать нельзя
        planned = {a.id: a.planned_time for a in pm.scenario.aircraft}
        excluded_paths = sorted({pid for aid, pid, t0 in pm.index.excluded if planned.get(aid) == t0})
        for pid in excluded_paths:
            mip.add_constraint("horizon_exclusion", {pm.rho[pid]: 1}, "==", 0)
        return

    for a in pm.scenario.aircraft:
        keys = retained[a.id]
        mip.add_constraint("one_trajectory", {pm.tau[k]: 1 for k in keys}, "==", 1)
        for pid in catalog.entry_paths(a.entry):
            terms = [(pm.tau[k], 1) for k in keys if k[1] == pid]
            mip.add_constraint("trajectory_path_link", [*terms, (pm.rho[pid], -1)], "==", 0)


def _leader_groups(pm: PathModel) -> dict[NodeId, dict[int, list[str]]]:
    """узел -> время -> ВС, находящиеся там (по всем их траекториям)"""
    groups: dict[NodeId, dict[int, set[str]]] = defaultdict(lambda: defaultdict(set))
    for (node, t), entries in pm.occupancy.items():
        for aid, _ in entries:
            groups[node][t].add(aid)
    return {n: {t: sorted(a) for t, a in by_t.items()} for n, by_t in groups.items()}


def _add_separation_rows(pm: PathModel) -> None:
    mip, sep, horizon = pm.mip, pm.separations, pm.scenario.horizon
    omega = sep.omega
    by_category: dict[int, list[str]] = defaultdict(list)
    for a in pm.scenario.aircraft:
        by_category[pm.category(a.id)].append(a.id)

    for node, by_time in sorted(_leader_groups(pm).items()):
        for t, present in sorted(by_time.items()):
            leader_cats = sorted({pm.category(a) for a in present})
            for k1 in leader_cats:
                leaders = pm.vars_at(node, t, t, by_category[k1])
                # M2.12: лидер категории k1, ведомые другой категории
                for k2 in sep.categories:
                    if k2 == k1 or not by_category[k2]:
                        continue
                    end = min(t + sep(k1, k2) - 1, horizon)
                    trailers = pm.vars_at(node, t, end, by_category[k2])
                    if trailers:
                        mip.add_constraint(
                            "separation_cross",
                            [*((v, 1) for _, v in trailers), *((v, omega) for _, v in leaders)],
                            "<=", omega,
                        )
                # M2.13: та же категория, отдельно по каждому лидеру
                end = min(t + sep(k1, k1) - 1, horizon)
                for leader in (a for a in present if pm.category(a) == k1):
                    others = [a for a in by_category[k1] if a != leader]
                    trailers = pm.vars_at(node, t, end, others)
                    if not trailers:
                        continue
                    own = pm.vars_at(node, t, t, [leader])
                    mip.add_constraint(
                        "separation_same",
                        [*((v, 1) for _, v in trailers), *((v, omega) for _, v in own)],
                        "<=", omega,
                    )


def _window_rows(pm: PathModel, tag: str) -> None:
    sep, horizon = pm.separations, pm.scenario.horizon
    sigma = sep(sep.categories[0], sep.categories[0])
    for node, by_time in sorted(_leader_groups(pm).items()):
        for t in sorted(by_time):
            window = pm.vars_at(node, t, min(t + sigma - 1, horizon))
            if len({aid for aid, _ in window}) < 2:
                continue
            pm.mip.add_constraint(tag, [(v, 1) for _, v in window], "<=", 1)


def _add_window_cap_rows(pm: PathModel) -> None:
    _window_rows(pm, "separation_window")


def _add_tempo_rows(pm: PathModel) -> None:
    _window_rows(pm, "tempo")


def add_consistency(pm: PathModel, previous_tree: Iterable[Edge], budget: int) -> None:
    """x^Δ, бюджет изменений U и использование рёбер прежнего дерева"""
    mip, g = pm.mip, pm.g
    previous = frozenset(Edge(*e) for e in previous_tree)
    unknown = [e for e in previous if not g.has_edge(e)]
    if unknown:
        raise UnknownEdgeError(f"previous tree edge {unknown[0]} is not in the grid", edge=str(unknown[0]))

    for edge in g.edges:
        pm.xdelta[edge] = mip.add_var(f"xd_{edge.source}_{edge.target}")
        if edge in previous:
            mip.add_constraint("consistency_diff", {pm.xdelta[edge]: 1, pm.x[edge]: 1}, "==", 1)
        else:
            mip.add_constraint("consistency_diff", {pm.xdelta[edge]: 1, pm.x[edge]: -1}, "==", 0)
    mip.add_constraint("consistency_budget", {v: 1 for v in pm.xdelta.values()}, "<=", budget)
    for edge in sorted(previous):
        terms = [(pm.x[edge], 1), *((pm.rho[p], -1) for p in sorted(pm.catalog.through_edge(edge)))]
        mip.add_constraint("consistency_used", terms, "<=", 0)


def _edge_users(pm: PathModel, edge: Edge, t_from: int, t_to: int) -> list[str]:
    """Траектории, проходящие ребро edge и находящиеся в его начале в [t_from, t_to]"""
    out: list[str] = []
    for pid in sorted(pm.catalog.through_edge(edge)):
        position = pm.catalog[pid].nodes.index(edge.source)
        for key in pm.keys_by_path.get(pid, ()):
            if t_from <= pm.index.trajectories[key].times[position] <= t_to:
                out.append(pm.traj_var(key))
    return out


def add_carryover(pm: PathModel, state: CarryoverState) -> None:
    if state.is_empty:
        return
    mip, sep = pm.mip, pm.separations
    by_category: dict[int, list[str]] = defaultdict(list)
    for a in pm.scenario.aircraft:
        by_category[pm.category(a.id)].append(a.id)

    for occ in state.node_occupancies:
        k1 = sep.categories[0] if pm.opts.single_category else occ.category
        for k2 in sep.categories:
            if not by_category[k2]:
                continue
            forward = pm.vars_at(occ.node, occ.time, occ.time + sep(k1, k2) - 1, by_category[k2])
            if forward:
                mip.add_constraint("carryover_node_forward", [(v, 1) for _, v in forward], "==", 0)
            backward = pm.vars_at(occ.node, occ.time - sep(k2, k1) + 1, occ.time, by_category[k2])
            if backward:
                mip.add_constraint("carryover_node_backward", [(v, 1) for _, v in backward], "==", 0)

    for occ in state.edge_occupancies:
        users = _edge_users(pm, occ.edge.reversed(), occ.t_start, occ.t_end)
        if users:
            mip.add_constraint("carryover_reverse_edge", [(v, 1) for v in users], "==", 0)
        crossing = pm.g.crossing_pair(occ.edge)
        if crossing is None:
            continue
        for other in crossing:
            users = _edge_users(pm, other, occ.t_start, occ.t_end)
            if users:
                mip.add_constraint("carryover_crossing_edge", [(v, 1) for v in users], "==", 0)


def extract_solution(
    pm: PathModel,
    values: Mapping[str, float],
    status: SolveStatus,
    objective: float | None,
    gap: float | None = None,
) -> ArrivalSolution:
    """Декодирует ρ/τ/x в дерево, пути и расписание"""
    if not status.has_solution:
        return ArrivalSolution(status=status, gap=gap)

    def on(var: str) -> bool:
        return round(values.get(var, 0.0)) == 1

    chosen: dict[NodeId, int] = {}
    for entry in pm.g.entries:
        picked = [p for p in pm.catalog.entry_paths(entry) if on(pm.rho[p])]
        if len(picked) != 1:
            raise DecodeError(f"entry {entry} has {len(picked)} selected paths", entry=entry)
        chosen[entry] = picked[0]

    assignments: dict[str, Assignment] = {}
    schedule: dict[str, tuple[tuple[NodeId, int], ...]] = {}
    for a in pm.scenario.aircraft:
        if pm.opts.uses_tempo:
            keys = [(a.id, chosen[a.entry], a.planned_time)]
        else:
            keys = [k for k, var in pm.tau.items() if k[0] == a.id and on(var)]
        if len(keys) != 1 or keys[0][1] != chosen[a.entry]:
            raise DecodeError(f"aircraft {a.id} has an inconsistent trajectory choice", aircraft=a.id)
        key = keys[0]
        assignments[a.id] = Assignment(path_id=key[1], entry_time=key[2])
        times = pm.index.trajectories[key].times
        schedule[a.id] = tuple(zip(pm.catalog[key[1]].nodes, times))

    solution = ArrivalSolution(
        status=status,
        objective=objective,
        tree_edges=frozenset(e for e, var in pm.x.items() if on(var)),
        chosen_paths={entry: pm.catalog[pid] for entry, pid in chosen.items()},
        assignments=assignments,
        schedule=schedule,
        gap=gap,
    )
    solution.avg_deviation = avg_deviation(solution, pm.scenario)
    return solution
