"""Компактная рёберно-потоковая модель M1: эталон для проверки M2 на крошечных экземплярах"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import networkx as nx

from src.core.errors import DecodeError, MissingProfileError, ScaleGuardError, UnknownEdgeError
from src.core.logging import get_logger
from src.domain.entities import (
    ArrivalSolution,
    Assignment,
    CarryoverState,
    ModelOptions,
    Scenario,
    SeparationMatrix,
)
from src.domain.grid import GridGraph, TurnTable, crossing_quads, reverse_bfs_distances
from src.domain.mip import MipModel, Number, VarType
from src.domain.pathgen import Path, PathCatalog
from src.domain.trajectories import ProfileStore, entry_window
from src.domain.validator import avg_deviation
from src.domain.value_objects import Edge, NodeId, SolveStatus

log = get_logger(__name__)

HALF = Fraction(1, 2)

# (ВС, узел, длина профиля, позиция, время)
YKey = tuple[str, NodeId, int, int, int]
# (ВС, откуда, куда, длина профиля, позиция, время в начале ребра)
ZKey = tuple[str, NodeId, NodeId, int, int, int]


@dataclass(frozen=True)
class CompactGuard:
    max_nodes: int = 40
    max_aircraft: int = 5
    max_horizon: int = 40


@dataclass
class CompactModel:
    mip: MipModel
    g: GridGraph
    scenario: Scenario
    opts: ModelOptions
    x: dict[Edge, str] = field(default_factory=dict)
    f: dict[Edge, str] = field(default_factory=dict)
    xep: dict[tuple[NodeId, Edge], str] = field(default_factory=dict)
    ell: dict[NodeId, str] = field(default_factory=dict)
    y: dict[YKey, str] = field(default_factory=dict)
    z: dict[ZKey, str] = field(default_factory=dict)
    psi: dict[tuple[str, int], str] = field(default_factory=dict)
    phi: dict[tuple[str, int], str] = field(default_factory=dict)
    xdelta: dict[Edge, str] = field(default_factory=dict)
    # (узел, время) -> [(ВС, y)]
    occupancy: dict[tuple[NodeId, int], list[tuple[str, str]]] = field(
        default_factory=lambda: defaultdict(list)
    )
    offsets: dict[tuple[str, int], tuple[int, ...]] = field(default_factory=dict)

    @property
    def separations(self) -> SeparationMatrix:
        return self.opts.separations(self.scenario.separation)

    def vars_at(
        self, node: NodeId, t_from: int, t_to: int, aircraft: list[str] | None = None
    ) -> list[tuple[str, str]]:
        allowed = set(aircraft) if aircraft is not None else None
        out: list[tuple[str, str]] = []
        for t in range(t_from, t_to + 1):
            for aid, var in self.occupancy.get((node, t), ()):
                if allowed is None or aid in allowed:
                    out.append((aid, var))
        return out


def _check_guard(g: GridGraph, scenario: Scenario, guard: CompactGuard) -> None:
    if len(g.nodes) > guard.max_nodes:
        raise ScaleGuardError(f"{len(g.nodes)} nodes, compact model allows {guard.max_nodes}")
    if len(scenario.aircraft) > guard.max_aircraft:
        raise ScaleGuardError(
            f"{len(scenario.aircraft)} aircraft, compact model allows {guard.max_aircraft}"
        )
    if scenario.horizon > guard.max_horizon:
        raise ScaleGuardError(f"horizon {scenario.horizon}, compact model allows {guard.max_horizon}")


def _profile_offsets(
    scenario: Scenario, profiles: ProfileStore, lambda_nodes: int
) -> dict[tuple[str, int], tuple[int, ...]]:
    """(ВС, p) -> смещения времени по позициям 1..p+1 для всех доступных длин профиля"""
    out: dict[tuple[str, int], tuple[int, ...]] = {}
    for a in scenario.aircraft:
        name = scenario.category_name(a.category)
        for p in range(1, lambda_nodes):
            try:
                profile = profiles.lookup(a, p, name)
            except MissingProfileError:
                continue
            offsets = [0]
            for u in profile.segment_times:
                offsets.append(offsets[-1] + u)
            out[(a.id, p)] = tuple(offsets)
    return out


def build_m1(
    g: GridGraph,
    turns: TurnTable,
    scenario: Scenario,
    opts: ModelOptions,
    profiles: ProfileStore | None = None,
    guard: CompactGuard | None = None,
) -> CompactModel:
    _check_guard(g, scenario, guard or CompactGuard())
    profiles = profiles or scenario.profiles
    if profiles is None:
        raise MissingProfileError(f"scenario {scenario.name} carries no speed profiles")

    cm = CompactModel(mip=MipModel(name=f"m1_{scenario.name}"), g=g, scenario=scenario, opts=opts)
    mip = cm.mip
    cm.offsets = _profile_offsets(scenario, profiles, opts.lambda_nodes)

    for edge in g.edges:
        cm.x[edge] = mip.add_var(f"x_{edge.source}_{edge.target}")
        cm.f[edge] = mip.add_var(f"f_{edge.source}_{edge.target}", VarType.CONTINUOUS)
    for b in g.entries:
        cm.ell[b] = mip.add_var(f"ell_{b}", VarType.CONTINUOUS)
        for edge in g.edges:
            cm.xep[(b, edge)] = mip.add_var(f"xep_{b}_{edge.source}_{edge.target}")

    objective: list[tuple[str, Number]] = [
        (cm.x[e], opts.beta * g.physical_length(e)) for e in g.edges
    ]
    for b in g.entries:
        demand = len(scenario.aircraft_at(b))
        if demand:
            objective += [
                (cm.xep[(b, e)], (1 - opts.beta) * demand * g.physical_length(e)) for e in g.edges
            ]
    mip.set_objective(objective)

    _add_tree_rows(cm, turns)
    _add_flow_rows(cm)
    _add_entry_path_rows(cm)
    _add_trajectory_rows(cm)
    _add_wake_rows(cm)
    if opts.consistency is not None:
        _add_consistency_rows(cm, opts.consistency.previous_tree, opts.consistency.budget)
    if opts.carryover is not None:
        _add_carryover_rows(cm, opts.carryover)

    log.info(f"built compact model {mip.name}", extra={**mip.stats(), "tags": dict(mip.tag_census())})
    return cm


def _add_tree_rows(cm: CompactModel, turns: TurnTable) -> None:
    g, mip = cm.g, cm.mip
    for node in g.nodes:
        if node in g.special:
            continue
        mip.add_constraint("indegree", {cm.x[e]: 1 for e in g.in_edges(node)}, "<=", 2)
        mip.add_constraint("outdegree", {cm.x[e]: 1 for e in g.out_edges(node)}, "<=", 1)
    for b in g.entries:
        mip.add_constraint("entry_outdegree", {cm.x[e]: 1 for e in g.out_edges(b)}, "==", 1)
    if cm.opts.single_final_approach:
        mip.add_constraint("runway_indegree", {cm.x[e]: 1 for e in g.in_edges(g.runway)}, "==", 1)

    # |Γ| x_ij + Σ_{(j,k)∈Γ} x_jk <= |Γ|
    for edge in g.edges:
        banned = sorted(turns.m1_forbidden(edge))
        if not banned:
            continue
        terms = [(cm.x[edge], len(banned)), *((cm.x[e], 1) for e in banned)]
        mip.add_constraint("curvature", terms, "<=", len(banned))

    for quad in crossing_quads(g):
        mip.add_constraint("crossing", {cm.x[e]: 1 for e in quad.edges}, "<=", 1)


def _add_flow_rows(cm: CompactModel) -> None:
    g, mip, scenario = cm.g, cm.mip, cm.scenario
    q = len(scenario.aircraft)
    for node in g.nodes:
        outflow = [(cm.f[e], 1) for e in g.out_edges(node)]
        inflow = [(cm.f[e], -1) for e in g.in_edges(node)]
        if node == g.runway:
            rhs = -q
        elif node in g.entries:
            rhs = len(scenario.aircraft_at(node))
        else:
            rhs = 0
        if outflow or inflow:
            mip.add_constraint("flow_balance", [*outflow, *inflow], "==", rhs)
    for edge in g.edges:
        mip.add_constraint("flow_capacity", {cm.f[edge]: 1, cm.x[edge]: -q}, "<=", 0)


def _add_entry_path_rows(cm: CompactModel) -> None:
    g, mip = cm.g, cm.mip
    for b in g.entries:
        for edge in g.edges:
            mip.add_constraint("entry_path_link", {cm.xep[(b, edge)]: 1, cm.x[edge]: -1}, "<=", 0)
        for node in g.nodes:
            terms = [
                *((cm.xep[(b, e)], 1) for e in g.out_edges(node)),
                *((cm.xep[(b, e)], -1) for e in g.in_edges(node)),
            ]
            rhs = 1 if node == b else (-1 if node == g.runway else 0)
            if terms:
                mip.add_constraint("entry_path_flow", terms, "==", rhs)
        mip.add_constraint(
            "path_length", [(cm.ell[b], 1), *((cm.xep[(b, e)], -1) for e in g.edges)], "==", 0
        )
        mip.add_constraint("path_length_bound", {cm.ell[b]: 1}, "<=", cm.opts.lambda_nodes - 1)


def _reachable(g: GridGraph, entry: NodeId) -> dict[NodeId, int]:
    return nx.single_source_shortest_path_length(g.digraph, entry)


def _add_trajectory_rows(cm: CompactModel) -> None:
    g, mip, scenario, opts = cm.g, cm.mip, cm.scenario, cm.opts
    delta = reverse_bfs_distances(g)
    horizon = scenario.horizon
    reach = {b: _reachable(g, b) for b in g.entries}
    lam = opts.lambda_nodes

    for n, a in enumerate(scenario.aircraft):
        b = a.entry
        lengths = sorted(p for (aid, p) in cm.offsets if aid == a.id)
        window = entry_window(a, opts.effective_mu)

        # y существует лишь там, где ВС физически может оказаться
        for p in lengths:
            offsets = cm.offsets[(a.id, p)]
            for k in range(1, p + 2):
                for j in g.nodes:
                    if (j == b) != (k == 1) or (j == g.runway) != (k == p + 1):
                        continue
                    if j in g.entries and j != b:
                        continue
                    if reach[b].get(j, lam) > k - 1 or delta[j] > p + 1 - k:
                        continue
                    for t0 in window:
                        t = t0 + offsets[k - 1]
                        if t > horizon:
                            continue
                        key = (a.id, j, p, k, t)
                        cm.y[key] = mip.add_var(f"y_{n}_{j}_{p}_{k}_{t}")
                        cm.occupancy[(j, t)].append((a.id, cm.y[key]))

            for k in range(1, p + 1):
                u = offsets[k] - offsets[k - 1]
                for (aid, j, pp, kk, t), yv in list(cm.y.items()):
                    if aid != a.id or pp != p or kk != k:
                        continue
                    for e in g.out_edges(j):
                        if (a.id, e.target, p, k + 1, t + u) in cm.y:
                            zk = (a.id, j, e.target, p, k, t)
                            cm.z[zk] = mip.add_var(f"z_{n}_{j}_{e.target}_{p}_{k}_{t}")

        for p in lengths:
            cm.psi[(a.id, p)] = mip.add_var(f"psi_{n}_{p}")
            cm.phi[(a.id, p)] = mip.add_var(f"phi_{n}_{p}")

        starts = [(v, 1) for (aid, j, p, k, t), v in cm.y.items() if aid == a.id and k == 1]
        mip.add_constraint("trajectory_start", starts, "==", 1)

        ell = cm.ell[b]
        for p in lengths:
            psi, phi = cm.psi[(a.id, p)], cm.phi[(a.id, p)]
            begin = [(v, 1) for (aid, j, pp, k, t), v in cm.y.items() if aid == a.id and pp == p and k == 1]
            mip.add_constraint("profile_start", [*begin, (psi, 1)], "==", 1)
            # ψ = 0 тогда и только тогда, когда ℓ(b) = p
            mip.add_constraint("profile_length_upper", {ell: 1, psi: -lam}, "<=", p)
            mip.add_constraint("profile_length_lower", {ell: 1, psi: lam}, ">=", p)
            mip.add_constraint(
                "profile_length_above", {ell: 1, psi: -lam, phi: lam}, ">=", p + HALF - lam
            )
            mip.add_constraint(
                "profile_length_below", {ell: 1, psi: lam, phi: lam}, "<=", p + 2 * lam - HALF
            )
            mip.add_constraint("profile_direction", {phi: 1, psi: -1}, "<=", 0)
            finish = [
                (v, 1) for (aid, j, pp, k, t), v in cm.y.items()
                if aid == a.id and pp == p and k == p + 1
            ]
            mip.add_constraint("profile_completion", [*finish, (psi, 1)], "==", 1)

    _add_movement_rows(cm)


def _add_movement_rows(cm: CompactModel) -> None:
    g, mip = cm.g, cm.mip
    b_of = {a.id: a.entry for a in cm.scenario.aircraft}
    out_z: dict[YKey, list[str]] = defaultdict(list)
    in_z: dict[YKey, list[str]] = defaultdict(list)
    for (aid, j, i, p, k, t), zv in cm.z.items():
        u = cm.offsets[(aid, p)][k] - cm.offsets[(aid, p)][k - 1]
        source, target = (aid, j, p, k, t), (aid, i, p, k + 1, t + u)
        xep = cm.xep[(b_of[aid], Edge(j, i))]
        mip.add_constraint("move_path_link", {zv: 1, xep: -1}, "<=", 0)
        mip.add_constraint("move_occupancy_link", {zv: 1, cm.y[source]: -1}, "<=", 0)
        mip.add_constraint("move_lower", {zv: 1, xep: -1, cm.y[source]: -1}, ">=", -1)
        out_z[source].append(zv)
        in_z[target].append(zv)

    for key, yv in cm.y.items():
        aid, j, p, k, t = key
        if k > 1:
            mip.add_constraint(
                "node_entry", [(yv, 1), *((cm.x[e], -1) for e in g.in_edges(j))], "<=", 0
            )
            mip.add_constraint("movement_in", [*((v, 1) for v in in_z[key]), (yv, -1)], "==", 0)
        if k <= p:
            mip.add_constraint("movement_out", [*((v, 1) for v in out_z[key]), (yv, -1)], "==", 0)


def _add_wake_rows(cm: CompactModel) -> None:
    mip, sep, horizon = cm.mip, cm.separations, cm.scenario.horizon
    omega = sep.omega
    category = {a.id: cm.opts.category_of(a) for a in cm.scenario.aircraft}
    by_category: dict[int, list[str]] = defaultdict(list)
    for a in cm.scenario.aircraft:
        by_category[category[a.id]].append(a.id)

    for (node, t), present in sorted(cm.occupancy.items()):
        for k1 in sorted({category[aid] for aid, _ in present}):
            leaders = [(aid, v) for aid, v in present if category[aid] == k1]
            for k2 in sep.categories:
                if k2 == k1 or not by_category[k2]:
                    continue
                trailers = cm.vars_at(node, t, min(t + sep(k1, k2) - 1, horizon), by_category[k2])
                if trailers:
                    mip.add_constraint(
                        "separation_cross",
                        [*((v, 1) for _, v in trailers), *((v, omega) for _, v in leaders)],
                        "<=", omega,
                    )
            end = min(t + sep(k1, k1) - 1, horizon)
            for leader in sorted({aid for aid, _ in leaders}):
                others = [aid for aid in by_category[k1] if aid != leader]
                trailers = cm.vars_at(node, t, end, others)
                if not trailers:
                    continue
                own = [v for aid, v in leaders if aid == leader]
                mip.add_constraint(
                    "separation_same",
                    [*((v, 1) for _, v in trailers), *((v, omega) for v in own)],
                    "<=", omega,
                )


def _add_consistency_rows(cm: CompactModel, previous_tree, budget: int) -> None:
    mip, g = cm.mip, cm.g
    previous = frozenset(Edge(*e) for e in previous_tree)
    unknown = [e for e in previous if not g.has_edge(e)]
    if unknown:
        raise UnknownEdgeError(f"previous tree edge {unknown[0]} is not in the grid", edge=str(unknown[0]))
    for edge in g.edges:
        cm.xdelta[edge] = mip.add_var(f"xd_{edge.source}_{edge.target}")
        sign = 1 if edge in previous else -1
        mip.add_constraint(
            "consistency_diff", {cm.xdelta[edge]: 1, cm.x[edge]: sign}, "==", int(edge in previous)
        )
    mip.add_constraint("consistency_budget", {v: 1 for v in cm.xdelta.values()}, "<=", budget)
    for edge in sorted(previous):
        terms = [(cm.x[edge], 1), *((cm.xep[(b, edge)], -1) for b in g.entries)]
        mip.add_constraint("consistency_used", terms, "<=", 0)


def _add_carryover_rows(cm: CompactModel, state: CarryoverState) -> None:
    if state.is_empty:
        return
    mip, sep = cm.mip, cm.separations
    by_category: dict[int, list[str]] = defaultdict(list)
    for a in cm.scenario.aircraft:
        by_category[cm.opts.category_of(a)].append(a.id)

    for occ in state.node_occupancies:
        k1 = sep.categories[0] if cm.opts.single_category else occ.category
        for k2 in sep.categories:
            if not by_category[k2]:
                continue
            forward = cm.vars_at(occ.node, occ.time, occ.time + sep(k1, k2) - 1, by_category[k2])
            if forward:
                mip.add_constraint("carryover_node_forward", [(v, 1) for _, v in forward], "==", 0)
            backward = cm.vars_at(occ.node, occ.time - sep(k2, k1) + 1, occ.time, by_category[k2])
            if backward:
                mip.add_constraint("carryover_node_backward", [(v, 1) for _, v in backward], "==", 0)

    def users(edge: Edge, t_from: int, t_to: int) -> list[str]:
        return [
            v for (aid, j, i, p, k, t), v in cm.z.items()
            if (j, i) == edge and t_from <= t <= t_to
        ]

    for occ in state.edge_occupancies:
        reverse = users(occ.edge.reversed(), occ.t_start, occ.t_end)
        if reverse:
            mip.add_constraint("carryover_reverse_edge", [(v, 1) for v in reverse], "==", 0)
        for other in cm.g.crossing_pair(occ.edge) or ():
            crossing = users(other, occ.t_start, occ.t_end)
            if crossing:
                mip.add_constraint("carryover_crossing_edge", [(v, 1) for v in crossing], "==", 0)


def _follow(cm: CompactModel, entry: NodeId, on) -> tuple[NodeId, ...]:
    nodes = [entry]
    while nodes[-1] != cm.g.runway:
        nxt = [e.target for e in cm.g.out_edges(nodes[-1]) if on(cm.xep[(entry, e)])]
        if len(nxt) != 1 or nxt[0] in nodes:
            raise DecodeError(f"entry path of {entry} breaks at node {nodes[-1]}", entry=entry)
        nodes.append(nxt[0])
    return tuple(nodes)


def extract_compact(
    cm: CompactModel,
    values: Mapping[str, float],
    status: SolveStatus,
    objective: float | None,
    catalog: PathCatalog | None = None,
    gap: float | None = None,
) -> ArrivalSolution:
    """Дерево из x, пути из x^EP, расписание из y"""
    if not status.has_solution:
        return ArrivalSolution(status=status, gap=gap)

    def on(var: str) -> bool:
        return round(values.get(var, 0.0)) == 1

    g = cm.g
    chosen: dict[NodeId, Path] = {}
    for entry in g.entries:
        nodes = _follow(cm, entry, on)
        length = sum(g.length(Edge(a, b)) for a, b in zip(nodes, nodes[1:]))
        chosen[entry] = Path(nodes=nodes, length=length)

    assignments: dict[str, Assignment] = {}
    schedule: dict[str, tuple[tuple[NodeId, int], ...]] = {}
    for a in cm.scenario.aircraft:
        rows = sorted(
            (k, j, t) for (aid, j, p, k, t), v in cm.y.items() if aid == a.id and on(v)
        )
        if tuple(j for _, j, _ in rows) != chosen[a.entry].nodes:
            raise DecodeError(f"aircraft {a.id} does not follow its entry path", aircraft=a.id)
        path_id = catalog.path_id(chosen[a.entry].nodes) if catalog is not None else None
        assignments[a.id] = Assignment(path_id=-1 if path_id is None else path_id, entry_time=rows[0][2])
        schedule[a.id] = tuple((j, t) for _, j, t in rows)

    solution = ArrivalSolution(
        status=status,
        objective=objective,
        tree_edges=frozenset(e for e, v in cm.x.items() if on(v)),
        chosen_paths=chosen,
        assignments=assignments,
        schedule=schedule,
        gap=gap,
    )
    solution.avg_deviation = avg_deviation(solution, cm.scenario)
    return solution
