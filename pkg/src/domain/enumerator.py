"""Полный перебор для крошечных экземпляров: кортежи путей x кортежи времён входа"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from src.core.errors import EmptyCatalogError, ScaleGuardError
from src.core.logging import get_logger
from src.domain.entities import (
    Aircraft,
    ArrivalSolution,
    Assignment,
    CarryoverState,
    ModelOptions,
    Scenario,
)
from src.domain.grid import GridGraph
from src.domain.pathgen import PathCatalog
from src.domain.trajectories import OccupancyIndex, entry_window
from src.domain.validator import (
    avg_deviation,
    carryover_edge_violations,
    crossing_violations,
    edge_usage,
    separation_violations,
    tree_violations,
)
from src.domain.value_objects import Edge, NodeId, SolveStatus

log = get_logger(__name__)


@dataclass(frozen=True)
class EnumerationGuard:
    max_paths: int = 8
    max_aircraft: int = 6
    max_mu: int = 2


def _check_guard(
    g: GridGraph, catalog: PathCatalog, scenario: Scenario, opts: ModelOptions, guard: EnumerationGuard
) -> None:
    worst = max((len(catalog.entry_paths(b)) for b in g.entries), default=0)
    if worst > guard.max_paths:
        raise ScaleGuardError(f"{worst} paths at one entry, enumerator allows {guard.max_paths}")
    if len(scenario.aircraft) > guard.max_aircraft:
        raise ScaleGuardError(f"{len(scenario.aircraft)} aircraft, enumerator allows {guard.max_aircraft}")
    if opts.effective_mu > guard.max_mu:
        raise ScaleGuardError(f"mu={opts.effective_mu}, enumerator allows {guard.max_mu}")


def tree_objective(
    g: GridGraph, catalog: PathCatalog, scenario: Scenario, opts: ModelOptions, chosen: dict[NodeId, int]
) -> tuple[float, frozenset[Edge]]:
    tree = frozenset(e for pid in chosen.values() for e in catalog.edges_of(pid))
    weight = sum(g.physical_length(e) for e in tree)
    demand = sum(
        len(scenario.aircraft_at(entry)) * catalog[pid].physical_length(g.pixel_side)
        for entry, pid in chosen.items()
    )
    return opts.beta * weight + (1 - opts.beta) * demand, tree


def _tree_admissible(g: GridGraph, tree: frozenset[Edge], opts: ModelOptions) -> bool:
    if tree_violations(g, tree, opts.single_final_approach) or crossing_violations(g, tree):
        return False
    if opts.consistency is not None:
        if len(opts.consistency.previous_tree ^ tree) > opts.consistency.budget:
            return False
    return True


class _Scheduler:
    """Лексикографически наименьший допустимый набор времён входа для фиксированных путей"""

    def __init__(self, g: GridGraph, index: OccupancyIndex, scenario: Scenario, opts: ModelOptions):
        self.g = g
        self.index = index
        self.scenario = scenario
        self.opts = opts
        self.sep = opts.separations(scenario.separation)
        self.state = opts.carryover or CarryoverState()
        self.fixed = [
            (self.sep.categories[0] if opts.single_category else occ.category, occ.node, occ.time)
            for occ in self.state.node_occupancies
        ]
        self._pairs: dict[tuple, bool] = {}
        self._alone: dict[tuple, bool] = {}

    def rows(self, key: tuple[str, int, int]) -> tuple[tuple[NodeId, int], ...]:
        tr = self.index.trajectories[key]
        return tuple(zip(self.index.catalog[tr.path_id].nodes, tr.times))

    def category(self, a: Aircraft) -> int:
        return self.opts.category_of(a)

    def fits_carryover(self, a: Aircraft, key: tuple[str, int, int]) -> bool:
        if key not in self._alone:
            rows = {a.id: self.rows(key)}
            clash = separation_violations(rows, {a.id: self.category(a)}, self.sep, self.fixed)
            if not clash:
                clash = carryover_edge_violations(edge_usage(rows), self.state, self.g.crossing_pair)
            self._alone[key] = not clash
        return self._alone[key]

    def compatible(self, a: Aircraft, ka: tuple, b: Aircraft, kb: tuple) -> bool:
        pair = (ka, kb)
        if pair not in self._pairs:
            rows = {a.id: self.rows(ka), b.id: self.rows(kb)}
            cats = {a.id: self.category(a), b.id: self.category(b)}
            self._pairs[pair] = not separation_violations(rows, cats, self.sep)
        return self._pairs[pair]

    def schedule(self, chosen: dict[NodeId, int]) -> list[tuple[str, int, int]] | None:
        aircraft = self.scenario.aircraft
        options: list[list[tuple[str, int, int]]] = []
        for a in aircraft:
            keys = [
                (a.id, chosen[a.entry], t0) for t0 in entry_window(a, self.opts.effective_mu)
                if (a.id, chosen[a.entry], t0) in self.index.trajectories
            ]
            keys = [k for k in keys if self.fits_carryover(a, k)]
            if not keys:
                return None
            options.append(keys)

        picked: list[tuple[str, int, int]] = []

        def extend(pos: int) -> bool:
            if pos == len(aircraft):
                return True
            for key in options[pos]:
                if all(
                    self.compatible(aircraft[i], picked[i], aircraft[pos], key) for i in range(pos)
                ):
                    picked.append(key)
                    if extend(pos + 1):
                        return True
                    picked.pop()
            return False

        return list(picked) if extend(0) else None


def enumerate_m2(
    g: GridGraph,
    catalog: PathCatalog,
    index: OccupancyIndex,
    scenario: Scenario,
    opts: ModelOptions,
    guard: EnumerationGuard | None = None,
) -> ArrivalSolution:
    started = time.perf_counter()
    guard = guard or EnumerationGuard()
    for entry in g.entries:
        if not catalog.entry_paths(entry):
            raise EmptyCatalogError(f"entry {entry} has no feasible path", entry=entry)
    _check_guard(g, catalog, scenario, opts, guard)

    entries = sorted(g.entries)
    candidates: list[tuple[float, tuple[int, ...], frozenset[Edge]]] = []
    for combo in itertools.product(*(catalog.entry_paths(b) for b in entries)):
        chosen = dict(zip(entries, combo))
        objective, tree = tree_objective(g, catalog, scenario, opts, chosen)
        if _tree_admissible(g, tree, opts):
            candidates.append((objective, combo, tree))
    candidates.sort(key=lambda c: (round(c[0], 9), c[1]))

    scheduler = _Scheduler(g, index, scenario, opts)
    for objective, combo, tree in candidates:
        chosen = dict(zip(entries, combo))
        keys = scheduler.schedule(chosen)
        if keys is None:
            continue
        solution = ArrivalSolution(
            status=SolveStatus.OPTIMAL,
            objective=objective,
            tree_edges=tree,
            chosen_paths={b: catalog[pid] for b, pid in chosen.items()},
            assignments={k[0]: Assignment(path_id=k[1], entry_time=k[2]) for k in keys},
            schedule={k[0]: scheduler.rows(k) for k in keys},
            gap=0.0,
            runtime_s=time.perf_counter() - started,
        )
        solution.avg_deviation = avg_deviation(solution, scenario)
        log.debug(f"enumerator optimum {objective:.6f} over {len(candidates)} admissible trees")
        return solution

    log.debug(f"enumerator: none of {len(candidates)} admissible trees can be scheduled")
    return ArrivalSolution(status=SolveStatus.INFEASIBLE, runtime_s=time.perf_counter() - started)
