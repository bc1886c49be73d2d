"""Конвейер одного периода: сетка -> пути -> индекс -> модель -> решение -> проверка"""
from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Literal

from src.core.config import Settings
from src.core.errors import AppError, MissingProfileError, PipelineError
from src.core.logging import get_logger, log_stage
from src.domain.compact_model import CompactGuard, build_m1, extract_compact
from src.domain.entities import ArrivalSolution, ModelOptions, Scenario
from src.domain.enumerator import EnumerationGuard, enumerate_m2
from src.domain.grid import GridGraph, TurnTable, build_grid, build_turn_table, reverse_bfs_distances
from src.domain.path_model import build_m2, extract_solution
from src.domain.pathgen import PathCatalog, generate_catalog
from src.domain.repositories import SolverBackend
from src.domain.trajectories import OccupancyIndex, build_occupancy_index
from src.domain.validator import ValidationReport, validate
from src.infrastructure.solvers.registry import get_backend, is_enumerator, limits_from

log = get_logger(__name__)

ModelKind = Literal["m2", "m1"]


@contextmanager
def stage(name: str, **extra) -> Iterator[dict]:
    """log_stage плюс атрибуция ошибки этапу"""
    with log_stage(log, name, **extra) as summary:
        try:
            yield summary
        except AppError as exc:
            exc.extra = {**(exc.extra or {}), "stage": name}
            raise
        except Exception as exc:
            raise PipelineError(f"stage {name} failed: {exc}", stage=name) from exc


@dataclass
class PeriodInstance:
    scenario: Scenario
    options: ModelOptions
    g: GridGraph
    turns: TurnTable
    catalog: PathCatalog
    index: OccupancyIndex | None = None
    timings: dict[str, float] = field(default_factory=dict)


def build_network(scenario: Scenario, options: ModelOptions) -> tuple[GridGraph, TurnTable]:
    layout = scenario.layout
    with stage("grid") as s:
        g = build_grid(
            layout.rows, layout.cols, layout.pixel_side,
            [layout.entries[name] for name in sorted(layout.entries)],
            layout.runway, layout.obstacles,
        )
        turns = build_turn_table(g, options.gamma_deg)
        s["edges"] = len(g.edges)
    return g, turns


@dataclass(frozen=True)
class PathGraph:
    g: GridGraph
    turns: TurnTable
    catalog: PathCatalog
    timings: dict[str, float]


def build_graph(scenario: Scenario, options: ModelOptions) -> PathGraph:
    """Сетка и каталог путей; зависят только от сетки, γ и λ"""
    started = time.perf_counter()
    g, turns = build_network(scenario, options)
    grid_s = time.perf_counter() - started
    with stage("paths", lambda_nodes=options.lambda_nodes) as s:
        catalog = generate_catalog(g, turns, reverse_bfs_distances(g), options.lambda_nodes)
        s["paths"] = len(catalog)
    return PathGraph(g, turns, catalog, {"grid": grid_s, "paths": s["elapsed_s"]})


def build_instance(
    scenario: Scenario, options: ModelOptions, graph: PathGraph | None = None
) -> PeriodInstance:
    graph = graph or build_graph(scenario, options)
    instance = PeriodInstance(
        scenario, options, graph.g, graph.turns, graph.catalog, timings=dict(graph.timings)
    )
    if scenario.profiles is None:
        raise MissingProfileError(f"scenario {scenario.name} carries no speed profiles")
    with stage("index", mu=options.effective_mu) as s:
        instance.index = build_occupancy_index(
            graph.catalog,
            scenario.aircraft,
            options.effective_mu,
            scenario.profiles,
            scenario.horizon,
            dict(enumerate(scenario.category_names, start=1)),
        )
        s["trajectories"] = len(instance.index.trajectories)
    instance.timings["index"] = s["elapsed_s"]
    return instance


@dataclass
class PeriodOutcome:
    instance: PeriodInstance
    solution: ArrivalSolution
    report: ValidationReport
    backend: str
    model_stats: dict[str, int] = field(default_factory=dict)


def solve_instance(
    instance: PeriodInstance,
    settings: Settings,
    backend_name: str | None = None,
    backend: SolverBackend | None = None,
    time_limit_s: float | None = None,
    dump_model: Path | None = None,
    model: ModelKind = "m2",
) -> PeriodOutcome:
    name = backend_name or (backend.name if backend is not None else settings.backend)
    scenario, opts = instance.scenario, instance.options
    stats: dict[str, int] = {}

    if model == "m2" and is_enumerator(name):
        with stage("solve", backend=name) as s:
            solution = enumerate_m2(
                instance.g, instance.catalog, instance.index, scenario, opts,
                EnumerationGuard(settings.enum_max_paths, settings.enum_max_aircraft, settings.enum_max_mu),
            )
            s["status"] = solution.status.value
    else:
        backend = backend or get_backend(name, settings)
        with stage("model", kind=model) as s:
            if model == "m1":
                built = build_m1(
                    instance.g, instance.turns, scenario, opts, scenario.profiles,
                    CompactGuard(
                        settings.compact_max_nodes, settings.compact_max_aircraft, settings.compact_max_horizon
                    ),
                )
            else:
                built = build_m2(instance.g, instance.catalog, instance.index, scenario, opts)
            stats = built.mip.stats()
            s.update(stats)
        if dump_model is not None:
            backend.dump(built.mip, dump_model)
        with stage("solve", backend=backend.name) as s:
            started = time.perf_counter()
            result = backend.solve(built.mip, limits_from(settings, time_limit_s))
            if model == "m1":
                solution = extract_compact(
                    built, result.values, result.status, result.objective, instance.catalog, result.gap
                )
            else:
                solution = extract_solution(built, result.values, result.status, result.objective, result.gap)
            solution.runtime_s = result.runtime_s or time.perf_counter() - started
            s["status"] = solution.status.value
            s["objective"] = solution.objective

    with stage("validate") as s:
        report = validate(solution, instance.g, instance.turns, scenario, opts, scenario.profiles)
        s["violations"] = len(report.violations)
    if solution.feasible and not report.ok:
        log.error(
            f"solution of {scenario.name} fails validation",
            extra={"summary": report.summary()},
        )
    return PeriodOutcome(instance, solution, report, name, stats)
