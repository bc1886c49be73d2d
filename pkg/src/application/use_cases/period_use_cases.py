from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from src.application.dto import NO_SOLUTION, SolutionFile, SweepCell
from src.application.use_cases.pipeline import (
    ModelKind,
    PathGraph,
    PeriodOutcome,
    build_graph,
    build_instance,
    solve_instance,
    stage,
)
from src.core.config import Settings
from src.core.errors import ChainBreakError, ParseError
from src.core.logging import get_logger
from src.domain.repositories import SolverBackend
from src.domain.value_objects import ChainMode
from src.infrastructure.persistence.mappers import carried_aircraft, solution_to_file
from src.application.documents import ScenarioDoc
from src.infrastructure.persistence.repositories import (
    JsonSolutionRepository,
    LoadedScenario,
    resolve_scenario,
)

log = get_logger(__name__)


@dataclass
class PeriodResult:
    outcome: PeriodOutcome
    file: SolutionFile
    output: Path | None = None

    @property
    def feasible(self) -> bool:
        return self.outcome.solution.feasible

    @property
    def name(self) -> str:
        return self.outcome.instance.scenario.name


@dataclass(frozen=True)
class PeriodSource:
    """Документ сценария и каталог, от которого считаются ссылки на файлы"""
    doc: ScenarioDoc
    base_dir: Path | None = None


class RunPeriodUseCase:
    def __init__(
        self,
        settings: Settings,
        backend: SolverBackend | None = None,
        solutions: JsonSolutionRepository | None = None,
    ):
        self.settings = settings
        self.backend = backend
        self.solutions = solutions or JsonSolutionRepository()

    def execute(
        self,
        loaded: LoadedScenario,
        backend_name: str | None = None,
        time_limit_s: float | None = None,
        dump_model: Path | None = None,
        model: ModelKind = "m2",
        output: Path | None = None,
        graph: PathGraph | None = None,
    ) -> PeriodResult:
        instance = build_instance(loaded.scenario, loaded.options, graph)
        outcome = solve_instance(
            instance, self.settings, backend_name, self.backend, time_limit_s, dump_model, model
        )
        with stage("emit") as s:
            doc = solution_to_file(outcome.solution, loaded.scenario)
            if output is not None:
                self.solutions.save_file(doc, output)
                s["file"] = str(output)
            s["status"] = doc.display_status
        log.info(
            f"period {loaded.scenario.name}: {doc.display_status}",
            extra={"objective": doc.objective, "avg_deviation": doc.avg_deviation, "mu": loaded.options.mu},
        )
        return PeriodResult(outcome, doc, output)


def resolve_period(
    source: PeriodSource,
    mode: ChainMode,
    previous: SolutionFile | None,
    overrides: dict[str, Any] | None = None,
) -> LoadedScenario:
    """Сценарий периода в цепочке: прошлое решение даёт дерево и/или переходящие ВС по режиму"""
    doc = source.doc
    if previous is not None:
        # внутри цепочки ссылки в файле заменяет прошлый период
        params = doc.parameters.model_copy(update={"previous_tree": None, "carryover_from": None})
        doc = doc.model_copy(update={"parameters": params})
    loaded = resolve_scenario(
        doc,
        source.base_dir,
        tree_from=previous if mode.uses_consistency else None,
        carryover_from=previous if mode.uses_carryover else None,
        **(overrides or {}),
    )
    if previous is not None and mode.uses_consistency and loaded.options.consistency is None:
        raise ParseError(
            f"chain mode {mode.value} needs a consistency budget", field="parameters.consistency_u"
        )
    if previous is not None and mode.uses_carryover:
        carried = carried_aircraft(previous, loaded.scenario)
        log.info(
            f"{len(carried)} aircraft carried into {loaded.scenario.name}",
            extra={"aircraft": carried},
        )
    return loaded


class RunChainUseCase:
    """Последовательные периоды; режим задаёт, что передаётся из периода в период"""

    def __init__(
        self,
        settings: Settings,
        backend: SolverBackend | None = None,
        solutions: JsonSolutionRepository | None = None,
    ):
        self.run_period = RunPeriodUseCase(settings, backend, solutions)

    def execute(
        self,
        sources: Sequence[PeriodSource],
        mode: ChainMode,
        overrides: dict[str, Any] | None = None,
        backend_name: str | None = None,
        time_limit_s: float | None = None,
        output_dir: Path | None = None,
    ) -> list[PeriodResult]:
        results: list[PeriodResult] = []
        previous: SolutionFile | None = None
        layout = None
        for source in sources:
            loaded = resolve_period(source, mode, previous, overrides)
            if layout is not None and loaded.scenario.layout != layout:
                raise ParseError(f"scenario {loaded.scenario.name} uses a different grid", field="grid")
            layout = loaded.scenario.layout

            output = output_dir / f"{loaded.scenario.name}.json" if output_dir is not None else None
            result = self.run_period.execute(loaded, backend_name, time_limit_s, output=output)
            results.append(result)
            if not result.feasible:
                raise ChainBreakError(
                    f"period {result.name} is {result.file.status} in chain mode {mode.value}",
                    partial=[r.file for r in results],
                    period=result.name,
                    mode=mode.value,
                )
            previous = result.file
        return results


@dataclass
class SweepReport:
    rows: list[SweepCell] = field(default_factory=list)
    chosen: list[PeriodResult] = field(default_factory=list)
    broken_at: str | None = None


class SweepUseCase:
    """Перебор μ (и U для режимов c/d) по периодам; первая допустимая ячейка идёт в следующий период"""

    def __init__(self, settings: Settings, backend: SolverBackend | None = None):
        self.settings = settings
        self.run_period = RunPeriodUseCase(settings, backend)

    def _cell(
        self,
        source: PeriodSource,
        mode: ChainMode,
        previous: SolutionFile | None,
        overrides: dict[str, Any],
        graph: PathGraph,
        backend_name: str | None,
        time_limit_s: float | None,
    ) -> tuple[LoadedScenario, PeriodResult]:
        loaded = resolve_period(source, mode, previous, overrides)
        return loaded, self.run_period.execute(loaded, backend_name, time_limit_s, graph=graph)

    def execute(
        self,
        sources: Sequence[PeriodSource],
        mode: ChainMode,
        mus: Iterable[int],
        budgets: Iterable[int] = (),
        overrides: dict[str, Any] | None = None,
        backend_name: str | None = None,
        time_limit_s: float | None = None,
    ) -> SweepReport:
        mus, budgets = sorted(set(mus)), sorted(set(budgets))
        overrides = dict(overrides or {})
        report = SweepReport()
        previous: SolutionFile | None = None
        previous_label: str | None = None

        for source in sources:
            base_overrides = overrides
            if mode.uses_consistency and budgets:
                base_overrides = {**overrides, "consistency_u": budgets[0]}
            base = resolve_period(source, mode, previous, base_overrides)
            graph = build_graph(base.scenario, base.options)
            scenario = base.scenario
            light = sum(1 for a in scenario.aircraft if a.category > 1)
            us: list[int | None] = [None]
            if mode.uses_consistency and previous is not None and budgets:
                us = list(budgets)
            cells = [(mu, u) for mu in mus for u in us]

            chosen = None
            with ThreadPoolExecutor(max_workers=self.settings.sweep_workers) as pool:
                futures = [
                    pool.submit(
                        self._cell, source, mode, previous,
                        {**overrides, "mu": mu, **({"consistency_u": u} if u is not None else {})},
                        graph, backend_name, time_limit_s,
                    )
                    for mu, u in cells
                ]
                for (mu, u), future in zip(cells, futures):
                    loaded, result = future.result()
                    consistency = loaded.options.consistency
                    label = f"T{mode.value}{len(report.chosen) + 1}" if result.feasible else NO_SOLUTION
                    report.rows.append(SweepCell(
                        period=scenario.name,
                        aircraft=len(scenario.aircraft),
                        light=light,
                        previous_tree=previous_label if consistency is not None else None,
                        mu=mu,
                        budget=consistency.budget if consistency is not None else None,
                        tree=label,
                        runtime_s=result.outcome.solution.runtime_s,
                        trajectory_time_s=result.outcome.instance.timings.get("index"),
                        avg_deviation=result.file.avg_deviation,
                    ))
                    if result.feasible:
                        chosen = result
                        previous_label = label
                        report.chosen.append(result)
                        for rest in futures:
                            rest.cancel()
                        break

            if chosen is None:
                report.broken_at = scenario.name
                log.warning(f"no feasible cell for {scenario.name}, sweep stops", extra={"mode": mode.value})
                break
            previous = chosen.file
        return report
