from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from src.application.dto import SolutionFile, ValidationResponse, ViolationResponse
from src.application.use_cases.pipeline import build_network, stage
from src.core.logging import get_logger
from src.domain.entities import ArrivalSolution, Timetable
from src.domain.validator import (
    ValidationReport,
    avg_deviation,
    timetable_deviation,
    validate,
    validate_timetable,
)
from src.infrastructure.persistence.mappers import solution_from_file, tree_from_file
from src.infrastructure.persistence.repositories import LoadedScenario
from src.infrastructure.render.svg import SvgTheme, emit_svg

log = get_logger(__name__)


def to_response(report: ValidationReport) -> ValidationResponse:
    return ValidationResponse(
        ok=report.ok,
        summary=report.summary(),
        violations=[
            ViolationResponse(
                family=v.family, message=v.message, entities=list(v.entities), times=list(v.times)
            )
            for v in report.violations
        ],
    )


@dataclass
class ValidationResult:
    report: ValidationReport
    avg_deviation: float | None

    @property
    def ok(self) -> bool:
        return self.report.ok


class ValidateSolutionUseCase:
    """Проверка файла решения против сценария, без решателя"""

    def execute(self, loaded: LoadedScenario, doc: SolutionFile) -> ValidationResult:
        scenario, options = loaded.scenario, loaded.options
        solution: ArrivalSolution = solution_from_file(doc, scenario)
        g, turns = build_network(scenario, options)
        with stage("validate") as s:
            report = validate(solution, g, turns, scenario, options, scenario.profiles)
            s["violations"] = len(report.violations)
        deviation = avg_deviation(solution, scenario) if solution.feasible and scenario.aircraft else None
        return ValidationResult(report, deviation)


class ValidateTimetableUseCase:
    """Проверка опубликованного расписания; прошлое расписание даёт переходящие ВС"""

    def execute(self, timetable: Timetable, previous: Timetable | None = None) -> ValidationResult:
        with stage("validate", timetable=timetable.name) as s:
            report = validate_timetable(timetable, previous=previous)
            s["violations"] = len(report.violations)
        return ValidationResult(report, timetable_deviation(timetable))


class RenderUseCase:
    def __init__(self, theme: SvgTheme | None = None):
        self.theme = theme

    def execute(
        self,
        loaded: LoadedScenario,
        doc: SolutionFile,
        previous: SolutionFile | None = None,
        output: Path | None = None,
    ) -> str:
        scenario = loaded.scenario
        solution = solution_from_file(doc, scenario)
        overlay = tree_from_file(previous) if previous is not None and previous.feasible else None
        if overlay is None and loaded.options.consistency is not None:
            overlay = loaded.options.consistency.previous_tree
        with stage("emit", format="svg") as s:
            svg = emit_svg(solution, scenario.layout, overlay, self.theme)
            if output is not None:
                output.parent.mkdir(parents=True, exist_ok=True)
                output.write_text(svg, encoding="utf-8")
                s["file"] = str(output)
        return svg
