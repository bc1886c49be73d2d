from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import TypeVar

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from pydantic import BaseModel, ValidationError

from src.application.documents import ScenarioDoc
from src.application.dto import SolutionFile
from src.core.errors import ParseError
from src.core.logging import get_logger
from src.domain.entities import ArrivalSolution, GridLayout, ModelOptions, Scenario, Timetable
from src.domain.pathgen import PathCatalog
from src.domain.trajectories import ProfileStore
from src.infrastructure.persistence.mappers import (
    carryover_from_file,
    options_from_doc,
    profiles_from_doc,
    scenario_from_doc,
    solution_from_file,
    solution_to_file,
    timetable_from_doc,
    tree_from_file,
)
from src.infrastructure.persistence.models import ProfileFileDoc, TimetableDoc

log = get_logger(__name__)

DocT = TypeVar("DocT", bound=BaseModel)

_LINE = re.compile(r"line (\d+)")


def parse_toml(text: str, model: type[DocT], source: str = "<string>") -> DocT:
    """TOML -> pydantic-документ; ошибки с номером строки или путём к полю"""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = _LINE.search(str(exc))
        raise ParseError(
            f"{source}: {exc}", file=source, line=int(match.group(1)) if match else None
        ) from exc
    return validate_doc(data, model, source)


def validate_doc(data: dict, model: type[DocT], source: str = "<document>") -> DocT:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ParseError(f"{source}: {where}: {first['msg']}", file=source, field=where) from exc


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", file=str(path)) from exc


@dataclass
class LoadedScenario:
    """Сценарий вместе с разрешёнными параметрами модели"""
    doc: ScenarioDoc
    scenario: Scenario
    options: ModelOptions
    source: Path | None = None


def load_profiles(path: Path) -> ProfileStore:
    return profiles_from_doc(parse_toml(_read(path), ProfileFileDoc, str(path)))


def load_solution(path: Path) -> SolutionFile:
    text = _read(path)
    try:
        return SolutionFile.model_validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise ParseError(f"{path}: {where}: {first['msg']}", file=str(path), field=where) from exc


def resolve_scenario(
    doc: ScenarioDoc,
    base_dir: Path | None = None,
    profiles: ProfileStore | None = None,
    tree_from: SolutionFile | None = None,
    carryover_from: SolutionFile | None = None,
    **overrides,
) -> LoadedScenario:
    """Подтягивает профили, прошлое дерево и переходящие ВС; явные аргументы важнее ссылок в файле"""
    base = base_dir or Path(".")
    if profiles is None and doc.scenario.profiles:
        profiles = load_profiles(base / doc.scenario.profiles)
    scenario = scenario_from_doc(doc, profiles)

    params = doc.parameters
    if tree_from is None and params.previous_tree:
        tree_from = load_solution(base / params.previous_tree)
    if carryover_from is None and params.carryover_from:
        carryover_from = load_solution(base / params.carryover_from)
    previous_tree = tree_from_file(tree_from) if tree_from is not None and tree_from.feasible else None
    carryover = carryover_from_file(carryover_from, scenario) if carryover_from is not None else None

    options = options_from_doc(params, previous_tree, carryover, **overrides)
    return LoadedScenario(doc=doc, scenario=scenario, options=options)


class TomlScenarioRepository:
    """Сценарии периодов из TOML-файлов"""

    def read(self, path: Path) -> ScenarioDoc:
        return parse_toml(_read(path), ScenarioDoc, str(path))

    def load(self, path: Path, **overrides) -> LoadedScenario:
        doc = self.read(path)
        loaded = resolve_scenario(doc, path.parent, **overrides)
        loaded.source = path
        log.debug(
            f"loaded scenario {loaded.scenario.name}",
            extra={"aircraft": len(loaded.scenario.aircraft), "file": str(path)},
        )
        return loaded


class JsonSolutionRepository:
    """Решения периодов в JSON, времена в hh:mm"""

    def save(self, solution: ArrivalSolution, scenario: Scenario, path: Path) -> Path:
        return self.save_file(solution_to_file(solution, scenario), path)

    @staticmethod
    def save_file(doc: SolutionFile, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(doc.model_dump_json(indent=2), encoding="utf-8")
        return path

    def load(self, path: Path, scenario: Scenario) -> ArrivalSolution:
        return solution_from_file(load_solution(path), scenario)


def load_timetable(path: Path) -> Timetable:
    return timetable_from_doc(parse_toml(_read(path), TimetableDoc, str(path)))


def format_path_dump(catalog: PathCatalog, layout: GridLayout) -> str:
    """Один путь на строку: точка входа, узлы, число переходов"""
    lines = [
        f"{layout.entry_name(path.entry)}\t{' '.join(map(str, path.nodes))}\t{path.hop_count}"
        for path in catalog
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def write_path_dump(catalog: PathCatalog, layout: GridLayout, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_path_dump(catalog, layout), encoding="utf-8")
    return path
