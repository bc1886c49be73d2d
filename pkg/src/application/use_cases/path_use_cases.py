from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from src.application.dto import PathRecord, PathsResponse
from src.application.use_cases.pipeline import PathGraph, build_graph, stage
from src.core.logging import get_logger
from src.infrastructure.persistence.repositories import LoadedScenario, write_path_dump

log = get_logger(__name__)


@dataclass
class PathsResult:
    graph: PathGraph
    response: PathsResponse
    dump: Path | None = None


class GeneratePathsUseCase:
    """Каталог допустимых путей для сетки сценария"""

    def execute(
        self,
        loaded: LoadedScenario,
        include_paths: bool = False,
        dump_to: Path | None = None,
    ) -> PathsResult:
        scenario, options = loaded.scenario, loaded.options
        graph = build_graph(scenario, options)
        layout = scenario.layout
        catalog = graph.catalog

        response = PathsResponse(
            total=len(catalog),
            per_entry={layout.entry_name(entry): n for entry, n in sorted(catalog.counts().items())},
            elapsed_s=graph.timings["paths"],
        )
        if include_paths:
            response.paths = [
                PathRecord(entry=layout.entry_name(p.entry), nodes=list(p.nodes), length=p.length)
                for p in catalog
            ]

        dump = None
        if dump_to is not None:
            with stage("emit", file=str(dump_to)):
                dump = write_path_dump(catalog, layout, dump_to)
        return PathsResult(graph=graph, response=response, dump=dump)
