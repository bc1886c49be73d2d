from __future__ import annotations

from typing import Annotated, Callable, Optional

from fastapi import Depends, Request

from src.application.dto import OptionOverrides, SolutionFile
from src.core.config import Settings
from src.core.logging import get_logger
from src.application.documents import ScenarioDoc
from src.infrastructure.persistence.repositories import LoadedScenario, resolve_scenario

log = get_logger(__name__)


def get_settings(request: Request) -> Settings:

    settings: Settings = request.app.state.settings
    return settings


def scenario_loader(settings: Annotated[Settings, Depends(get_settings)]) -> "ScenarioLoader":
    """Разрешение документа сценария; относительные ссылки считаются от data_dir/scenarios"""

    def load(
        doc: ScenarioDoc,
        overrides: OptionOverrides | None = None,
        previous: SolutionFile | None = None,
    ) -> LoadedScenario:
        options = overrides.model_options() if overrides is not None else {}
        return resolve_scenario(
            doc,
            settings.data_dir / "scenarios",
            tree_from=previous,
            carryover_from=previous,
            **options,
        )

    return load


SettingsDep = Annotated[Settings, Depends(get_settings)]
ScenarioLoader = Callable[[ScenarioDoc, Optional[OptionOverrides], Optional[SolutionFile]], LoadedScenario]
ScenarioLoaderDep = Annotated[ScenarioLoader, Depends(scenario_loader)]
