from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field

from src.application.documents import ScenarioDoc

NO_SOLUTION = "---"


class SolutionRow(BaseModel):
    """Строка расписания в раскладке опубликованных таблиц плюс полный маршрут"""
    entry: str
    aircraft: str
    category: str
    planned: str
    scheduled: str
    merges: dict[str, str] = Field(default_factory=dict)
    runway: str
    path_id: int
    nodes: list[int]
    times: list[str]


class PathRecord(BaseModel):
    entry: str
    nodes: list[int]
    length: float


class SolutionFile(BaseModel):
    scenario: str
    origin: str
    status: str
    objective: Optional[float] = None
    gap: Optional[float] = None
    runtime_s: float = 0.0
    avg_deviation: Optional[float] = None
    tree_edges: list[tuple[int, int]] = Field(default_factory=list)
    merge_labels: dict[str, int] = Field(default_factory=dict)
    paths: list[PathRecord] = Field(default_factory=list)
    rows: list[SolutionRow] = Field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status in ("optimal", "feasible")

    @property
    def display_status(self) -> str:
        return self.status if self.feasible else NO_SOLUTION


class ViolationResponse(BaseModel):
    family: str
    message: str
    entities: list[str] = Field(default_factory=list)
    times: list[int] = Field(default_factory=list)


class ValidationResponse(BaseModel):
    """Итог проверки решения по семействам ограничений"""
    ok: bool
    summary: dict[str, int]
    violations: list[ViolationResponse] = Field(default_factory=list)


class OptionOverrides(BaseModel):
    """Параметры, перекрывающие значения из файла сценария"""
    mu: Optional[int] = Field(default=None, ge=0)
    lambda_nodes: Optional[int] = Field(default=None, ge=1)
    beta: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    gamma_deg: Optional[float] = Field(default=None, ge=0.0, le=180.0)
    single_category: Optional[bool] = None
    fixed_entry: Optional[bool] = None
    consistency_u: Optional[int] = Field(default=None, ge=0)
    backend: Optional[str] = None
    time_limit_s: Optional[float] = Field(default=None, gt=0)

    def as_dict(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)

    def model_options(self) -> dict[str, Any]:
        """Только параметры модели, без настроек решателя"""
        return self.model_dump(exclude_none=True, exclude={"backend", "time_limit_s"})


class PathsRequest(BaseModel):
    scenario: ScenarioDoc
    lambda_nodes: Optional[int] = Field(default=None, ge=1)
    include_paths: bool = False


class PathsResponse(BaseModel):
    total: int
    per_entry: dict[str, int]
    elapsed_s: float
    paths: list[PathRecord] = Field(default_factory=list)


class SolveRequest(BaseModel):
    scenario: ScenarioDoc
    overrides: OptionOverrides = Field(default_factory=OptionOverrides)
    previous: Optional[SolutionFile] = Field(
        default=None, description="Решение прошлого периода для переходящих ВС и согласованности"
    )


class SolutionRequest(BaseModel):
    scenario: ScenarioDoc
    solution: SolutionFile
    overrides: OptionOverrides = Field(default_factory=OptionOverrides)
    previous: Optional[SolutionFile] = None


class HealthResponse(BaseModel):
    status: str = "ok"
    backend: str
    backend_available: bool


class SweepCell(BaseModel):
    """Строка таблицы результатов эксперимента"""
    period: str
    aircraft: int
    light: int
    previous_tree: Optional[str] = None
    mu: int
    budget: Optional[int] = None
    tree: str
    runtime_s: Optional[float] = None
    trajectory_time_s: Optional[float] = None
    avg_deviation: Optional[float] = None
