"""Документ сценария периода: формат TOML-файлов и тел HTTP-запросов"""
from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.domain.value_objects import parse_clock


class StrictDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")


def checked_clock(value: str) -> str:
    parse_clock(value)
    return value


Cell = tuple[int, int]

class ScenarioHeader(StrictDoc):
    name: str
    origin: str = Field(description="Минута 0 горизонта, hh:mm")
    horizon_end: str = Field(description="T̄ как время суток, hh:mm")
    period_start: str | None = None
    profiles: str | None = Field(default=None, description="Путь к файлу профилей относительно сценария")
    provenance: str = ""
    synthetic: bool = False

    @field_validator("origin", "horizon_end", "period_start")
    @classmethod
    def check_clock(cls, value: str | None) -> str | None:
        return value if value is None else checked_clock(value)


class GridDoc(StrictDoc):
    rows: int = Field(ge=2)
    cols: int = Field(ge=2)
    pixel_side_nm: float = Field(default=6.0, gt=0)
    runway: Cell
    runway_name: str = "RWY"
    entries: dict[str, Cell]
    obstacles: list[Cell] = Field(default_factory=list)
    orientation: str = ""


class ParametersDoc(StrictDoc):
    beta: float = Field(default=0.1, ge=0.0, le=1.0)
    gamma_deg: float = Field(default=135.0, ge=0.0, le=180.0)
    lambda_nodes: int = Field(default=14, ge=1)
    mu: int = Field(default=0, ge=0)
    single_category: bool = False
    fixed_entry: bool = False
    single_final_approach: bool = True
    consistency_u: int | None = Field(default=None, ge=0)
    previous_tree: str | None = None
    carryover_from: str | None = None


class SeparationDoc(StrictDoc):
    categories: list[str] = Field(default_factory=lambda: ["heavy_medium", "light"], min_length=1)
    # строка - лидер, столбец - ведомый
    sigma: list[list[int]]


class AircraftDoc(StrictDoc):
    id: str
    entry: str
    planned: str
    category: str | None = None
    note: str = ""

    @field_validator("planned")
    @classmethod
    def check_clock(cls, value: str) -> str:
        return checked_clock(value)


class ScenarioDoc(StrictDoc):
    scenario: ScenarioHeader
    grid: GridDoc
    parameters: ParametersDoc = Field(default_factory=ParametersDoc)
    separation: SeparationDoc
    aircraft: list[AircraftDoc] = Field(default_factory=list)
