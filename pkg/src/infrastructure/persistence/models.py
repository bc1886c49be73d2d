"""Схемы TOML-файлов профилей скоростей и опубликованных расписаний"""
from __future__ import annotations

from pydantic import Field, field_validator

from src.application.documents import StrictDoc, checked_clock


class ProfileClassDoc(StrictDoc):
    final_speed_kt: float = Field(gt=0)
    slope_kt_per_hop: float = Field(ge=0)
    cap_speed_kt: float = Field(gt=0)


class SynthesisDoc(StrictDoc):
    pixel_side_nm: float = 6.0
    min_length: int = 1
    max_length: int = 14
    constant_minutes: int | None = Field(default=None, ge=1)
    classes: dict[str, ProfileClassDoc] = Field(default_factory=dict)


class ExplicitProfileDoc(StrictDoc):
    key: str
    segments: list[int] = Field(min_length=1)


class ProfileFileDoc(StrictDoc):
    provenance: str = ""
    derived: bool = True
    synthesis: SynthesisDoc | None = None
    profile: list[ExplicitProfileDoc] = Field(default_factory=list)


class TimetableHeader(StrictDoc):
    name: str
    mu: int = Field(ge=0)
    period_start: str | None = None
    runway_name: str = "RWY"
    provenance: str = ""


class TimetableRowDoc(StrictDoc):
    entry: str
    aircraft: str
    category: str
    planned: str
    scheduled: str
    merges: dict[str, str] = Field(default_factory=dict)
    runway: str

    @field_validator("planned", "scheduled", "runway")
    @classmethod
    def check_clock(cls, value: str) -> str:
        return checked_clock(value)

    @field_validator("merges")
    @classmethod
    def check_merges(cls, value: dict[str, str]) -> dict[str, str]:
        for t in value.values():
            checked_clock(t)
        return value


class TimetableDoc(StrictDoc):
    timetable: TimetableHeader
    categories: list[str] = Field(default_factory=lambda: ["heavy_medium", "light"])
    # строка - лидер, столбец - ведомый
    sigma: list[list[int]] = Field(default_factory=lambda: [[2, 3], [2, 2]])
    row: list[TimetableRowDoc] = Field(default_factory=list)
