from __future__ import annotations

import os
import socket
from functools import lru_cache
from pathlib import Path
from typing import Literal

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


EnvName = Literal["dev", "test", "prod"]
BackendName = Literal["cbc", "highs", "glpk", "enumerate"]


class Settings(BaseSettings):

    app_name: str = Field(default="tma-arrivals")
    app_version: str = Field(default="0.1.0")
    env: EnvName = Field(default="dev", description="Runtime environment")
    enable_docs: bool = Field(default=True, description="Enable /docs and OpenAPI in non-prod")

    # --- HTTP ---
    http_host: str = Field(default="0.0.0.0")
    http_port: int = Field(default=8000)
    reload: bool = Field(default=False, description="Uvicorn reload (dev only)")

    # --- CORS ---
    cors_allow_origins: str = Field(default="http://localhost:3000")

    # --- Logging ---
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # --- Solver backend ---
    backend: BackendName = Field(default="cbc", description="MIP backend or the exhaustive enumerator")
    time_limit_s: float = Field(default=3600.0, description="Time budget per solve, seconds")
    mip_gap_abs: float = Field(default=0.0, description="Absolute MIP gap accepted as optimal")
    solver_threads: int | None = Field(default=None)
    solver_seed: int | None = Field(default=None, description="Backend random seed")
    solver_msg: bool = Field(default=False, description="Echo backend log to stdout")
    integrality_tol: float = Field(default=1e-6)
    residual_tol: float = Field(default=1e-4)

    # --- Model defaults ---
    beta: float = Field(default=0.1, ge=0.0, le=1.0, description="Tree weight vs. path length weight")
    gamma_deg: float = Field(default=135.0, ge=0.0, le=180.0, description="Minimum interior turn angle")
    lambda_nodes: int = Field(default=14, ge=1, description="Maximum number of nodes on a route")
    mu: int = Field(default=0, ge=0, description="Entry window radius, minutes")
    single_final_approach: bool = Field(
        default=True, description="Tree enters the runway through exactly one edge"
    )

    # --- Desk-scale guards ---
    compact_max_nodes: int = Field(default=40)
    compact_max_aircraft: int = Field(default=5)
    compact_max_horizon: int = Field(default=40)
    enum_max_paths: int = Field(default=8)
    enum_max_aircraft: int = Field(default=6)
    enum_max_mu: int = Field(default=2)

    # --- Experiments ---
    sweep_workers: int = Field(default=4, ge=1, description="Concurrent cells of a mu/U sweep")

    # --- Files ---
    data_dir: Path = Field(default=Path("data"))
    output_dir: Path = Field(default=Path("out"))

    # --- Meta ---
    hostname: str = Field(default_factory=socket.gethostname)

    model_config = SettingsConfigDict(env_file=".env", env_nested_delimiter="__", extra="ignore")

    @classmethod
    def from_toml(cls, path: str) -> "Settings":
        with open(path, "rb") as f:
            data = tomllib.load(f)
        flat: dict = {}
        for k, v in data.items():
            if isinstance(v, dict):
                for kk, vv in v.items():
                    flat[f"{kk}"] = vv
            else:
                flat[k] = v
        return cls(**flat)

    @property
    def cors_origins(self) -> list[str]:
        return _parse_cors_origins(self.cors_allow_origins)


@lru_cache
def load_settings() -> Settings:
    config_file = os.getenv("CONFIG_FILE") or os.getenv("APP_CONFIG")
    base = Settings()
    if config_file and os.path.exists(config_file):
        file_settings = Settings.from_toml(config_file)
        # переменные окружения важнее файла
        return file_settings.model_copy(update=base.model_dump(exclude_unset=True))
    return base


def _parse_cors_origins(raw: str | None) -> list[str]:
    if not raw or raw == "*":
        return ["*"]
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    return parts or ["*"]
