from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette import status

from src.core.logging import get_logger
log = get_logger(__name__)


@dataclass(slots=True)
class AppError(Exception):

    type: str
    title: str
    detail: str | None = None
    status_code: int = status.HTTP_400_BAD_REQUEST
    instance: str | None = None
    extra: dict[str, Any] | None = None

    def __str__(self) -> str:
        return f"{self.title}: {self.detail}" if self.detail else self.title

    def to_problem(self, request: Request | None = None) -> dict[str, Any]:
        problem = {
            "type": f"/problems/{self.type}",
            "title": self.title,
            "status": self.status_code,
            "detail": self.detail,
            "instance": self.instance or (str(request.url) if request is not None else None),
        }
        if self.extra:
            problem.update(self.extra)
        return problem


def _error(type_: str, title: str, code: int = status.HTTP_422_UNPROCESSABLE_ENTITY):
    """Фабрика подклассов AppError с фиксированными type/title/status"""

    class _Specific(AppError):
        def __init__(self, detail: str | None = None, **extra: Any) -> None:
            AppError.__init__(
                self, type=type_, title=title, detail=detail, status_code=code, extra=extra or None
            )

    return _Specific


# --- grid ---
class OverlapError(_error("grid_overlap", "Entry points, runway and obstacles overlap")):
    pass


class OffGridError(_error("off_grid", "Node outside of the grid")):
    pass


class NotAdjacentError(_error("not_adjacent", "Edges do not share a node")):
    pass


# --- trajectories ---
class MissingProfileError(_error("missing_profile", "No speed profile for route length")):
    pass


class HorizonOverflow(_error("horizon_overflow", "Landing time exceeds the horizon")):
    pass


# --- model ---
class EmptyCatalogError(_error("empty_catalog", "Entry point without feasible path")):
    pass


class IndexMismatchError(_error("index_mismatch", "Occupancy index lacks a trajectory")):
    pass


class UnknownEdgeError(_error("unknown_edge", "Edge is not part of the grid")):
    pass


class ScaleGuardError(_error("scale_guard", "Instance exceeds the desk-scale guard")):
    pass


class DecodeError(_error("decode", "Solver assignment violates the model structure", 500)):
    pass


# --- backend ---
class BackendUnavailableError(_error("backend_unavailable", "Solver backend is not available", 503)):
    pass


class NumericalFailure(_error("numerical_failure", "Binary value outside tolerance", 500)):
    pass


# --- files / pipeline ---
class ParseError(_error("parse", "Cannot parse input file")):
    pass


class ScenarioReferenceError(_error("unknown_reference", "Unknown name referenced in scenario")):
    pass


class ChainBreakError(_error("chain_break", "Period in chain is infeasible", 409)):
    def __init__(self, detail: str | None = None, partial: list | None = None, **extra: Any) -> None:
        super().__init__(detail, **extra)
        # решения периодов, посчитанные до разрыва цепочки
        self.partial = partial or []


class PipelineError(_error("pipeline", "Pipeline stage failed", 500)):
    pass


def register_exception_handlers(app: FastAPI) -> None:

    @app.exception_handler(AppError)
    async def app_error_handler(request: Request, exc: AppError) -> JSONResponse:

        log.error(
            f"AppError [{exc.type}] {exc.title}",
            extra={"status_code": exc.status_code, "url": str(request.url), "detail": exc.detail},
            exc_info=exc.status_code >= 500,
        )

        return JSONResponse(
            status_code=exc.status_code,
            content=exc.to_problem(request),
            media_type="application/problem+json",
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError) -> JSONResponse:
        log.warning(f"Validation error at {request.url}: {exc}")

        problem = {
            "type": "/problems/validation_error",
            "title": "Validation error",
            "status": status.HTTP_400_BAD_REQUEST,
            "detail": str(exc),
            "instance": str(request.url),
        }

        return JSONResponse(
            status_code=status.HTTP_400_BAD_REQUEST,
            content=problem,
            media_type="application/problem+json",
        )
