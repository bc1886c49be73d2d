from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from starlette.middleware.gzip import GZipMiddleware

from src.api.lifespan import build_lifespan
from src.api.middleware import TimingMiddleware
from src.api.v1.routers import api_v1
from src.core.config import Settings, load_settings
from src.core.errors import register_exception_handlers
from src.core.logging import init_logging

OPENAPI_TAGS = [
    {"name": "Periods", "description": "Path catalogs, period solves, validation and SVG rendering."},
]


def create_app(settings: Settings | None = None) -> FastAPI:
    """HTTP-обёртка над теми же сценариями использования, что и CLI"""
    settings = settings or load_settings()
    init_logging(level=settings.log_level)

    docs = settings.enable_docs and settings.env != "prod"
    app = FastAPI(
        title=settings.app_name,
        version=settings.app_version,
        description="Arrival route trees and landing schedules on a TMA grid.",
        openapi_tags=OPENAPI_TAGS,
        docs_url="/docs" if docs else None,
        redoc_url=None,
        openapi_url="/openapi.json" if docs else None,
        lifespan=build_lifespan(settings),
    )
    app.state.settings = settings

    # решения и SVG больших периодов - сотни килобайт
    app.add_middleware(GZipMiddleware, minimum_size=1024)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=settings.cors_origins,
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
        expose_headers=["X-Process-Time"],
    )
    app.add_middleware(TimingMiddleware)

    register_exception_handlers(app)
    app.include_router(api_v1, prefix="/api")
    return app
