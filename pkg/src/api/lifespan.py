from contextlib import asynccontextmanager
from typing import AsyncIterator

from fastapi import FastAPI

from src.core.config import Settings
from src.core.logging import get_logger
from src.infrastructure.solvers.registry import get_backend, is_enumerator

log = get_logger(__name__)


def backend_available(settings: Settings) -> bool:
    if is_enumerator(settings.backend):
        return True
    try:
        return get_backend(settings.backend, settings).available()
    except Exception as e:
        log.warning(f"Backend {settings.backend} check failed: {e}")
        return False


def build_lifespan(settings: Settings):

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        # --- Startup ---
        log.info("Starting service...", extra={"app": settings.app_name, "env": settings.env})

        app.state.backend_available = backend_available(settings)
        if not app.state.backend_available:
            log.warning(f"Solver backend {settings.backend} is not available. Solve requests will fail.")
        settings.output_dir.mkdir(parents=True, exist_ok=True)
        app.state.ready = True

        log.info("Service is up")

        try:
            yield
        finally:
            # --- Shutdown ---
            log.info("Shutting down service...")
            app.state.ready = False
            log.info("Bye")

    return lifespan
