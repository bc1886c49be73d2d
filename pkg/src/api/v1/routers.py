from fastapi import APIRouter, Request

from src.api.lifespan import backend_available
from src.application.dto import HealthResponse
from src.api.v1.periods_router import periods_router

api_v1 = APIRouter(prefix="/v1", tags=["v1"])

api_v1.include_router(periods_router)


@api_v1.get("/healthz", response_model=HealthResponse)
async def healthz(request: Request):
    settings = request.app.state.settings
    available = getattr(request.app.state, "backend_available", None)
    if available is None:
        available = backend_available(settings)
    return HealthResponse(backend=settings.backend, backend_available=available)
