from fastapi import APIRouter, Response
from starlette.concurrency import run_in_threadpool

from src.api.deps import ScenarioLoaderDep, SettingsDep
from src.application.dto import (
    OptionOverrides,
    PathsRequest,
    PathsResponse,
    SolutionFile,
    SolutionRequest,
    SolveRequest,
    ValidationResponse,
)
from src.application.use_cases.path_use_cases import GeneratePathsUseCase
from src.application.use_cases.period_use_cases import RunPeriodUseCase
from src.application.use_cases.solution_use_cases import (
    RenderUseCase,
    ValidateSolutionUseCase,
    to_response,
)

periods_router = APIRouter(tags=["Periods"])


@periods_router.post("/paths", response_model=PathsResponse)
async def generate_paths(request: PathsRequest, load: ScenarioLoaderDep):
    """Каталог путей для сетки сценария"""
    loaded = load(request.scenario, OptionOverrides(lambda_nodes=request.lambda_nodes), None)
    result = await run_in_threadpool(GeneratePathsUseCase().execute, loaded, request.include_paths)
    return result.response


@periods_router.post("/periods/solve", response_model=SolutionFile)
async def solve_period(request: SolveRequest, settings: SettingsDep, load: ScenarioLoaderDep):
    """Решение одного периода; недопустимый период отдаётся со статусом, а не ошибкой"""
    loaded = load(request.scenario, request.overrides, request.previous)
    use_case = RunPeriodUseCase(settings)
    result = await run_in_threadpool(
        use_case.execute, loaded, request.overrides.backend, request.overrides.time_limit_s
    )
    return result.file


@periods_router.post("/solutions/validate", response_model=ValidationResponse)
async def validate_solution(request: SolutionRequest, load: ScenarioLoaderDep):
    loaded = load(request.scenario, request.overrides, request.previous)
    result = await run_in_threadpool(ValidateSolutionUseCase().execute, loaded, request.solution)
    return to_response(result.report)


@periods_router.post(
    "/solutions/render",
    response_class=Response,
    responses={200: {"content": {"image/svg+xml": {}}}},
)
async def render_solution(request: SolutionRequest, load: ScenarioLoaderDep):
    loaded = load(request.scenario, request.overrides, None)
    svg = await run_in_threadpool(RenderUseCase().execute, loaded, request.solution, request.previous)
    return Response(content=svg, media_type="image/svg+xml")
