from __future__ import annotations

from src.core.config import Settings
from src.core.errors import BackendUnavailableError
from src.domain.repositories import SolveLimits, SolverBackend
from src.infrastructure.solvers.pulp_backend import PULP_SOLVERS, PulpBackend

ENUMERATE = "enumerate"


def is_enumerator(name: str) -> bool:
    return name == ENUMERATE


def get_backend(name: str, settings: Settings | None = None) -> SolverBackend:
    """MIP-решатель по имени из конфига; перебор обрабатывается в use case"""
    if is_enumerator(name):
        raise BackendUnavailableError("the enumerator solves path models directly", backend=name)
    if name not in PULP_SOLVERS:
        raise BackendUnavailableError(f"unknown backend {name!r}", backend=name)
    if settings is None:
        return PulpBackend(name)
    return PulpBackend(name, settings.integrality_tol, settings.residual_tol)


def limits_from(settings: Settings, time_limit_s: float | None = None) -> SolveLimits:
    return SolveLimits(
        time_limit_s=time_limit_s if time_limit_s is not None else settings.time_limit_s,
        mip_gap_abs=settings.mip_gap_abs,
        threads=settings.solver_threads,
        seed=settings.solver_seed,
        msg=settings.solver_msg,
    )


def backend_names() -> list[str]:
    return [*PULP_SOLVERS, ENUMERATE]
