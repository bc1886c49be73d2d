from __future__ import annotations

import re
import tempfile
import time
from pathlib import Path
from typing import Any

import pulp

from src.core.errors import BackendUnavailableError, NumericalFailure
from src.core.logging import get_logger
from src.domain.mip import MipModel, VarType
from src.domain.repositories import SolveLimits, SolveResult
from src.domain.value_objects import SolveStatus

log = get_logger(__name__)

# имя в конфиге -> имя класса решателя PuLP
PULP_SOLVERS = {
    "cbc": "PULP_CBC_CMD",
    "highs": "HiGHS",
    "glpk": "GLPK_CMD",
}

_CATEGORY = {
    VarType.BINARY: pulp.LpBinary,
    VarType.CONTINUOUS: pulp.LpContinuous,
    VarType.INTEGER: pulp.LpInteger,
}

_SENSE = {
    "<=": pulp.LpConstraintLE,
    ">=": pulp.LpConstraintGE,
    "==": pulp.LpConstraintEQ,
}

# итоговая сводка CBC: при остановке по лимиту в ней есть нижняя оценка
_CBC_OBJECTIVE = re.compile(r"^Objective value:\s+(\S+)", re.MULTILINE)
_CBC_BOUND = re.compile(r"^Lower bound:\s+(\S+)", re.MULTILINE)


def mip_gap(objective: float, bound: float) -> float:
    """Относительный разрыв |z - bound| / max(1, |z|)"""
    return abs(objective - bound) / max(1.0, abs(objective))


def cbc_bound_distance(solver_log: str) -> float | None:
    """Разность целевой функции и нижней оценки из сводки CBC"""
    objective, bound = _CBC_OBJECTIVE.search(solver_log), _CBC_BOUND.search(solver_log)
    if objective is None or bound is None:
        return None
    try:
        return float(objective.group(1)) - float(bound.group(1))
    except ValueError:
        return None


def highs_bound_distance(problem: Any) -> float | None:
    model = getattr(problem, "solverModel", None)
    if model is None or not hasattr(model, "getInfo"):
        return None
    info = model.getInfo()
    try:
        return float(info.objective_function_value) - float(info.mip_dual_bound)
    except (AttributeError, TypeError, ValueError):
        return None


def to_pulp(model: MipModel) -> tuple[pulp.LpProblem, dict[str, pulp.LpVariable]]:
    """MipModel -> LpProblem; имена ограничений начинаются с тега семейства"""
    problem = pulp.LpProblem(model.name, pulp.LpMinimize)
    variables = {
        name: pulp.LpVariable(
            name,
            lowBound=None if v.lb is None else float(v.lb),
            upBound=None if v.ub is None else float(v.ub),
            cat=_CATEGORY[v.vtype],
        )
        for name, v in model.variables.items()
    }
    objective = pulp.LpAffineExpression(
        [(variables[n], float(c)) for n, c in model.objective.items()],
        constant=float(model.objective_constant),
    )
    problem.setObjective(objective)
    for row in model.constraints:
        if not row.terms:
            continue
        expr = pulp.LpAffineExpression([(variables[n], float(c)) for n, c in row.terms.items()])
        problem.addConstraint(
            pulp.LpConstraint(e=expr, sense=_SENSE[row.sense], rhs=float(row.rhs), name=row.name)
        )
    return problem, variables


class PulpBackend:
    """Адаптер к решателям, доступным через PuLP (CBC, HiGHS, GLPK)"""

    def __init__(
        self,
        name: str = "cbc",
        integrality_tol: float = 1e-6,
        residual_tol: float = 1e-4,
    ):
        if name not in PULP_SOLVERS:
            raise BackendUnavailableError(f"unknown backend {name!r}", backend=name)
        self.name = name
        self.integrality_tol = integrality_tol
        self.residual_tol = residual_tol

    def _solver(self, limits: SolveLimits, log_path: Path | None = None) -> Any:
        options: dict[str, Any] = {"msg": limits.msg, "timeLimit": limits.time_limit_s}
        if self.name == "cbc" and log_path is not None:
            options["logPath"] = str(log_path)
        if self.name in ("cbc", "highs"):
            options["gapAbs"] = limits.mip_gap_abs
            if limits.threads:
                options["threads"] = limits.threads
        if self.name == "cbc" and limits.seed is not None:
            options["options"] = [f"randomCbcSeed {limits.seed}"]
        try:
            return pulp.getSolver(PULP_SOLVERS[self.name], **options)
        except pulp.PulpSolverError as exc:
            raise BackendUnavailableError(str(exc), backend=self.name) from exc

    def available(self) -> bool:
        try:
            return bool(pulp.getSolver(PULP_SOLVERS[self.name], msg=False).available())
        except pulp.PulpSolverError:
            return False

    def dump(self, model: MipModel, path: Path) -> Path:
        problem, _ = to_pulp(model)
        path.parent.mkdir(parents=True, exist_ok=True)
        problem.writeLP(str(path))
        log.info(f"wrote model {model.name} to {path}", extra=model.stats())
        return path

    def solve(self, model: MipModel, limits: SolveLimits) -> SolveResult:
        started = time.perf_counter()
        # пустые строки проверяем сами: решателю их не передать
        for row in model.constraints:
            if not row.terms and not row.satisfied({}):
                log.info(f"model {model.name} has an unsatisfiable constant row {row.name}")
                return SolveResult(SolveStatus.INFEASIBLE, runtime_s=time.perf_counter() - started)
        if not model.variables:
            return SolveResult(
                SolveStatus.OPTIMAL,
                objective=float(model.objective_constant),
                gap=0.0,
                runtime_s=time.perf_counter() - started,
            )

        problem, variables = to_pulp(model)
        with tempfile.TemporaryDirectory(prefix="tma-solve-") as tmp:
            log_path = Path(tmp) / f"{self.name}.log"
            solver = self._solver(limits, log_path)
            if not solver.available():
                raise BackendUnavailableError(f"{self.name} is not installed", backend=self.name)
            try:
                problem.solve(solver)
            except pulp.PulpSolverError as exc:
                log.error(f"{self.name} failed on {model.name}: {exc}")
                return SolveResult(SolveStatus.ERROR, runtime_s=time.perf_counter() - started)
            solver_log = log_path.read_text(encoding="utf-8", errors="replace") if log_path.exists() else ""
        runtime = time.perf_counter() - started
        if limits.msg and solver_log:
            log.info(solver_log)

        status = self._status(problem)
        result = SolveResult(status, runtime_s=runtime)
        if status.has_solution:
            result.values = self._values(model, variables)
            result.objective = model.objective_value(result.values)
            if status is SolveStatus.OPTIMAL:
                result.gap = 0.0
            else:
                result.gap = self._gap(problem, solver_log, result.objective)
        log.info(
            f"{self.name} solved {model.name}: {status.value}",
            extra={"objective": result.objective, "gap": result.gap, "runtime_s": runtime},
        )
        return result

    def _gap(self, problem: pulp.LpProblem, solver_log: str, objective: float) -> float | None:
        if self.name == "cbc":
            distance = cbc_bound_distance(solver_log)
        elif self.name == "highs":
            distance = highs_bound_distance(problem)
        else:
            distance = None
        if distance is None:
            log.warning(f"{self.name} reported no bound for {problem.name}, gap unknown")
            return None
        return mip_gap(objective, objective - distance)

    @staticmethod
    def _status(problem: pulp.LpProblem) -> SolveStatus:
        if problem.sol_status == pulp.LpSolutionOptimal:
            return SolveStatus.OPTIMAL
        if problem.sol_status == pulp.LpSolutionIntegerFeasible:
            return SolveStatus.FEASIBLE
        if problem.sol_status == pulp.LpSolutionInfeasible or problem.status == pulp.LpStatusInfeasible:
            return SolveStatus.INFEASIBLE
        if problem.status == pulp.LpStatusNotSolved:
            return SolveStatus.TIME_LIMIT
        return SolveStatus.ERROR

    def _values(self, model: MipModel, variables: dict[str, pulp.LpVariable]) -> dict[str, float]:
        values: dict[str, float] = {}
        for name, var in variables.items():
            raw = var.varValue
            value = 0.0 if raw is None else float(raw)
            if model.variables[name].vtype is VarType.CONTINUOUS:
                values[name] = value
                continue
            if model.variables[name].vtype is VarType.BINARY and not (
                -self.integrality_tol <= value <= 1 + self.integrality_tol
            ):
                raise NumericalFailure(f"{name} = {value} is outside [0, 1]", variable=name)
            rounded = round(value)
            if abs(value - rounded) > self.residual_tol:
                raise NumericalFailure(f"{name} = {value} is not integral", variable=name)
            values[name] = float(rounded)
        return values
