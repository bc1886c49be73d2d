from types import SimpleNamespace

import pulp
import pytest

from src.domain.mip import MipModel
from src.domain.repositories import SolveLimits
from src.domain.value_objects import SolveStatus
from src.infrastructure.solvers.pulp_backend import (
    PulpBackend,
    cbc_bound_distance,
    highs_bound_distance,
    mip_gap,
)

CBC_TIME_LIMIT_LOG = """\
Result - Stopped on time limit

Objective value:                2.00000000
Lower bound:                    1.500
Gap:                            0.33
Enumerated nodes:               118
"""


class TestGap:
    def test_relative_to_objective(self):
        assert mip_gap(12.0, 10.0) == pytest.approx(2 / 12)

    def test_small_objective_uses_unit_scale(self):
        assert mip_gap(0.5, 0.0) == pytest.approx(0.5)

    def test_cbc_summary(self):
        assert cbc_bound_distance(CBC_TIME_LIMIT_LOG) == pytest.approx(0.5)

    def test_cbc_without_bound(self):
        assert cbc_bound_distance("Result - Optimal solution found\n\nObjective value: 2\n") is None

    def test_highs_info(self):
        info = SimpleNamespace(objective_function_value=5.0, mip_dual_bound=4.0)
        problem = SimpleNamespace(solverModel=SimpleNamespace(getInfo=lambda: info))
        assert highs_bound_distance(problem) == pytest.approx(1.0)
        assert highs_bound_distance(SimpleNamespace()) is None


class TestStoppedOnTimeLimit:
    """Решатель остановлен по времени с допустимым решением: статус feasible и ненулевой разрыв"""

    @pytest.fixture
    def model(self):
        m = MipModel(name="toy")
        m.add_var("x_0_1")
        m.add_constraint("one_path", {"x_0_1": 1}, ">=", 1)
        m.set_objective({"x_0_1": 1}, constant=1)
        return m

    @pytest.fixture
    def stopped(self, monkeypatch):
        def fake_solver(self, limits, log_path=None):
            return SimpleNamespace(available=lambda: True, log_path=log_path)

        def fake_solve(problem, solver=None, **kwargs):
            for var in problem.variables():
                var.varValue = 1.0
            solver.log_path.write_text(CBC_TIME_LIMIT_LOG, encoding="utf-8")
            problem.status = pulp.LpStatusOptimal
            problem.sol_status = pulp.LpSolutionIntegerFeasible
            return problem.status

        monkeypatch.setattr(PulpBackend, "_solver", fake_solver)
        monkeypatch.setattr(pulp.LpProblem, "solve", fake_solve)

    def test_gap_reported(self, model, stopped):
        result = PulpBackend("cbc").solve(model, SolveLimits(time_limit_s=1))
        assert result.status is SolveStatus.FEASIBLE
        assert result.objective == pytest.approx(2.0)
        assert result.gap == pytest.approx(0.25)

    def test_unknown_bound(self, model, stopped):
        result = PulpBackend("glpk").solve(model, SolveLimits(time_limit_s=1))
        assert result.status is SolveStatus.FEASIBLE
        assert result.gap is None

    def test_optimal_has_zero_gap(self, model, cbc):
        result = cbc.solve(model, SolveLimits(time_limit_s=10))
        assert result.status is SolveStatus.OPTIMAL
        assert result.gap == 0.0
