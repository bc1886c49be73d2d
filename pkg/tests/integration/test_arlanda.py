"""Периоды 05:00-06:59 на сетке 15x11; долгие прогоны, запускаются с -m slow"""
import pytest

from src.application.use_cases.path_use_cases import GeneratePathsUseCase
from src.application.use_cases.period_use_cases import PeriodSource, RunChainUseCase, RunPeriodUseCase
from src.domain.value_objects import ChainMode
from tests.conftest import SCENARIOS

pytestmark = pytest.mark.slow

HALF_HOURS = ["arlanda_0500_0529", "arlanda_0530_0559", "arlanda_0600_0629", "arlanda_0630_0659"]


class TestArlandaPaths:
    def test_every_entry_reaches_the_runway(self, repo):
        loaded = repo.load(SCENARIOS / "arlanda_0500_0529.toml", lambda_nodes=10)
        response = GeneratePathsUseCase().execute(loaded).response
        assert set(response.per_entry) == {"Ent1", "Ent2", "Ent3", "Ent4"}
        assert all(n > 0 for n in response.per_entry.values())


class TestArlandaPeriods:
    @pytest.mark.parametrize("name", HALF_HOURS)
    def test_half_hour_is_solved_and_valid(self, settings, repo, cbc, name):
        loaded = repo.load(SCENARIOS / f"{name}.toml")
        result = RunPeriodUseCase(settings, backend=cbc).execute(loaded, "cbc")
        assert result.file.status in ("optimal", "feasible", "infeasible")
        if result.feasible:
            assert result.outcome.report.ok, result.outcome.report.summary()

    def test_carryover_chain(self, settings, repo, cbc):
        sources = [
            PeriodSource(repo.read(SCENARIOS / f"{name}.toml"), SCENARIOS) for name in HALF_HOURS[:2]
        ]
        results = RunChainUseCase(settings, backend=cbc).execute(
            sources, ChainMode.CARRYOVER, backend_name="cbc"
        )
        assert all(r.outcome.report.ok for r in results)
        assert results[1].outcome.instance.options.carryover is not None


class TestArlandaThresholds:
    def test_lambda_variants_nest(self, repo):
        path = SCENARIOS / "arlanda_0500_0529.toml"
        short = GeneratePathsUseCase().execute(repo.load(path, lambda_nodes=14), include_paths=True)
        long = GeneratePathsUseCase().execute(repo.load(path, lambda_nodes=15), include_paths=True)
        assert {tuple(p.nodes) for p in short.response.paths} <= {tuple(p.nodes) for p in long.response.paths}
        assert long.response.total > short.response.total

    def test_needs_an_entry_window(self, settings, repo, cbc):
        """Без окна входа первый получас недопустим, с окном в минуту допустим"""
        path = SCENARIOS / "arlanda_0500_0529.toml"
        use_case = RunPeriodUseCase(settings, backend=cbc)
        assert not use_case.execute(repo.load(path, mu=0), "cbc", time_limit_s=600).feasible
        result = use_case.execute(repo.load(path, mu=1), "cbc", time_limit_s=600)
        assert result.feasible
        assert result.outcome.report.ok
