from pathlib import Path

import pytest

from src.core.config import Settings
from src.domain.grid import build_grid, build_turn_table
from src.infrastructure.persistence.repositories import TomlScenarioRepository
from src.infrastructure.solvers.pulp_backend import PulpBackend

DATA = Path(__file__).resolve().parents[1] / "data"
SCENARIOS = DATA / "scenarios"
TRANSCRIPTIONS = DATA / "transcriptions"
DESK = SCENARIOS / "desk_5x5.toml"


@pytest.fixture
def settings(tmp_path):
    """Настройки для тестов: короткий лимит, вывод во временный каталог"""
    return Settings(
        env="test",
        backend="cbc",
        time_limit_s=120.0,
        solver_seed=7,
        data_dir=DATA,
        output_dir=tmp_path / "out",
        sweep_workers=2,
    )


@pytest.fixture
def repo():
    return TomlScenarioRepository()


@pytest.fixture
def desk(repo):
    """Сценарий 5x5 с путями не длиннее 4 переходов: влезает в перебор и в компактную модель"""
    return repo.load(DESK, lambda_nodes=5)


@pytest.fixture
def desk_doc(repo):
    return repo.read(DESK)


@pytest.fixture
def grid_3x3():
    """3x3, вход в левом верхнем углу, ВПП в правом нижнем"""
    g = build_grid(3, 3, 6.0, [0], 8)
    return g, build_turn_table(g, 135.0)


@pytest.fixture
def cbc():
    backend = PulpBackend("cbc")
    if not backend.available():
        pytest.skip("CBC is not installed")
    return backend
