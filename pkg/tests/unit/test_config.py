import pytest
from pydantic import ValidationError

from src.application.documents import ParametersDoc
from src.application.dto import OptionOverrides
from src.core.config import Settings
from src.domain.grid import build_grid, build_turn_table

TURN_ANGLE_SOURCES = [
    pytest.param(lambda v: Settings(env="test", gamma_deg=v).gamma_deg, id="settings"),
    pytest.param(lambda v: ParametersDoc(gamma_deg=v).gamma_deg, id="scenario"),
    pytest.param(lambda v: OptionOverrides(gamma_deg=v).gamma_deg, id="overrides"),
]


class TestTurnAngleBounds:
    """Угол γ везде допускается из [0, 180], как и при построении таблицы поворотов"""

    @pytest.mark.parametrize("read", TURN_ANGLE_SOURCES)
    @pytest.mark.parametrize("gamma_deg", [0.0, 180.0])
    def test_accepted_everywhere(self, read, gamma_deg):
        assert read(gamma_deg) == gamma_deg
        build_turn_table(build_grid(3, 3, 6.0, [0], 8), read(gamma_deg))

    @pytest.mark.parametrize("read", TURN_ANGLE_SOURCES)
    @pytest.mark.parametrize("gamma_deg", [-1.0, 181.0])
    def test_rejected_everywhere(self, read, gamma_deg):
        with pytest.raises(ValidationError):
            read(gamma_deg)
        with pytest.raises(ValueError):
            build_turn_table(build_grid(3, 3, 6.0, [0], 8), gamma_deg)
