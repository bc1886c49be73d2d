import pytest

from src.application.use_cases.period_use_cases import PeriodSource
from src.application.documents import AircraftDoc
from tests.conftest import SCENARIOS


@pytest.fixture
def next_period_doc(desk_doc):
    """Период, начинающийся в 08:08 на той же сетке: a2 прошлого периода ещё в воздухе"""
    header = desk_doc.scenario.model_copy(update={"name": "desk_next", "period_start": "08:08"})
    return desk_doc.model_copy(update={
        "scenario": header,
        "aircraft": [
            AircraftDoc(id="c1", entry="A", planned="08:09"),
            AircraftDoc(id="d1", entry="B", planned="08:10"),
        ],
    })


@pytest.fixture
def chain_sources(desk_doc, next_period_doc):
    return [PeriodSource(desk_doc, SCENARIOS), PeriodSource(next_period_doc, SCENARIOS)]
