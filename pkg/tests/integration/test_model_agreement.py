"""Перебор, M2 и M1 на случайных сценариях сетки 5x5: одинаковая допустимость и одинаковый оптимум"""
import random
from dataclasses import replace

import pytest

from src.application.use_cases.pipeline import build_instance, solve_instance
from src.domain.entities import Aircraft, CarryoverState, EdgeOccupancy, NodeOccupancy
from src.domain.enumerator import enumerate_m2
from src.domain.value_objects import Edge

pytestmark = pytest.mark.slow


def random_case(desk, seed, max_aircraft=4, mu=None):
    rnd = random.Random(seed)
    entries = sorted(desk.scenario.layout.entries.values())
    aircraft = [
        Aircraft(f"x{n}", rnd.choice(entries), rnd.randint(1, 8), rnd.choice((1, 2)))
        for n in range(rnd.randint(1, max_aircraft))
    ]
    scenario = replace(desk.scenario, name=f"random_{seed}", aircraft=aircraft, horizon=16)
    options = replace(desk.options, mu=rnd.choice((0, 1)) if mu is None else mu)
    return scenario, options


def enumerated(instance):
    return enumerate_m2(instance.g, instance.catalog, instance.index, instance.scenario, instance.options)


def assert_same(reference, other):
    assert reference.feasible == other.feasible
    if reference.feasible:
        assert other.objective == pytest.approx(reference.objective, abs=1e-6)


class TestThreeWayAgreement:
    @pytest.mark.parametrize("seed", range(50))
    def test_random_instance(self, settings, desk, cbc, seed):
        scenario, options = random_case(desk, seed)
        instance = build_instance(scenario, options)
        reference = enumerated(instance)

        m2 = solve_instance(instance, settings, "cbc", cbc)
        assert_same(reference, m2.solution)
        m1 = solve_instance(instance, settings, "cbc", cbc, model="m1")
        assert_same(reference, m1.solution)
        if m2.solution.feasible:
            assert m2.report.ok and m1.report.ok


class TestSpecialCases:
    """Упрощённые строки разделения для одной категории дают тот же оптимум"""

    @pytest.mark.parametrize("seed", range(20))
    def test_window_cap(self, settings, desk, cbc, seed):
        scenario, options = random_case(desk, 100 + seed)
        instance = build_instance(scenario, replace(options, single_category=True))
        assert_same(enumerated(instance), solve_instance(instance, settings, "cbc", cbc).solution)

    @pytest.mark.parametrize("seed", range(20))
    def test_tempo(self, settings, desk, cbc, seed):
        scenario, options = random_case(desk, 200 + seed, mu=0)
        instance = build_instance(scenario, replace(options, single_category=True, fixed_entry=True))
        assert_same(enumerated(instance), solve_instance(instance, settings, "cbc", cbc).solution)


class TestCarryoverAgreement:
    @pytest.mark.parametrize("seed", range(20))
    def test_blocked_node_or_edge(self, settings, desk, cbc, seed):
        rnd = random.Random(300 + seed)
        scenario, options = random_case(desk, 300 + seed, max_aircraft=3)
        catalog = build_instance(scenario, options).catalog
        path = catalog[rnd.randrange(len(catalog))]
        # ребро против хода пути, ни вход, ни ВПП не затрагивает
        k = rnd.randrange(2, len(path.nodes) - 1)
        t = rnd.randint(2, 10)
        state = CarryoverState(
            node_occupancies=(NodeOccupancy(rnd.choice((1, 2)), path.nodes[k], t),),
            edge_occupancies=(EdgeOccupancy(Edge(path.nodes[k], path.nodes[k - 1]), t - 1, t),),
        )
        instance = build_instance(scenario, replace(options, carryover=state))
        reference = enumerated(instance)
        m2 = solve_instance(instance, settings, "cbc", cbc)
        assert_same(reference, m2.solution)
        if m2.solution.feasible:
            assert m2.report.passed("carryover")
