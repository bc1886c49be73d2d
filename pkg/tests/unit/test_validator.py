from dataclasses import replace

import pytest

from src.application.use_cases.pipeline import build_instance
from src.domain.entities import (
    ArrivalSolution,
    CarryoverState,
    ConsistencyOptions,
    NodeOccupancy,
    SeparationMatrix,
    Timetable,
    TimetableRow,
)
from src.domain.enumerator import enumerate_m2
from src.domain.grid import build_grid
from src.domain.validator import (
    carried_rows,
    crossing_violations,
    separation_violations,
    timetable_deviation,
    tree_violations,
    validate,
    validate_timetable,
)
from src.domain.value_objects import Edge, SolveStatus, parse_clock
from src.infrastructure.persistence.repositories import load_timetable
from tests.conftest import TRANSCRIPTIONS

SIGMA = SeparationMatrix.from_rows([[2, 3], [2, 2]])


class TestSeparationMatrix:
    def test_leader_is_row(self):
        assert SIGMA(1, 2) == 3
        assert SIGMA(2, 1) == 2
        assert SIGMA.omega == 3

    def test_collapsed(self):
        assert SIGMA.collapsed().categories == (1,)
        assert SIGMA.collapsed()(1, 1) == 2

    def test_incomplete(self):
        with pytest.raises(ValueError):
            SeparationMatrix({(1, 1): 2, (1, 2): 3})

    def test_below_one_minute(self):
        with pytest.raises(ValueError):
            SeparationMatrix.from_rows([[0]])


class TestSeparationViolations:
    def test_pairwise_not_only_neighbours(self):
        schedules = {"h": [("n", 10)], "l1": [("n", 12)], "l2": [("n", 14)]}
        categories = {"h": 1, "l1": 2, "l2": 2}
        found = separation_violations(schedules, categories, SIGMA)
        assert len(found) == 1
        assert found[0].entities[:2] == ("h", "l1")

    def test_same_minute_is_a_conflict(self):
        found = separation_violations({"a": [("n", 5)], "b": [("n", 5)]}, {"a": 1, "b": 1}, SIGMA)
        assert len(found) == 1

    def test_fixed_occupancies(self):
        found = separation_violations({"a": [("n", 6)]}, {"a": 2}, SIGMA, fixed=[(1, "n", 4)])
        assert [v.family for v in found] == ["carryover"]

    def test_fixed_pairs_ignored(self):
        assert separation_violations({}, {}, SIGMA, fixed=[(1, "n", 4), (1, "n", 4)]) == []


class TestPublishedTimetables:
    """Опубликованные расписания двух соседних получасов"""

    @pytest.fixture(scope="class")
    def t5a(self):
        return load_timetable(TRANSCRIPTIONS / "t5a.toml")

    @pytest.fixture(scope="class")
    def t1b(self):
        return load_timetable(TRANSCRIPTIONS / "t1b.toml")

    def test_first_half_hour_is_clean(self, t5a):
        report = validate_timetable(t5a)
        assert report.ok, [v.message for v in report.violations]
        assert len(t5a.rows) == 16

    def test_first_half_hour_deviation(self, t5a):
        assert timetable_deviation(t5a) == pytest.approx(42 / 16)
        assert timetable_deviation(t5a) == pytest.approx(2.625)

    def test_second_half_hour_deviation(self, t1b):
        assert len(t1b.rows) == 17
        assert timetable_deviation(t1b) == pytest.approx(103 / 17)

    def test_joint_check_with_carried_aircraft(self, t5a, t1b):
        report = validate_timetable(t1b, previous=t5a)
        assert report.ok, [v.message for v in report.violations]

    def test_carried_aircraft(self, t5a):
        carried = {row.aircraft for row in carried_rows(t5a, parse_clock("05:30"))}
        assert carried == {"3", "18", "10", "35", "27"}

    def test_carried_occupancies_start_at_boundary(self):
        """Вход переходящего ВС до начала периода не ограничивает новый период, посадка ограничивает"""
        previous = Timetable("prev", 1, (
            TimetableRow(
                "Ent1", "x", 1, parse_clock("05:28"), parse_clock("05:28"), {}, parse_clock("05:36"),
            ),
        ))
        row = TimetableRow("Ent1", "y", 1, parse_clock("05:29"), parse_clock("05:29"), {}, parse_clock("05:45"))
        current = Timetable("cur", 1, (row,), period_start=parse_clock("05:30"), separation=SIGMA)
        assert validate_timetable(current, previous=previous).ok

        close = replace(current, rows=(replace(row, runway=parse_clock("05:37")),))
        assert not validate_timetable(close, previous=previous).passed("carryover")

    def test_one_minute_earlier_breaks_separation(self, t5a):
        """ВС 24 на M3 минутой раньше идёт через минуту после ВС 6"""
        rows = tuple(
            replace(row, merges={**row.merges, "M3": parse_clock("05:10")}) if row.aircraft == "24" else row
            for row in t5a.rows
        )
        report = validate_timetable(replace(t5a, rows=rows))
        violations = report.of("separation")
        assert len(violations) == 1
        assert set(violations[0].entities[:2]) == {"6", "24"}
        assert report.passed("entry_windows")

    def test_window_violation(self, t5a):
        row = t5a.rows[0]
        shifted = replace(row, scheduled=row.planned + t5a.mu + 1)
        report = validate_timetable(replace(t5a, rows=(shifted, *t5a.rows[1:])))
        assert len(report.of("entry_windows")) == 1

    def test_needs_separation(self, t5a):
        with pytest.raises(ValueError):
            validate_timetable(replace(t5a, separation=None))


class TestTreeChecks:
    @pytest.fixture
    def g(self):
        return build_grid(5, 5, 6.0, [0, 4], 22)

    def test_split_is_reported(self, g):
        tree = frozenset({Edge(6, 11), Edge(6, 12)})
        found = tree_violations(g, tree, single_final_approach=True)
        assert [v.family for v in found] == ["tree_degrees"]

    def test_three_way_merge(self, g):
        tree = frozenset({Edge(11, 17), Edge(12, 17), Edge(13, 17)})
        assert len(tree_violations(g, tree, single_final_approach=False)) == 1

    def test_double_runway_entry(self, g):
        tree = frozenset({Edge(17, 22), Edge(16, 22)})
        assert len(tree_violations(g, tree, single_final_approach=True)) == 1
        assert tree_violations(g, tree, single_final_approach=False) == []

    def test_crossing_diagonals(self, g):
        tree = frozenset({Edge(6, 12), Edge(7, 11)})
        assert len(crossing_violations(g, tree)) == 1


class TestValidateSolution:
    """Порча решения перебора ловится нужным семейством"""

    @pytest.fixture
    def solved(self, desk):
        instance = build_instance(desk.scenario, desk.options)
        solution = enumerate_m2(instance.g, instance.catalog, instance.index, desk.scenario, desk.options)
        return instance, solution

    def check(self, desk, instance, solution, options=None):
        return validate(
            solution, instance.g, instance.turns, desk.scenario, options or desk.options,
            desk.scenario.profiles,
        )

    def test_infeasible_solution_has_nothing_to_check(self, desk, solved):
        instance, _ = solved
        report = self.check(desk, instance, ArrivalSolution(status=SolveStatus.INFEASIBLE))
        assert report.ok

    def test_shifted_schedule(self, desk, solved):
        instance, solution = solved
        rows = solution.schedule["a1"]
        schedule = dict(solution.schedule)
        schedule["a1"] = tuple((n, t + 5) for n, t in rows)
        report = self.check(desk, instance, replace(solution, schedule=schedule))
        assert not report.passed("entry_windows")

    def test_stretched_segment(self, desk, solved):
        instance, solution = solved
        rows = list(solution.schedule["b1"])
        rows[-1] = (rows[-1][0], rows[-1][1] + 1)
        schedule = {**solution.schedule, "b1": tuple(rows)}
        report = self.check(desk, instance, replace(solution, schedule=schedule))
        assert not report.passed("profile_length")

    def test_missing_tree_edge(self, desk, solved):
        instance, solution = solved
        path = solution.chosen_paths[0]
        tree = solution.tree_edges - {path.edges[0]}
        report = self.check(desk, instance, replace(solution, tree_edges=tree))
        assert not report.passed("path_membership")

    def test_consistency_budget(self, desk, solved):
        instance, solution = solved
        options = replace(desk.options, consistency=ConsistencyOptions(frozenset({Edge(1, 7)}), 0))
        report = self.check(desk, instance, solution, options)
        assert not report.passed("consistency")

    def test_carryover_conflict(self, desk, solved):
        instance, solution = solved
        node, t = solution.schedule["a1"][0]
        state = CarryoverState(node_occupancies=(NodeOccupancy(1, node, t),))
        report = self.check(desk, instance, solution, replace(desk.options, carryover=state))
        assert not report.passed("carryover")
