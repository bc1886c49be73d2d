import pytest

from src.application.use_cases.pipeline import build_graph, build_instance
from src.core.errors import OffGridError, ParseError, ScenarioReferenceError
from src.domain.enumerator import enumerate_m2
from src.domain.value_objects import Edge, format_clock, parse_clock
from src.infrastructure.persistence.mappers import (
    carried_aircraft,
    carryover_from_file,
    merge_labels,
    options_from_doc,
    profiles_from_doc,
    scenario_from_doc,
    solution_from_file,
    solution_to_file,
)
from src.application.documents import AircraftDoc, ScenarioDoc
from src.infrastructure.persistence.models import ProfileFileDoc
from src.infrastructure.persistence.repositories import (
    JsonSolutionRepository,
    format_path_dump,
    load_solution,
    parse_toml,
    resolve_scenario,
)
from tests.conftest import SCENARIOS


def with_aircraft(doc, *aircraft):
    return doc.model_copy(update={"aircraft": [*doc.aircraft, *aircraft]})


class TestClock:
    def test_parse(self):
        assert parse_clock("05:03") == 303
        assert parse_clock("00:00") == 0

    @pytest.mark.parametrize("raw", ["5", "05:3", "05:60", "ab:cd"])
    def test_rejects(self, raw):
        with pytest.raises(ValueError):
            parse_clock(raw)

    def test_format(self):
        assert format_clock(303) == "05:03"
        with pytest.raises(ValueError):
            format_clock(-1)


class TestScenarioFiles:
    """TOML-сценарии и их сопоставление с предметной областью"""

    def test_desk_scenario(self, desk):
        scenario = desk.scenario
        assert scenario.origin == parse_clock("08:00")
        assert scenario.horizon == 40
        assert scenario.period_start == 0
        assert [a.planned_time for a in scenario.aircraft] == [2, 2, 6]
        assert [a.category for a in scenario.aircraft] == [1, 1, 2]
        assert scenario.layout.entries == {"A": 0, "B": 4}
        assert scenario.layout.runway == 22
        assert desk.options.mu == 1
        assert desk.options.lambda_nodes == 5

    def test_all_shipped_scenarios_parse(self, repo):
        for path in sorted(SCENARIOS.glob("*.toml")):
            loaded = repo.load(path)
            assert loaded.scenario.aircraft
            assert loaded.scenario.profiles is not None

    def test_toml_syntax_error_carries_line(self):
        with pytest.raises(ParseError) as exc:
            parse_toml("[scenario]\nname \n", ScenarioDoc, "broken.toml")
        assert exc.value.extra["line"] == 2
        assert exc.value.extra["file"] == "broken.toml"

    def test_missing_section(self):
        with pytest.raises(ParseError) as exc:
            parse_toml('[scenario]\nname = "x"\norigin = "08:00"\nhorizon_end = "09:00"\n', ScenarioDoc)
        assert exc.value.extra["field"] == "grid"

    def test_bad_clock(self, desk_doc):
        data = desk_doc.model_dump()
        data["aircraft"][0]["planned"] = "8h02"
        with pytest.raises(Exception):
            ScenarioDoc.model_validate(data)

    def test_unknown_entry(self, desk_doc):
        doc = with_aircraft(desk_doc, AircraftDoc(id="c1", entry="C", planned="08:05"))
        with pytest.raises(ScenarioReferenceError):
            scenario_from_doc(doc)

    def test_unknown_category(self, desk_doc):
        doc = with_aircraft(desk_doc, AircraftDoc(id="c1", entry="A", planned="08:05", category="super"))
        with pytest.raises(ScenarioReferenceError):
            scenario_from_doc(doc)

    def test_duplicate_aircraft(self, desk_doc):
        doc = with_aircraft(desk_doc, AircraftDoc(id="a1", entry="A", planned="08:05"))
        with pytest.raises(ParseError):
            scenario_from_doc(doc)

    def test_planned_outside_horizon(self, desk_doc):
        doc = with_aircraft(desk_doc, AircraftDoc(id="c1", entry="A", planned="09:05"))
        with pytest.raises(ParseError):
            scenario_from_doc(doc)

    def test_off_grid_entry(self, desk_doc):
        grid = desk_doc.grid.model_copy(update={"entries": {"A": (0, 0), "B": (0, 9)}})
        with pytest.raises(OffGridError):
            scenario_from_doc(desk_doc.model_copy(update={"grid": grid}))

    def test_overrides_skip_none(self, desk_doc):
        options = options_from_doc(desk_doc.parameters, mu=None, beta=0.5)
        assert options.mu == 1
        assert options.beta == 0.5

    def test_budget_needs_previous_tree(self, desk_doc):
        assert options_from_doc(desk_doc.parameters, consistency_u=2).consistency is None
        tree = frozenset({Edge(0, 6)})
        consistency = options_from_doc(desk_doc.parameters, tree, consistency_u=2).consistency
        assert consistency.budget == 2
        assert consistency.previous_tree == tree


class TestProfileFiles:
    def test_explicit_profile_overrides_synthesis(self):
        doc = ProfileFileDoc.model_validate({
            "synthesis": {"max_length": 3, "constant_minutes": 1},
            "profile": [{"key": "default", "segments": [2, 2]}],
        })
        store = profiles_from_doc(doc)
        assert store.profiles[("default", 2)].segment_times == (2, 2)
        assert store.profiles[("default", 3)].segment_times == (1, 1, 1)

    def test_bad_segment(self):
        doc = ProfileFileDoc.model_validate({"profile": [{"key": "x", "segments": [1, 0]}]})
        with pytest.raises(ParseError):
            profiles_from_doc(doc)


class TestMergeLabels:
    def test_named_by_distance(self):
        tree = frozenset({
            Edge(0, 6), Edge(2, 6), Edge(6, 12), Edge(4, 12), Edge(12, 17), Edge(17, 22),
        })
        labels = merge_labels(tree, 22, frozenset({0, 2, 4, 22}))
        assert labels == {"n6": 6, "n12": 12, "M1": 6, "M2": 12}

    def test_numbers_only_beyond_three(self):
        tree = frozenset({
            Edge(0, 10), Edge(20, 10), Edge(10, 11), Edge(1, 11), Edge(11, 12),
            Edge(2, 12), Edge(12, 13), Edge(3, 13), Edge(13, 14),
        })
        labels = merge_labels(tree, 14, frozenset({0, 1, 2, 3, 20, 14}))
        assert set(labels) == {"n10", "n11", "n12", "n13"}


class TestSolutionFiles:
    """JSON решения: времена в hh:mm, переходящие ВС по времени посадки"""

    @pytest.fixture
    def solved(self, desk):
        instance = build_instance(desk.scenario, desk.options)
        solution = enumerate_m2(instance.g, instance.catalog, instance.index, desk.scenario, desk.options)
        return solution, solution_to_file(solution, desk.scenario)

    def test_rows(self, desk, solved):
        solution, doc = solved
        assert doc.status == "optimal"
        assert doc.origin == "08:00"
        assert len(doc.rows) == 3
        row = next(r for r in doc.rows if r.aircraft == "a2")
        assert row.category == "light"
        assert row.entry == "A"
        assert row.planned == "08:06"
        assert row.runway == row.times[-1]
        assert row.nodes[0] == 0 and row.nodes[-1] == 22

    def test_merge_columns(self, solved):
        _, doc = solved
        assert all(set(r.merges) <= {"M1", "M2", "M3"} for r in doc.rows)
        assert any(r.merges for r in doc.rows)

    def test_back_to_domain(self, desk, solved, tmp_path):
        solution, doc = solved
        path = JsonSolutionRepository.save_file(doc, tmp_path / "desk.json")
        restored = solution_from_file(load_solution(path), desk.scenario)
        assert restored.tree_edges == solution.tree_edges
        assert restored.schedule == solution.schedule
        assert restored.assignments == solution.assignments

    def test_carryover_boundary(self, desk_doc, solved):
        _, doc = solved
        later = desk_doc.model_copy(update={
            "scenario": desk_doc.scenario.model_copy(update={"name": "desk_next", "period_start": "08:08"}),
        })
        scenario = scenario_from_doc(later)
        assert carried_aircraft(doc, scenario) == ["a2"]
        state = carryover_from_file(doc, scenario)
        # a2 входит в 08:06, к 08:08 позади два узла и одно ребро
        assert [occ.time for occ in state.node_occupancies] == [8, 9, 10]
        assert len(state.edge_occupancies) == 3
        assert all(occ.t_end >= 8 for occ in state.edge_occupancies)
        assert all(occ.category == 2 for occ in state.node_occupancies)

    def test_infeasible_file_carries_nothing(self, desk, solved):
        _, doc = solved
        empty = doc.model_copy(update={"status": "infeasible", "rows": []})
        assert carryover_from_file(empty, desk.scenario).is_empty
        assert empty.display_status == "---"

    def test_resolve_links_previous_solution(self, desk_doc, solved):
        _, doc = solved
        loaded = resolve_scenario(
            desk_doc, SCENARIOS, tree_from=doc, carryover_from=doc, consistency_u=1,
        )
        assert loaded.options.consistency.previous_tree == frozenset(Edge(*e) for e in doc.tree_edges)
        assert not loaded.options.carryover.is_empty


class TestPathDump:
    def test_one_line_per_path(self, desk):
        graph = build_graph(desk.scenario, desk.options)
        lines = format_path_dump(graph.catalog, desk.scenario.layout).splitlines()
        assert len(lines) == 12
        entry, nodes, hops = lines[0].split("\t")
        assert entry == "A"
        assert nodes.split()[0] == "0" and nodes.split()[-1] == "22"
        assert hops == "4"
        assert lines[-1].startswith("B\t4 ")
