import argparse

import pytest

from src.cli.__main__ import EXIT_ERROR, EXIT_OK, EXIT_VIOLATIONS, _int_list, build_parser, main
from tests.conftest import DESK, TRANSCRIPTIONS


class TestIntList:
    def test_range(self):
        assert _int_list("0-5") == [0, 1, 2, 3, 4, 5]

    def test_items(self):
        assert _int_list("1,3,9") == [1, 3, 9]
        assert _int_list("0-1, 4") == [0, 1, 4]

    def test_empty(self):
        with pytest.raises(argparse.ArgumentTypeError):
            _int_list(" , ")


class TestParser:
    def test_model_flags(self):
        args = build_parser().parse_args(
            ["solve", str(DESK), "--mu", "2", "--lambda", "5", "--no-single-category", "--backend", "enumerate"]
        )
        assert args.mu == 2
        assert args.lambda_nodes == 5
        assert args.single_category is False
        assert args.fixed_entry is None
        assert args.model == "m2"

    def test_sweep_defaults(self):
        args = build_parser().parse_args(["sweep", str(DESK), "--mode", "c", "--budgets", "0-2"])
        assert args.mus == [0, 1, 2, 3, 4, 5]
        assert args.budgets == [0, 1, 2]

    def test_unknown_backend(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["solve", str(DESK), "--backend", "gurobi"])


class TestCommands:
    """Коды возврата: 0 - всё чисто, 1 - нарушения, 2 - ошибка ввода"""

    def test_clean_timetable(self):
        assert main(["validate", "--timetable", str(TRANSCRIPTIONS / "t5a.toml")]) == EXIT_OK

    def test_timetable_with_previous(self):
        code = main([
            "validate", "--timetable", str(TRANSCRIPTIONS / "t1b.toml"),
            "--previous-timetable", str(TRANSCRIPTIONS / "t5a.toml"),
        ])
        assert code == EXIT_OK

    def test_perturbed_timetable(self, tmp_path):
        text = (TRANSCRIPTIONS / "t5a.toml").read_text(encoding="utf-8")
        broken = tmp_path / "t5a_broken.toml"
        broken.write_text(
            text.replace('merges = { M2 = "05:10", M3 = "05:11" }', 'merges = { M2 = "05:10", M3 = "05:10" }'),
            encoding="utf-8",
        )
        assert main(["validate", "--timetable", str(broken)]) == EXIT_VIOLATIONS

    def test_unreadable_file(self, tmp_path):
        assert main(["validate", "--timetable", str(tmp_path / "missing.toml")]) == EXIT_ERROR

    def test_paths_dump(self, tmp_path):
        dump = tmp_path / "paths.txt"
        assert main(["paths", str(DESK), "--lambda", "5", "--dump", str(dump)]) == EXIT_OK
        assert len(dump.read_text(encoding="utf-8").splitlines()) == 12

    def test_solve_and_render(self, tmp_path):
        solution, svg = tmp_path / "desk.json", tmp_path / "desk.svg"
        code = main([
            "solve", str(DESK), "--lambda", "5", "--backend", "enumerate",
            "-o", str(solution), "--svg", str(svg),
        ])
        assert code == EXIT_OK
        assert solution.exists() and svg.exists()
        assert main(["validate", str(DESK), str(solution), "--lambda", "5"]) == EXIT_OK
