"""Командная строка: paths, solve, chain, validate, render, sweep, serve"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Sequence

from rich.table import Table

from src.application.dto import NO_SOLUTION, SolutionFile, SweepCell
from src.application.use_cases.path_use_cases import GeneratePathsUseCase
from src.application.use_cases.period_use_cases import (
    PeriodSource,
    RunChainUseCase,
    RunPeriodUseCase,
    SweepUseCase,
)
from src.application.use_cases.solution_use_cases import (
    RenderUseCase,
    ValidateSolutionUseCase,
    ValidateTimetableUseCase,
    ValidationResult,
)
from src.core.config import Settings, load_settings
from src.core.errors import AppError, ChainBreakError
from src.core.logging import get_console, get_logger, init_logging
from src.domain.value_objects import ChainMode
from src.infrastructure.persistence.repositories import (
    LoadedScenario,
    TomlScenarioRepository,
    load_solution,
    load_timetable,
)
from src.infrastructure.solvers.registry import backend_names

log = get_logger(__name__)
console = get_console()

EXIT_OK, EXIT_VIOLATIONS, EXIT_ERROR = 0, 1, 2

# флаг CLI -> поле параметров модели
MODEL_FLAGS = ("mu", "lambda_nodes", "beta", "gamma_deg", "single_category", "fixed_entry", "consistency_u")


def _int_list(raw: str) -> list[int]:
    """'0-5' или '1,3,9'"""
    values: list[int] = []
    for part in raw.split(","):
        lo, sep, hi = part.strip().partition("-")
        if sep:
            values.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            values.append(int(part))
    if not values:
        raise argparse.ArgumentTypeError(f"empty list: {raw!r}")
    return values


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters (override the scenario file)")
    g.add_argument("--mu", type=int, help="Entry window radius, minutes.")
    g.add_argument("--lambda", dest="lambda_nodes", type=int, help="Maximum nodes on a route.")
    g.add_argument("--beta", type=float, help="Tree weight against route length weight.")
    g.add_argument("--gamma", dest="gamma_deg", type=float, help="Minimum interior turn angle, degrees.")
    g.add_argument("--single-category", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--fixed-entry", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--consistency-u", type=int, help="Edge budget against the previous tree.")
    g.add_argument("--previous-tree", type=Path, metavar="FILE", help="Solution holding the previous tree.")
    g.add_argument("--carryover-from", type=Path, metavar="FILE", help="Solution of the previous period.")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--backend", choices=backend_names(), help="MIP backend or the exhaustive enumerator.")
    g.add_argument("--time-limit", dest="time_limit_s", type=float, help="Seconds per solve.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tma-arrivals",
        description="Arrival route trees and schedules for a terminal area on a grid.",
    )
    parser.add_argument("--config", type=Path, metavar="FILE", help="Settings TOML file.")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("paths", help="Generate the path catalog.")
    p.add_argument("scenario", type=Path)
    p.add_argument("--dump", type=Path, metavar="FILE", help="Write one path per line.")
    _add_model_flags(p)

    p = sub.add_parser("solve", help="Solve one period.")
    p.add_argument("scenario", type=Path)
    p.add_argument("-o", "--output", type=Path, metavar="FILE", help="Solution JSON.")
    p.add_argument("--model", choices=["m2", "m1"], default="m2", help="Path model or compact model.")
    p.add_argument("--dump-model", type=Path, metavar="FILE", help="Write the model in LP format.")
    p.add_argument("--svg", type=Path, metavar="FILE", help="Also render the tree.")
    _add_model_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("chain", help="Solve consecutive periods.")
    p.add_argument("scenarios", type=Path, nargs="+")
    p.add_argument("--mode", choices=[m.value for m in ChainMode], default="a")
    p.add_argument("--output-dir", type=Path, metavar="DIR")
    _add_model_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="Sweep mu (and U) per period, chaining the first feasible cell.")
    p.add_argument("scenarios", type=Path, nargs="+")
    p.add_argument("--mode", choices=[m.value for m in ChainMode], default="a")
    p.add_argument("--mus", type=_int_list, default=[0, 1, 2, 3, 4, 5], help="e.g. 0-5 or 1,3,9")
    p.add_argument("--budgets", type=_int_list, default=[], help="U values for modes c and d.")
    _add_model_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("validate", help="Check a solution or a published timetable.")
    p.add_argument("scenario", type=Path, nargs="?")
    p.add_argument("solution", type=Path, nargs="?")
    p.add_argument("--timetable", type=Path, metavar="FILE")
    p.add_argument("--previous-timetable", type=Path, metavar="FILE")
    _add_model_flags(p)

    p = sub.add_parser("render", help="Draw a solution as SVG.")
    p.add_argument("scenario", type=Path)
    p.add_argument("solution", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, metavar="FILE")
    p.add_argument("--previous", type=Path, metavar="FILE", help="Overlay this tree dashed.")
    _add_model_flags(p)

    p = sub.add_parser("serve", help="Run the HTTP API.")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    return parser


# --- загрузка ---

def _settings(args: argparse.Namespace) -> Settings:
    settings = Settings.from_toml(str(args.config)) if args.config else load_settings()
    if args.log_level:
        settings = settings.model_copy(update={"log_level": args.log_level})
    return settings


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {k: getattr(args, k) for k in MODEL_FLAGS if getattr(args, k, None) is not None}


def _load(args: argparse.Namespace, path: Path) -> LoadedScenario:
    linked: dict[str, SolutionFile] = {}
    if getattr(args, "previous_tree", None):
        linked["tree_from"] = load_solution(args.previous_tree)
    if getattr(args, "carryover_from", None):
        linked["carryover_from"] = load_solution(args.carryover_from)
    return TomlScenarioRepository().load(path, **linked, **_overrides(args))


def _sources(paths: Sequence[Path]) -> list[PeriodSource]:
    repo = TomlScenarioRepository()
    return [PeriodSource(repo.read(path), path.parent) for path in paths]


# --- вывод ---

def _num(value: float | None, fmt: str) -> str:
    return "--" if value is None else format(value, fmt)


def schedule_table(doc: SolutionFile) -> Table:
    merges = sorted({label for row in doc.rows for label in row.merges})
    table = Table(title=f"{doc.scenario}: {doc.display_status}")
    for column in ("Entry", "Aircraft", "Category", "Planned", "Scheduled", *merges, "RWY"):
        table.add_column(column)
    for row in sorted(doc.rows, key=lambda r: (r.entry, r.aircraft)):
        table.add_row(
            row.entry, row.aircraft, row.category, row.planned, row.scheduled,
            *(row.merges.get(label, "--") for label in merges), row.runway,
        )
    return table


def _summary_line(doc: SolutionFile) -> str:
    if not doc.feasible:
        return f"[bold]{doc.scenario}[/]: {NO_SOLUTION}"
    return (
        f"[bold]{doc.scenario}[/]: {doc.status} objective={doc.objective:.4f} "
        f"avg_deviation={_num(doc.avg_deviation, '.3f')} runtime={doc.runtime_s:.1f}s"
    )


def sweep_table(rows: Sequence[SweepCell]) -> Table:
    table = Table(title="sweep")
    for column in ("Period", "|A|", "Light", "Prev tree", "mu", "U", "Tree", "Run time", "Traj. time", "Avg dev"):
        table.add_column(column)

    for r in rows:
        table.add_row(
            r.period, str(r.aircraft), str(r.light), r.previous_tree or "--", str(r.mu),
            "--" if r.budget is None else str(r.budget), r.tree,
            _num(r.runtime_s, ".1f"), _num(r.trajectory_time_s, ".2f"), _num(r.avg_deviation, ".2f"),
        )
    return table


def violations_table(result: ValidationResult) -> Table:
    table = Table(title="violations" if not result.ok else "all checks passed")
    table.add_column("Family")
    table.add_column("Count", justify="right")
    for family, count in result.report.summary().items():
        table.add_row(family, str(count))
    return table


# --- команды ---

def cmd_paths(args: argparse.Namespace, settings: Settings) -> int:
    result = GeneratePathsUseCase().execute(_load(args, args.scenario), dump_to=args.dump)
    table = Table(title=f"{result.response.total} paths in {result.response.elapsed_s:.2f}s")
    table.add_column("Entry")
    table.add_column("Paths", justify="right")
    for entry, count in result.response.per_entry.items():
        table.add_row(entry, str(count))
    console.print(table)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    loaded = _load(args, args.scenario)
    result = RunPeriodUseCase(settings).execute(
        loaded, args.backend, args.time_limit_s, args.dump_model, args.model, args.output
    )
    if result.feasible:
        console.print(schedule_table(result.file))
    console.print(_summary_line(result.file))
    if args.svg and result.feasible:
        RenderUseCase().execute(loaded, result.file, output=args.svg)
    return EXIT_OK if result.outcome.report.ok else EXIT_VIOLATIONS


def cmd_chain(args: argparse.Namespace, settings: Settings) -> int:
    use_case = RunChainUseCase(settings)
    try:
        results = use_case.execute(
            _sources(args.scenarios), ChainMode(args.mode), _overrides(args),
            args.backend, args.time_limit_s, args.output_dir,
        )
    except ChainBreakError as exc:
        for doc in exc.partial:
            console.print(_summary_line(doc))
        raise
    for result in results:
        console.print(_summary_line(result.file))
    return EXIT_OK if all(r.outcome.report.ok for r in results) else EXIT_VIOLATIONS


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    report = SweepUseCase(settings).execute(
        _sources(args.scenarios), ChainMode(args.mode), args.mus, args.budgets,
        _overrides(args), args.backend, args.time_limit_s,
    )
    console.print(sweep_table(report.rows))
    if report.broken_at:
        console.print(f"[yellow]no feasible cell for {report.broken_at}[/]")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    if args.timetable:
        previous = load_timetable(args.previous_timetable) if args.previous_timetable else None
        result = ValidateTimetableUseCase().execute(load_timetable(args.timetable), previous)
    elif args.scenario and args.solution:
        result = ValidateSolutionUseCase().execute(_load(args, args.scenario), load_solution(args.solution))
    else:
        raise SystemExit("validate needs SCENARIO SOLUTION or --timetable FILE")
    console.print(violations_table(result))
    for v in result.report.violations:
        console.print(f"  [red]{v.family}[/] {v.message}")
    if result.avg_deviation is not None:
        console.print(f"avg_deviation={result.avg_deviation:.4f}")
    return EXIT_OK if result.ok else EXIT_VIOLATIONS


def cmd_render(args: argparse.Namespace, settings: Settings) -> int:
    previous = load_solution(args.previous) if args.previous else None
    RenderUseCase().execute(_load(args, args.scenario), load_solution(args.solution), previous, args.output)
    console.print(f"wrote {args.output}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    from src.api.app import create_app

    uvicorn.run(
        create_app(settings),
        host=args.host or settings.http_host,
        port=args.port or settings.http_port,
        log_level=settings.log_level.lower(),
    )
    return EXIT_OK


COMMANDS = {
    "paths": cmd_paths,
    "solve": cmd_solve,
    "chain": cmd_chain,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "render": cmd_render,
    "serve": cmd_serve,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = _settings(args)
        init_logging(level=settings.log_level)
        return COMMANDS[args.command](args, settings)
    except AppError as exc:
        console.print(f"[bold red]error[/] [{exc.type}] {exc}")
        if exc.extra:
            console.print(f"  {exc.extra}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
