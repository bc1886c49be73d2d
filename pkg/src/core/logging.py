from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Any, Iterator

from rich.console import Console
from rich.logging import RichHandler

_INITIALIZED = False
_console = Console(stderr=True)


def init_logging(level: str = "INFO") -> None:

    global _INITIALIZED
    if _INITIALIZED:
        return

    level_num = getattr(logging, level.upper(), logging.INFO)

    logging.basicConfig(
        level=level_num,
        format="%(message)s",  # RichHandler renders time/level/name
        datefmt="[%X]",
        handlers=[RichHandler(console=_console, markup=True, rich_tracebacks=True)],
    )

    for noisy in ("uvicorn.access", "asyncio", "pulp"):
        logging.getLogger(noisy).setLevel(logging.WARNING)

    _INITIALIZED = True


def get_logger(name: str) -> logging.Logger:

    return logging.getLogger(name)


def get_console() -> Console:
    return _console


def set_level(level: str) -> None:

    lvl = getattr(logging, level.upper(), logging.INFO)
    logging.getLogger().setLevel(lvl)


def bind(logger: logging.Logger, **extra: Any) -> logging.LoggerAdapter:

    return logging.LoggerAdapter(logger, extra=extra)


@contextmanager
def log_stage(logger: logging.Logger, stage: str, **extra: Any) -> Iterator[dict[str, Any]]:
    """Замер длительности этапа конвейера; в yield-словарь можно дописать итоги этапа"""
    summary: dict[str, Any] = {}
    started = time.perf_counter()
    try:
        yield summary
    finally:
        elapsed = time.perf_counter() - started
        summary["elapsed_s"] = elapsed
        details = " ".join(f"{k}={v}" for k, v in summary.items() if k != "elapsed_s")
        logger.info(
            f"stage {stage} done in {elapsed:.3f}s {details}".rstrip(),
            extra={"stage": stage, "elapsed_s": elapsed, **extra},
        )
