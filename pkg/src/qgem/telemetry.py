"""Structured logger + JSON report writers.

Event names:
    config.loaded
    sweep.start
    sweep.success
    sweep.error
    compare.result
    report.written

Reports are written by a ReportStore: LocalFileReportStore writes to a path,
StreamReportStore writes to an open text stream (stdout for the CLI).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Protocol, TextIO, runtime_checkable

from qgem.errors import QGEMError

if TYPE_CHECKING:
    from qgem.config import LoadedConfig

logger = logging.getLogger("qgem")


# ---------------------------------------------------------------------------
# EventSink abstraction
# ---------------------------------------------------------------------------


@dataclass
class RunEvent:
    """Emitted at every significant step of a run."""

    event: str  # e.g. "sweep.start", "compare.result"
    run_id: str
    data: dict[str, Any] = field(default_factory=dict)


@runtime_checkable
class EventSink(Protocol):
    """Optional hook for callers that collect run events."""

    def emit(self, event: RunEvent) -> None:
        """Receive a run event. Must not raise."""
        ...


def emit(sink: EventSink | None, event: str, run_id: str, **data: Any) -> None:
    """Forward to ``sink`` if there is one. Swallows all exceptions."""
    if sink is not None:
        try:
            sink.emit(RunEvent(event=event, run_id=run_id, data=data))
        except Exception:
            pass


# ---------------------------------------------------------------------------
# ReportStore abstraction
# ---------------------------------------------------------------------------


@runtime_checkable
class ReportStore(Protocol):
    def write(self, report: dict[str, Any]) -> str:
        """Persist the report; return where it went."""
        ...


class LocalFileReportStore:
    """Writes the report as pretty-printed JSON to a file."""

    def __init__(self, path: str | Path) -> None:
        self._path = Path(path)

    def write(self, report: dict[str, Any]) -> str:
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._path.write_text(dump_report(report) + "\n", encoding="utf-8")
        return str(self._path)


class StreamReportStore:
    def __init__(self, stream: TextIO, name: str = "<stdout>") -> None:
        self._stream = stream
        self._name = name

    def write(self, report: dict[str, Any]) -> str:
        self._stream.write(dump_report(report) + "\n")
        self._stream.flush()
        return self._name


def dump_report(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False, default=str)


# ---------------------------------------------------------------------------
# Logging helpers
# ---------------------------------------------------------------------------


def log_config_loaded(config: LoadedConfig) -> None:
    logger.info(
        "config.loaded",
        extra={
            "event": "config.loaded",
            "source": config.source,
            "mode": config.mode.value,
            "n": config.n,
            "engine": config.run.engine,
        },
    )


def log_sweep_start(run_id: str, n: int, engines: tuple[str, ...], rows: int) -> None:
    logger.info(
        "sweep.start",
        extra={
            "event": "sweep.start",
            "run_id": run_id,
            "n": n,
            "engines": list(engines),
            "expected_rows": rows,
        },
    )


def log_sweep_success(run_id: str, rows: int, elapsed_ms: float) -> None:
    logger.info(
        "sweep.success",
        extra={
            "event": "sweep.success",
            "run_id": run_id,
            "rows": rows,
            "elapsed_ms": elapsed_ms,
        },
    )


def log_sweep_error(run_id: str, error: QGEMError, elapsed_ms: float) -> None:
    logger.error(
        "sweep.error",
        extra={
            "event": "sweep.error",
            "run_id": run_id,
            "kind": error.kind.value,
            "error": str(error),
            "context": error.context,
            "elapsed_ms": elapsed_ms,
        },
    )


def log_compare_result(
    run_id: str, passed: bool, max_diff: float, worst: str | None
) -> None:
    level = logging.INFO if passed else logging.WARNING
    logger.log(
        level,
        "compare.result",
        extra={
            "event": "compare.result",
            "run_id": run_id,
            "passed": passed,
            "max_abs_diff": max_diff,
            "worst": worst,
        },
    )


def log_report_written(destination: str) -> None:
    logger.info(
        "report.written",
        extra={"event": "report.written", "destination": destination},
    )
