"""Sweep runner, engine comparison and the JSON report.

Flow: expand targets → validate engines → per time: prepare each engine once →
      evaluate every (measure, target) → clamp → rows in deterministic order
      (t, then measure, then target, then engine).
"""

from __future__ import annotations

import csv
import logging
import math
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable, TextIO

import numpy as np

from qgem import closedform
from qgem.config import LoadedConfig
from qgem.engines.base import Engine, SystemState
from qgem.engines.registry import canonical_name, get as get_engine
from qgem.errors import ErrorKind, QGEMError
from qgem.geometry import PhaseMatrix, random_phase_matrix
from qgem.graphanalysis import (
    GHZCondition,
    RationalPhases,
    build_graph,
    connectivity,
    coupling_signs_balanced,
    ghz_condition,
    ghz_experiment,
    predicts_genuine_entanglement,
    separability_times,
    sustainability,
)
from qgem.results import CSV_HEADER, EntanglementValue, Measure, SweepPoint, Target
from qgem.telemetry import (
    EventSink,
    emit,
    log_compare_result,
    log_sweep_error,
    log_sweep_start,
    log_sweep_success,
)

logger = logging.getLogger("qgem")

REFERENCE_ENGINES = ("closed", "oracle")


def time_grid(t_start: float, t_end: float, steps: int) -> np.ndarray:
    """``steps`` evenly spaced times including both ends; one step is t_start."""
    if steps == 1:
        return np.array([t_start], dtype=float)
    return np.linspace(t_start, t_end, steps)


def expand_targets(config: LoadedConfig) -> list[tuple[Measure, Target]]:
    n = config.n
    targets: list[tuple[Measure, Target]] = []
    for measure in config.run.measures:
        if measure is Measure.TWO_BODY:
            targets.extend((measure, pair) for pair in combinations(range(n), 2))
        elif measure is Measure.ICONCURRENCE:
            targets.extend((measure, bip) for bip in config.bipartitions)
        elif measure is Measure.Q_K:
            targets.extend((measure, k) for k in range(1, n // 2 + 1))
        elif measure is Measure.TANGLE3:
            targets.append((measure, None))
        elif measure is Measure.PAIRWISE:
            targets.extend((measure, pair) for pair in combinations(range(3), 2))
    return targets


def system_state(config: LoadedConfig) -> SystemState:
    return SystemState(
        phases=config.phases,
        table=config.table,
        max_qubits=config.run.max_qubits,
        radicand_tolerance=config.run.tolerances.radicand,
        tangle_convention=config.run.tangle3_interpretation,
    )


class SweepRunner:
    """Runs one config through one or more engines."""

    def __init__(
        self,
        config: LoadedConfig,
        engines: Iterable[str] | None = None,
        event_sink: EventSink | None = None,
    ) -> None:
        self.config = config
        # aliases collapse, so "oracle" and "statevector" run once
        names = dict.fromkeys(
            canonical_name(name) for name in (engines or config.run.engines)
        )
        self._engines: list[Engine] = [get_engine(name)() for name in names]
        self.system = system_state(config)
        self._targets = expand_targets(config)
        self._event_sink = event_sink
        self.run_id = str(uuid.uuid4())

    @property
    def engine_names(self) -> tuple[str, ...]:
        return tuple(engine.name for engine in self._engines)

    def grid(self) -> np.ndarray:
        run = self.config.run
        return time_grid(run.t_start, run.t_end, run.steps)

    def expected_rows(self) -> int:
        return self.config.run.steps * len(self._targets) * len(self._engines)

    # ------------------------------------------------------------------
    # Running
    # ------------------------------------------------------------------

    def run(self) -> list[EntanglementValue]:
        """Evaluate the whole sweep.

        Raises:
            QGEMError: on the first failing point, with row context attached.
        """
        grid = [float(t) for t in self.grid()]
        expected = self.expected_rows()
        log_sweep_start(self.run_id, self.config.n, self.engine_names, expected)
        emit(self._event_sink, "sweep.start", self.run_id, rows=expected)
        t0 = time.monotonic()
        try:
            for engine in self._engines:
                engine.validate(self.system)
            workers = self.config.run.workers
            if workers > 1:
                # map() yields in submission order, whatever finishes first
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    chunks = list(pool.map(self._rows_at, grid))
            else:
                chunks = [self._rows_at(t) for t in grid]
        except QGEMError as exc:
            elapsed_ms = (time.monotonic() - t0) * 1000
            log_sweep_error(self.run_id, exc, elapsed_ms)
            emit(
                self._event_sink,
                "sweep.error",
                self.run_id,
                kind=exc.kind.value,
                context=exc.context,
            )
            raise
        rows = [row for chunk in chunks for row in chunk]
        elapsed_ms = (time.monotonic() - t0) * 1000
        log_sweep_success(self.run_id, len(rows), elapsed_ms)
        emit(self._event_sink, "sweep.success", self.run_id, rows=len(rows))
        return rows

    def compare(self, rows: list[EntanglementValue]) -> ComparisonReport:
        """Compare the runner's two engines row by row and log the verdict."""
        engines = self.engine_names if len(self._engines) == 2 else REFERENCE_ENGINES
        report = compare_rows(rows, self.config.run.tolerances.compare, engines)
        worst = report.worst
        log_compare_result(
            self.run_id,
            report.passed,
            report.max_abs_diff,
            worst.worst_target if worst else None,
        )
        emit(
            self._event_sink,
            "compare.result",
            self.run_id,
            passed=report.passed,
            max_abs_diff=report.max_abs_diff,
        )
        return report

    def _rows_at(self, t: float) -> list[EntanglementValue]:
        prepared = {
            engine.name: self._guarded(
                {"t": t, "engine": engine.name}, engine.prepare, t
            )
            for engine in self._engines
        }
        clamp = self.config.run.tolerances.clamp
        rows = []
        for measure, target in self._targets:
            point = SweepPoint(t, measure, target)
            for engine in self._engines:
                value = self._guarded(
                    point.context(engine.name),
                    engine.evaluate,
                    prepared[engine.name],
                    point,
                )
                if abs(value) < clamp:
                    value = 0.0
                rows.append(
                    EntanglementValue(t, measure, point.label, engine.name, value)
                )
        return rows

    def _guarded(self, context: dict[str, Any], fn, *args: Any) -> Any:
        """Call ``fn(system, *args)`` and attach the row to any error."""
        try:
            return fn(self.system, *args)
        except QGEMError as exc:
            exc.context = {**context, **exc.context}
            raise
        except Exception as exc:
            raise QGEMError(
                f"Engine failed at {_describe(context)}: {exc}",
                kind=ErrorKind.UNKNOWN,
                cause=exc,
                context=context,
            ) from exc


def run_sweep(
    config: LoadedConfig, event_sink: EventSink | None = None
) -> list[EntanglementValue]:
    return SweepRunner(config, event_sink=event_sink).run()


def write_csv(rows: Iterable[EntanglementValue], stream: TextIO) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    count = 0
    for row in rows:
        writer.writerow(row.to_csv_row())
        count += 1
    return count


# ---------------------------------------------------------------------------
# Engine comparison
# ---------------------------------------------------------------------------


@dataclass
class MeasureComparison:
    measure: Measure
    points: int = 0
    max_abs_diff: float = 0.0
    worst_target: str | None = None
    worst_t: float | None = None
    certified: bool = True

    def passed(self, tolerance: float) -> bool:
        return not self.certified or self.max_abs_diff < tolerance

    def to_dict(self, tolerance: float) -> dict[str, Any]:
        return {
            "points": self.points,
            "max_abs_diff": self.max_abs_diff,
            "worst_target": self.worst_target,
            "worst_t": self.worst_t,
            "certified": self.certified,
            "passed": self.passed(tolerance),
        }


@dataclass
class ComparisonReport:
    """Max |closed - oracle| per measure; pass iff every certified diff < tolerance.

    The published 3-tangle is reported but never certified, so it cannot fail
    the comparison.
    """

    tolerance: float
    measures: list[MeasureComparison] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m.passed(self.tolerance) for m in self.measures)

    @property
    def worst(self) -> MeasureComparison | None:
        certified = [m for m in self.measures if m.certified and m.points]
        return max(certified, key=lambda m: m.max_abs_diff, default=None)

    @property
    def max_abs_diff(self) -> float:
        worst = self.worst
        return worst.max_abs_diff if worst else 0.0

    def to_dict(self) -> dict[str, Any]:
        worst = self.worst
        return {
            "tolerance": self.tolerance,
            "passed": self.passed,
            "max_abs_diff": self.max_abs_diff,
            "worst_measure": worst.measure.value if worst else None,
            "worst_target": worst.worst_target if worst else None,
            "measures": {
                m.measure.value: m.to_dict(self.tolerance) for m in self.measures
            },
        }


def compare_rows(
    rows: Iterable[EntanglementValue],
    tolerance: float = 1e-9,
    engines: tuple[str, str] = REFERENCE_ENGINES,
) -> ComparisonReport:
    """Pair rows by (t, measure, target) across the two engines."""
    left, right = engines
    by_key: dict[tuple[float, Measure, str], dict[str, float]] = {}
    for row in rows:
        by_key.setdefault(row.key, {})[row.engine] = row.value

    found: dict[Measure, MeasureComparison] = {}
    for (t, measure, target), values in by_key.items():
        if left not in values or right not in values:
            continue
        entry = found.setdefault(
            measure,
            MeasureComparison(measure, certified=measure is not Measure.TANGLE3),
        )
        diff = abs(values[left] - values[right])
        entry.points += 1
        if entry.worst_target is None or diff > entry.max_abs_diff:
            entry.max_abs_diff = diff
            entry.worst_target = target
            entry.worst_t = t
    ordered = [found[m] for m in Measure if m in found]
    return ComparisonReport(tolerance=tolerance, measures=ordered)


def compare_engines(
    config: LoadedConfig,
    event_sink: EventSink | None = None,
    engines: tuple[str, str] = REFERENCE_ENGINES,
) -> ComparisonReport:
    """Run the sweep through both engines and compare every shared row.

    Raises:
        QGEMError: TOO_MANY_QUBITS when N exceeds the oracle cap.
    """
    runner = SweepRunner(config, engines=engines, event_sink=event_sink)
    return runner.compare(runner.run())


# ---------------------------------------------------------------------------
# JSON report
# ---------------------------------------------------------------------------


def build_report(
    config: LoadedConfig,
    rows: list[EntanglementValue] | None = None,
    comparison: ComparisonReport | None = None,
) -> dict[str, Any]:
    """Graph predicates, schedules and the comparison summary for one config."""
    run = config.run
    report: dict[str, Any] = {
        "system": {
            "mode": config.mode.value,
            "n": config.n,
            "phase_matrix_rad_per_s": config.phases.values.tolist(),
        },
        "run": {
            "engines": list(run.engines),
            "measures": [m.value for m in run.measures],
            "t_start": run.t_start,
            "t_end": run.t_end,
            "steps": run.steps,
            "rows": len(rows) if rows is not None else None,
        },
        "graph": graph_summary(
            config.phases, run.tolerances.epsilon_edge, config.pairwise_incommensurate
        ),
        "two_body_periods_s": {
            f"{p + 1}-{q + 1}": _finite(
                closedform.two_body_period(config.phases.phase(p, q))
            )
            for p, q in combinations(range(config.n), 2)
        },
    }
    if np.any(config.phases.signs < 0):
        report["system"]["coupling_signs"] = config.phases.signs.astype(int).tolist()
    if config.diagnostics is not None:
        report["setup"] = _setup_summary(config)
    if config.rational is not None:
        report["rational"] = rational_summary(config.rational)
    if config.n == 3 and Measure.TANGLE3 in run.measures:
        report["tangle3_validation"] = tangle3_validation_report(
            run.tangle3_interpretation, seed=run.seed, tolerance=run.tolerances.compare
        )
    if comparison is not None:
        report["comparison"] = comparison.to_dict()
    return report


def graph_summary(
    phases: PhaseMatrix, epsilon_edge: float, pairwise_incommensurate: bool = False
) -> dict[str, Any]:
    graph = build_graph(phases, epsilon_edge)
    verdict = predicts_genuine_entanglement(graph)
    sustained = sustainability(graph, pairwise_incommensurate)
    return {
        "edges": [
            {"pair": f"{p + 1}-{q + 1}", "phi_rad_per_s": phi}
            for p, q, phi in sorted(graph.edges)
        ],
        "connected": verdict.genuine,
        "connectivity": connectivity(graph),
        "genuine": verdict.genuine,
        "witness": verdict.witness.label if verdict.witness else None,
        "minimal_edge_count_met": verdict.minimal_edge_count_met,
        "coupling_signs_balanced": coupling_signs_balanced(phases, epsilon_edge),
        "sustainability": {"status": sustained.status, "reason": sustained.reason},
    }


def rational_summary(rational: RationalPhases) -> dict[str, Any]:
    strict = ghz_condition(rational, require_all_pairs=True)
    relaxed = ghz_condition(rational, require_all_pairs=False)
    try:
        schedule = separability_times(rational)
        separability: dict[str, Any] | None = {
            "first_time_s": schedule.first_time,
            "period_s": schedule.period,
            "cycles_of_base": str(schedule.cycles),
        }
    except QGEMError as exc:
        if exc.kind is not ErrorKind.ALL_ZERO_PHASES:
            raise
        separability = None
    experiment = ghz_experiment(rational)
    return {
        "base_rad_per_s": rational.base,
        "ghz": _ghz_dict(strict),
        "ghz_relaxed": _ghz_dict(relaxed),
        "separability": separability,
        "ghz_experiment": {
            "applicable": experiment.applicable,
            "reason": experiment.reason,
            "t_s": experiment.t,
            "min_iconcurrence": experiment.min_iconcurrence,
            "worst": experiment.worst.label if experiment.worst else None,
        },
    }


def tangle3_validation_report(
    convention: closedform.TangleConvention,
    seed: int = 0,
    draws: int = 20,
    tolerance: float = 1e-9,
) -> dict[str, Any]:
    """Published 3-tangle against the monogamy residual.

    Anchors: a product state (t = 0, residual 0) and the equal-phase GHZ
    point (t = pi / Phi, residual 1). The random draws use phases uniform in
    [0, 5) rad/s and times uniform in [0, 10) s.
    """
    equal = PhaseMatrix.from_pairs(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
    cases: list[tuple[str, PhaseMatrix, float, float | None]] = [
        ("product", equal, 0.0, 0.0),
        ("ghz", equal, math.pi, 1.0),
    ]
    rng = np.random.default_rng(seed)
    for i in range(draws):
        phases = random_phase_matrix(3, rng)
        cases.append((f"random-{i}", phases, float(rng.uniform(0.0, 10.0)), None))

    entries = []
    for name, phases, t, expected in cases:
        result = closedform.three_tangle_published(phases, t, convention, tolerance)
        entry = {
            "case": name,
            "t_s": t,
            "published": result.value,
            "oracle_residual": result.oracle_residual,
            "difference": result.difference,
            "valid": result.valid,
        }
        if expected is not None:
            entry["expected"] = expected
            entry["oracle_matches_anchor"] = (
                abs(result.oracle_residual - expected) < tolerance
            )
        entries.append(entry)

    anchors = [e for e in entries if "expected" in e]
    return {
        "convention": convention.value,
        "tolerance": tolerance,
        "oracle_anchors_pass": all(e["oracle_matches_anchor"] for e in anchors),
        "published_valid": sum(1 for e in entries if e["valid"]),
        "cases": len(entries),
        "max_difference": max(e["difference"] for e in entries),
        "certified": all(e["valid"] for e in entries),
        "entries": entries,
    }


def _setup_summary(config: LoadedConfig) -> dict[str, Any]:
    diagnostics = config.diagnostics
    closest = None
    if diagnostics.closest is not None:
        p, q, j_p, j_q = diagnostics.closest
        closest = f"masses {p + 1}-{q + 1} branches {j_p}{j_q}"
    return {
        "min_pair_distance_m": diagnostics.min_pair_distance,
        "min_distance_m": diagnostics.min_distance,
        "closest": closest,
    }


def _ghz_dict(condition: GHZCondition | None) -> dict[str, Any] | None:
    if condition is None:
        return None
    return {
        "phi_rad_per_s": condition.phi,
        "unit_of_base": str(condition.unit),
        "first_time_s": condition.first_time,
        "period_s": condition.period,
        "times": condition.describe(),
    }


def _describe(context: dict[str, Any]) -> str:
    return " ".join(f"{key}={value}" for key, value in context.items())


def _finite(value: float) -> float | None:
    return value if math.isfinite(value) else None
