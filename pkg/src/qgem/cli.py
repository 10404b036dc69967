"""qgem CLI - sweeps, engine comparison and config diagnostics.

Commands:
    qgem run --config <path> [--engine closed|oracle|both] [--measures a,b]
             [--bipartitions all|one-vs-rest|"125|346,..."] [--t-start S]
             [--t-end S] [--steps N] [--out PATH] [--report PATH] [--compare]
             [--workers N] [--seed N]
    qgem doctor --config <path>
    qgem template

Exit codes: 0 success, 1 config/validation error, 2 compute error,
3 engine comparison failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

from qgem.config import ConfigError, LoadedConfig, load_config
from qgem.errors import QGEMError, is_implementation_fault
from qgem.sweep import SweepRunner, build_report, graph_summary, write_csv
from qgem.telemetry import (
    LocalFileReportStore,
    StreamReportStore,
    log_report_written,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_COMPUTE = 2
EXIT_COMPARE_FAILED = 3


def check_config(config_path: str) -> tuple[list[str], list[str], list[str]]:
    """Validate a config file and describe the system it defines.

    Returns:
        (errors, warnings, notes) - errors are blocking; the rest is informational.
    """
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        return [f"Config invalid: {exc}"], [], []
    except Exception as exc:
        return [f"Unexpected error loading config: {exc}"], [], []

    errors: list[str] = []
    warnings: list[str] = []
    notes: list[str] = [f"Mode {config.mode.value}, N = {config.n}"]
    run = config.run

    if "oracle" in run.engines and config.n > run.max_qubits:
        errors.append(
            f"N = {config.n} exceeds the state-vector cap of {run.max_qubits} "
            "qubits; use --engine closed"
        )

    if config.diagnostics is not None and config.diagnostics.min_distance is not None:
        notes.append(
            f"Closest branch approach {config.diagnostics.min_distance:.6g} m "
            f"(threshold {config.diagnostics.min_pair_distance:.6g} m)"
        )

    graph = graph_summary(
        config.phases, run.tolerances.epsilon_edge, config.pairwise_incommensurate
    )
    notes.append(
        f"Entanglement graph: {len(graph['edges'])} edge(s), "
        f"connectivity {graph['connectivity']}"
    )
    if graph["genuine"]:
        notes.append("Genuine N-body entanglement predicted (graph connected)")
    else:
        warnings.append(
            "Graph is disconnected; bipartition "
            f"{graph['witness']} never entangles"
        )
    if not graph["coupling_signs_balanced"]:
        warnings.append(
            "Coupling signs are not switching-balanced; closed forms use the "
            "signed couplings"
        )
    notes.append(f"Sustainability: {graph['sustainability']['status']}")

    if any(m.value == "tangle3" for m in run.measures):
        warnings.append(
            "tangle3 from the closed engine is the published formula and is "
            "not certified; the oracle residual is authoritative"
        )
    return errors, warnings, notes


def get_template() -> str:
    """Return the contents of the bundled qgem.example.json."""
    template_path = Path(__file__).parent / "templates" / "qgem.example.json"
    return template_path.read_text(encoding="utf-8")


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "engine": args.engine,
        "measures": args.measures,
        "bipartitions": args.bipartitions,
        "t_start": args.t_start,
        "t_end": args.t_end,
        "steps": args.steps,
        "out": args.out,
        "report": args.report,
        "workers": args.workers,
        "seed": args.seed,
        "compare": True if args.compare else None,
    }


def _print_compute_error(exc: QGEMError) -> None:
    print(f"Compute error [{exc.kind.value}]: {exc}", file=sys.stderr)
    if exc.context:
        where = ", ".join(f"{key}={value}" for key, value in exc.context.items())
        print(f"  at {where}", file=sys.stderr)
    if is_implementation_fault(exc):
        print(
            "  This indicates a numerical fault in qgem, not a bad input.",
            file=sys.stderr,
        )


def _write_outputs(config: LoadedConfig, rows, comparison) -> None:
    run = config.run
    if run.out in (None, "-"):
        write_csv(rows, sys.stdout)
        sys.stdout.flush()
    else:
        out_path = Path(run.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, fh)

    # the report shares stdout only when the CSV went to a file
    if run.report == "-" or (run.report is None and run.out not in (None, "-")):
        store = StreamReportStore(sys.stdout)
    elif run.report is not None:
        store = LocalFileReportStore(run.report)
    else:
        if comparison is not None:
            verdict = "passed" if comparison.passed else "FAILED"
            print(
                f"Engine comparison {verdict}: max |diff| "
                f"{comparison.max_abs_diff:.3e}",
                file=sys.stderr,
            )
        return
    destination = store.write(build_report(config, rows, comparison))
    log_report_written(destination)


def _run_sweep(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"Config invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if config.run.compare and config.run.engine != "both":
        config = config.with_run(engine="both")

    runner = SweepRunner(config)
    try:
        rows = runner.run()
    except QGEMError as exc:
        _print_compute_error(exc)
        return EXIT_COMPUTE

    comparison = runner.compare(rows) if len(config.run.engines) == 2 else None
    _write_outputs(config, rows, comparison)

    if config.run.compare and comparison is not None and not comparison.passed:
        worst = comparison.worst
        print(
            f"Engine comparison failed: max |diff| {comparison.max_abs_diff:.3e} "
            f"in {worst.measure.value} {worst.worst_target} at t={worst.worst_t}",
            file=sys.stderr,
        )
        return EXIT_COMPARE_FAILED
    return EXIT_OK


def _run_doctor(args: argparse.Namespace) -> int:
    print("qgem doctor")
    print(f"Config: {args.config}")
    print()

    errors, warnings, notes = check_config(args.config)

    for note in notes:
        print(f"  -  {note}")
    for warning in warnings:
        print(f"  !  {warning}")
    for error in errors:
        print(f"  x  {error}", file=sys.stderr)

    if not errors and not warnings:
        print("  OK  All checks passed")
    elif not errors:
        print(f"\n  OK  {len(warnings)} warning(s) - no blocking errors")

    if errors:
        print(f"\nStatus: {len(errors)} error(s) found", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _run_template(_args: argparse.Namespace) -> int:
    print(get_template(), end="")
    return EXIT_OK


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="qgem",
        description="Gravitationally mediated multipartite entanglement toolkit",
    )
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="Log run events to stderr"
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True

    run_parser = subparsers.add_parser(
        "run", help="Run a time sweep and write CSV rows (plus a JSON report)"
    )
    run_parser.add_argument("--config", required=True, metavar="PATH")
    run_parser.add_argument(
        "--engine", choices=("closed", "oracle", "both"), default=None
    )
    run_parser.add_argument(
        "--measures",
        metavar="LIST",
        help="Comma-separated: two_body,iconcurrence,q_k,tangle3,pairwise",
    )
    run_parser.add_argument(
        "--bipartitions",
        metavar="SEL",
        help='all, one-vs-rest, or labels such as "125|346,124|356"',
    )
    run_parser.add_argument("--t-start", type=float, metavar="S")
    run_parser.add_argument("--t-end", type=float, metavar="S")
    run_parser.add_argument("--steps", type=int, metavar="N")
    run_parser.add_argument(
        "--out", metavar="PATH", help="CSV destination (default: stdout, '-')"
    )
    run_parser.add_argument(
        "--report", metavar="PATH", help="JSON report destination ('-' for stdout)"
    )
    run_parser.add_argument(
        "--compare",
        action="store_true",
        help="Run both engines and exit 3 if they disagree",
    )
    run_parser.add_argument("--workers", type=int, metavar="N")
    run_parser.add_argument("--seed", type=int, metavar="N")
    run_parser.set_defaults(func=_run_sweep)

    doctor_parser = subparsers.add_parser(
        "doctor",
        help="Validate config and setup, print graph predicates; exit 0 if healthy",
    )
    doctor_parser.add_argument(
        "--config", required=True, metavar="PATH", help="Path to config JSON"
    )
    doctor_parser.set_defaults(func=_run_doctor)

    template_parser = subparsers.add_parser(
        "template", help="Print example config JSON to stdout"
    )
    template_parser.set_defaults(func=_run_template)

    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(
            level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s"
        )
    sys.exit(args.func(args))


if __name__ == "__main__":
    main()
