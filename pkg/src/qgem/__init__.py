"""
qgem - gravitationally mediated multipartite entanglement toolkit.

Closed-form entanglement measures for N superposed masses, a state-vector
oracle that checks them, and entanglement-graph analysis.
"""

__version__ = "0.1.0"

# Core API
from qgem.bipartition import Bipartition, all_bipartitions, one_vs_rest
from qgem.config import ConfigError, LoadedConfig, RunConfig, load_config
from qgem.errors import ErrorKind, QGEMError
from qgem.geometry import (
    MassSpec,
    PairPhaseTable,
    PhaseMatrix,
    PhysicalConstants,
    SystemSetup,
    entangling_phases,
    phase_table,
)
from qgem.graphanalysis import EntanglementGraph, RationalPhases, build_graph
from qgem.results import EntanglementValue, Measure
from qgem.sweep import SweepRunner, compare_engines, run_sweep

# Telemetry hooks (optional)
from qgem.telemetry import (
    EventSink,
    LocalFileReportStore,
    ReportStore,
    RunEvent,
    StreamReportStore,
)

__all__ = [
    "__version__",
    "Bipartition",
    "all_bipartitions",
    "one_vs_rest",
    "load_config",
    "LoadedConfig",
    "RunConfig",
    "ConfigError",
    "QGEMError",
    "ErrorKind",
    "MassSpec",
    "SystemSetup",
    "PhysicalConstants",
    "PairPhaseTable",
    "PhaseMatrix",
    "phase_table",
    "entangling_phases",
    "EntanglementGraph",
    "RationalPhases",
    "build_graph",
    "Measure",
    "EntanglementValue",
    "SweepRunner",
    "run_sweep",
    "compare_engines",
    "EventSink",
    "RunEvent",
    "ReportStore",
    "LocalFileReportStore",
    "StreamReportStore",
]
