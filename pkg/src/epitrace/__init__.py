"""Agent-based epidemic simulator with privacy-preserving test allocation."""

from .config import SimConfig, load_config, save_config
from .contacts import Contact, ContactGraph, ContactSet, build_graph, sample_day
from .devices import DeviceRecord, DeviceStore, LogMirror, TokenRouter
from .epidemic import (
    ContagionParams,
    HealthState,
    Individual,
    PopulationLedger,
    contagion_step,
    delta,
)
from .harness import CSV_HEADER, DayMetrics, SimulationResult, run_simulation
from .policies import PolicyDecision, SwabTest, policy_ts, policy_tsdc, run_test
from .suite import run_experiment_suite
from .tracing import (
    InfectionScore,
    MessageBus,
    PrevalenceEstimate,
    TrajectoryRequest,
    run_daily_ppto,
    run_daily_ppto_bulk,
    select_top_k,
)

__all__ = [
    "CSV_HEADER",
    "Contact",
    "ContactGraph",
    "ContactSet",
    "ContagionParams",
    "DayMetrics",
    "DeviceRecord",
    "DeviceStore",
    "HealthState",
    "Individual",
    "InfectionScore",
    "LogMirror",
    "MessageBus",
    "PolicyDecision",
    "PopulationLedger",
    "PrevalenceEstimate",
    "SimConfig",
    "SimulationResult",
    "SwabTest",
    "TokenRouter",
    "TrajectoryRequest",
    "build_graph",
    "contagion_step",
    "delta",
    "load_config",
    "policy_ts",
    "policy_tsdc",
    "run_daily_ppto",
    "run_daily_ppto_bulk",
    "run_simulation",
    "run_experiment_suite",
    "run_test",
    "sample_day",
    "save_config",
    "select_top_k",
]
