"""Joint bandwidth, compute, power and subcarrier allocation for hierarchical federated learning."""

from .estimator import ResourceAllocator
from .model import (
    Allocation,
    CostBreakdown,
    InfeasibleAllocationError,
    InvalidArgumentError,
    Organization,
    Scenario,
    Sensor,
    SystemParams,
    evaluate,
    packet_error,
    sensor_rate,
    uplink_rate,
)
from .serialization import load_scenario, save_scenario
from .sim import GeneratorConfig, SweepParam, SweepSpec, TrialRecord, emit, generate_scenario, run_sweep
from .solver import ALL_SCHEMES, Scheme, SolveResult, SolverOptions, joint_solve, solve

__version__ = "0.1.0"

__all__ = [
    "ALL_SCHEMES", "Allocation", "CostBreakdown", "GeneratorConfig", "InfeasibleAllocationError",
    "InvalidArgumentError", "Organization", "ResourceAllocator", "Scenario", "Scheme", "Sensor",
    "SolveResult", "SolverOptions", "SweepParam", "SweepSpec", "SystemParams", "TrialRecord",
    "emit", "evaluate", "generate_scenario", "joint_solve", "load_scenario", "packet_error",
    "run_sweep", "save_scenario", "sensor_rate", "solve", "uplink_rate",
]
