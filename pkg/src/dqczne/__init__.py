"""Distributed quantum circuits with zero-noise extrapolation: partitioning, teleportation lowering, noisy simulation and experiment sweeps."""

from .circuit import Circuit, Gate, adjoint, decompose_toffoli, depth, generate_benchmark
from .distribute import DistributedCircuit, distributed_stats, lower, teleport_template
from .harness import ExperimentConfig, MetricsRecord, run_experiment, summarize, sweep
from .partition import Assignment, InteractionGraph, build_interaction_graph, modularity, partition
from .qasm import QasmError, check_qasm, emit_qasm, parse_qasm
from .sim import NoiseModel, ZObservable, exact_distribution, simulate_exact_expectation, simulate_shots
from .zne import ScaleSchedule, extrapolate_linear, fold_global, fold_local, mitigate

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "Circuit",
    "DistributedCircuit",
    "ExperimentConfig",
    "Gate",
    "InteractionGraph",
    "MetricsRecord",
    "NoiseModel",
    "QasmError",
    "ScaleSchedule",
    "ZObservable",
    "adjoint",
    "build_interaction_graph",
    "check_qasm",
    "decompose_toffoli",
    "depth",
    "distributed_stats",
    "emit_qasm",
    "exact_distribution",
    "extrapolate_linear",
    "fold_global",
    "fold_local",
    "generate_benchmark",
    "lower",
    "mitigate",
    "modularity",
    "parse_qasm",
    "partition",
    "run_experiment",
    "simulate_exact_expectation",
    "simulate_shots",
    "summarize",
    "sweep",
    "teleport_template",
]
