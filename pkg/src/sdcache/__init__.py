"""Joint sensing-data caching and request allocation simulator.

Library layout:

- :mod:`sdcache.types` / :mod:`sdcache.slot` / :mod:`sdcache.models`: domain
  objects and the value/energy/delay/constraint evaluators.
- :mod:`sdcache.lyapunov`: virtual queue and the online per-slot loop.
- :mod:`sdcache.exact`: big-M linearization, branch and bound, enumeration
  oracle.
- :mod:`sdcache.bqpso`: binary quantum-behaved particle swarm solver.
- :mod:`sdcache.baselines`: greedy and random FIFO reference policies.
- :mod:`sdcache.scenario`: seeded world generation.
- :mod:`sdcache.harness` / :mod:`sdcache.metrics` / :mod:`sdcache.cli`:
  experiment orchestration, CSV traces and the command line.
"""
from .bqpso import BqpsoConfig, allocate_y, fitness
from .exact import ExactSolution, enumerate_oracle, linearize, solve_bb
from .harness import ExperimentSpec, desk_config, make_solver, paper_config, run_experiment, sweep
from .lyapunov import (
    LyapunovConfig,
    VirtualQueueState,
    check_drift_bound,
    dpp_objective,
    ocda_run,
    update_queue,
)
from .metrics import MetricsTrace, SlotRecord
from .scenario import CONGESTION_LEVELS, Scenario, ScenarioConfig, generate_scenario
from .slot import SlotInstance
from .types import (
    AllocationDecision,
    CachingDecision,
    ConstraintReport,
    DomainError,
    Topology,
)

__all__ = [
    "AllocationDecision",
    "BqpsoConfig",
    "CachingDecision",
    "CONGESTION_LEVELS",
    "ConstraintReport",
    "DomainError",
    "ExactSolution",
    "ExperimentSpec",
    "LyapunovConfig",
    "MetricsTrace",
    "Scenario",
    "ScenarioConfig",
    "SlotInstance",
    "SlotRecord",
    "Topology",
    "VirtualQueueState",
    "allocate_y",
    "check_drift_bound",
    "desk_config",
    "dpp_objective",
    "enumerate_oracle",
    "fitness",
    "generate_scenario",
    "linearize",
    "make_solver",
    "ocda_run",
    "paper_config",
    "run_experiment",
    "solve_bb",
    "sweep",
    "update_queue",
]

__version__ = "0.1.0"
