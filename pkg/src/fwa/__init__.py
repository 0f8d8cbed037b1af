"""Fireworks-algorithm family (EFWA, dynFWA, AFWA, MFWA, CoFFWA) and a benchmark harness."""

from .algorithms import (
    ALGORITHMS,
    RunResult,
    algorithm_names,
    run_afwa,
    run_algorithm,
    run_coffwa,
    run_dynfwa,
    run_efwa,
    run_mfwa,
)
from .core import AlgorithmConfig, BudgetExhausted, Firework, RngStream, SwarmState, init_swarm
from .objectives import ObjectiveSpec, evaluate_objective, make_objective, make_suite

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "AlgorithmConfig",
    "BudgetExhausted",
    "Firework",
    "ObjectiveSpec",
    "RngStream",
    "RunResult",
    "SwarmState",
    "algorithm_names",
    "evaluate_objective",
    "init_swarm",
    "make_objective",
    "make_suite",
    "run_afwa",
    "run_algorithm",
    "run_coffwa",
    "run_dynfwa",
    "run_efwa",
    "run_mfwa",
]
