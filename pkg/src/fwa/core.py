"""Shared domain types: configuration, RNG stream, fireworks and swarm state.

Every objective evaluation made during a run goes through
:func:`consume_evaluation` / :func:`consume_batch`, which enforce the budget
and record who spent each evaluation in the run's :class:`EvaluationLedger`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Set

import numpy as np

from .objectives import ObjectiveSpec, evaluate_batch

__all__ = [
    "AlgorithmConfig",
    "Attribution",
    "BudgetExhausted",
    "EvaluationLedger",
    "Firework",
    "RngStream",
    "SwarmState",
    "consume_batch",
    "consume_evaluation",
    "consume_partitioned",
    "init_swarm",
    "run_seed",
]

_UINT64 = 0xFFFFFFFFFFFFFFFF

AFWA_MODES = ("literal", "minimal")
AMPLITUDE_STRATEGIES = ("dynamic", "adaptive")
OFFSET_MODES = ("per_dimension", "shared")


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation would push ``evals_used`` past ``e_max``."""


class RngStream:
    """Seeded random stream backed by numpy's PCG64 bit generator.

    PCG64 is a fixed, documented algorithm, so a given seed yields the same
    raw sequence on every platform.  Seeds are reduced modulo 2**64.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _UINT64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low, high, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def integers(self, n: int, size=None):
        """Uniform integers from ``range(n)``."""
        return self._gen.integers(0, n, size)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        return self._gen.choice(n, size=k, replace=False)


def run_seed(seed_base: int, run_index: int) -> int:
    """Seed of the ``run_index``-th run of a campaign cell."""
    return (int(seed_base) + int(run_index)) & _UINT64


@dataclass(frozen=True)
class AlgorithmConfig:
    """Constants shared by the fireworks-algorithm variants.

    Fields left as ``None`` are derived from the problem by
    :meth:`for_problem`: ``amp_constant = 0.2 * range``,
    ``a_init = 0.02 * range``, ``a_final = 0.001 * range`` and
    ``e_max = 10000 * dim``, where ``range`` is the infinity norm of the box
    extent.
    """

    n_fireworks: int = 5
    total_sparks: int = 150
    amp_constant: Optional[float] = None
    c_a: float = 1.2
    c_r: float = 0.9
    lambda_smooth: float = 1.3
    tau_factor: float = 10.0
    a_init: Optional[float] = None
    a_final: Optional[float] = None
    m_gaussian: int = 5
    spark_frac_min: float = 0.04
    spark_frac_max: float = 0.8
    e_max: Optional[int] = None
    gaussian_enabled: bool = True
    afwa_mode: str = "minimal"
    mfwa_strategy: str = "adaptive"
    offset_mode: str = "per_dimension"

    def for_problem(self, spec: ObjectiveSpec) -> "AlgorithmConfig":
        """Fill derived defaults for ``spec`` and validate the result."""
        rng = spec.search_range
        cfg = dataclasses.replace(
            self,
            amp_constant=0.2 * rng if self.amp_constant is None else self.amp_constant,
            a_init=0.02 * rng if self.a_init is None else self.a_init,
            a_final=0.001 * rng if self.a_final is None else self.a_final,
            e_max=10_000 * spec.dim if self.e_max is None else self.e_max,
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        errors = []
        for name in ("n_fireworks", "total_sparks", "c_a", "c_r", "lambda_smooth", "tau_factor", "spark_frac_min"):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be positive")
        if self.m_gaussian < 0:
            errors.append("m_gaussian must be non-negative")
        for name in ("amp_constant", "a_init", "a_final", "e_max"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                errors.append(f"{name} must be positive")
        if not self.c_r < 1 < self.c_a:
            errors.append("need c_r < 1 < c_a")
        if not self.spark_frac_min < self.spark_frac_max <= 1:
            errors.append("need spark_frac_min < spark_frac_max <= 1")
        if self.a_init is not None and self.a_final is not None and not self.a_final < self.a_init:
            errors.append("need a_final < a_init")
        if self.afwa_mode not in AFWA_MODES:
            errors.append(f"afwa_mode must be one of {AFWA_MODES}")
        if self.mfwa_strategy not in AMPLITUDE_STRATEGIES:
            errors.append(f"mfwa_strategy must be one of {AMPLITUDE_STRATEGIES}")
        if self.offset_mode not in OFFSET_MODES:
            errors.append(f"offset_mode must be one of {OFFSET_MODES}")
        if errors:
            raise ValueError("invalid AlgorithmConfig: " + "; ".join(errors))


@dataclass
class Firework:
    id: int
    position: np.ndarray
    fitness: float
    amplitude: float
    parent_id: Optional[int] = None
    age: int = 0


class Attribution(NamedTuple):
    """Who spent an evaluation: the exploding firework and its role at the time."""

    firework_id: int
    kind: str  # "explosion", "gaussian" or "reinit"
    is_cf: bool = False
    is_gcf: bool = False


@dataclass
class EvaluationLedger:
    """Per-iteration record of attributed evaluations.

    Initialization evaluations are counted in ``init_evals`` and carry no
    attribution; every later evaluation appears in ``entries``.
    """

    init_evals: int = 0
    entries: List[tuple] = field(default_factory=list)  # (iteration, Attribution, count)

    def record(self, iteration: int, tag: Attribution, count: int) -> None:
        if count:
            self.entries.append((iteration, tag, int(count)))

    def total(self, *, kind: Optional[str] = None, cf: Optional[bool] = None, gcf: Optional[bool] = None) -> int:
        n = 0
        for _, tag, count in self.entries:
            if kind is not None and tag.kind != kind:
                continue
            if cf is not None and tag.is_cf != cf:
                continue
            if gcf is not None and tag.is_gcf != gcf:
                continue
            n += count
        return n

    @property
    def attributed(self) -> int:
        return sum(count for _, _, count in self.entries)


@dataclass
class SwarmState:
    fireworks: List[Firework]
    rng: RngStream
    e_max: int
    cf_index: int = 0
    gcf_members: Set[int] = field(default_factory=set)
    evals_used: int = 0
    iteration: int = 0
    ledger: EvaluationLedger = field(default_factory=EvaluationLedger)
    next_id: int = 0

    def new_id(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def refresh_cf(self) -> int:
        """Recompute ``cf_index``; equal minima resolve to the lowest id."""
        best = min(range(len(self.fireworks)), key=lambda i: (self.fireworks[i].fitness, self.fireworks[i].id))
        self.cf_index = best
        return best

    @property
    def cf(self) -> Firework:
        return self.fireworks[self.cf_index]

    @property
    def remaining(self) -> int:
        return self.e_max - self.evals_used

    def positions(self) -> np.ndarray:
        return np.array([fw.position for fw in self.fireworks])

    def fitnesses(self) -> np.ndarray:
        return np.array([fw.fitness for fw in self.fireworks])


def consume_batch(state: SwarmState, spec: ObjectiveSpec, X, tag: Optional[Attribution]) -> np.ndarray:
    """Evaluate the rows of ``X`` against the budget, attributing them to ``tag``.

    ``tag=None`` marks initialization evaluations.  The whole batch is
    refused (nothing evaluated) if it would exceed ``e_max``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if state.evals_used + n > state.e_max:
        raise BudgetExhausted(
            f"{n} evaluation(s) requested with {state.remaining} of {state.e_max} remaining"
        )
    values = evaluate_batch(spec, X) if n else np.empty(0)
    state.evals_used += n
    if tag is None:
        state.ledger.init_evals += n
    else:
        state.ledger.record(state.iteration, tag, n)
    return values


def consume_partitioned(state: SwarmState, spec: ObjectiveSpec, X, tags, counts) -> np.ndarray:
    """Evaluate consecutive row blocks of ``X``; block ``k`` has ``counts[k]`` rows and tag ``tags[k]``."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if int(np.sum(counts)) != n:
        raise ValueError("block counts do not cover the batch")
    if state.evals_used + n > state.e_max:
        raise BudgetExhausted(
            f"{n} evaluation(s) requested with {state.remaining} of {state.e_max} remaining"
        )
    values = evaluate_batch(spec, X) if n else np.empty(0)
    state.evals_used += n
    for tag, count in zip(tags, counts):
        state.ledger.record(state.iteration, tag, count)
    return values


def consume_evaluation(state: SwarmState, spec: ObjectiveSpec, x, tag: Optional[Attribution] = None) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(consume_batch(state, spec, x[None, :], tag)[0])


def init_swarm(config: AlgorithmConfig, spec: ObjectiveSpec, seed: int) -> SwarmState:
    """Place ``n_fireworks`` uniformly in the box and evaluate them.

    Every amplitude starts at the search range; the GCF set starts as the
    singleton ``{CF}``.
    """
    config = config.for_problem(spec) if config.e_max is None or config.amp_constant is None else config
    config.validate()
    n = config.n_fireworks
    if config.e_max < n:
        raise ValueError(f"e_max={config.e_max} cannot fund {n} initial evaluations")
    rng = RngStream(seed)
    state = SwarmState(fireworks=[], rng=rng, e_max=int(config.e_max))
    positions = rng.uniform(spec.lower, spec.upper, size=(n, spec.dim))
    # uniform() is half-open on paper but can round up to the upper bound
    positions = np.clip(positions, spec.lower, spec.upper)
    fitness = consume_batch(state, spec, positions, None)
    amplitude = spec.search_range
    for k in range(n):
        state.fireworks.append(Firework(state.new_id(), positions[k].copy(), float(fitness[k]), amplitude))
    state.refresh_cf()
    state.gcf_members = {state.cf.id}
    return state
