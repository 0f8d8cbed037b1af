"""Full optimization runs for EFWA, dynFWA, AFWA, MFWA and CoFFWA.

EFWA, dynFWA and AFWA share one loop built around elitism-random selection
and differ only in how the core firework's amplitude is set.  CoFFWA
replaces that selection with per-firework independent selection plus the
crowdness-avoiding reinitialization.  MFWA is the single-firework
reduction.

Every run accepts an ``on_iteration`` callback that receives the live
:class:`~fwa.core.SwarmState` after each completed iteration.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .amplitude import afwa_update, apply_meacs, clamp_amplitude, meacs_min_amplitude
from .core import (
    AlgorithmConfig,
    Attribution,
    BudgetExhausted,
    EvaluationLedger,
    Firework,
    SwarmState,
    consume_partitioned,
    init_swarm,
)
from .objectives import ObjectiveSpec
from .operators import SparkBatch, compute_amplitudes, compute_spark_counts, explosion_sparks, gaussian_sparks
from .selection import crowdness_avoid, elitism_random_select, independent_select
from .telemetry import AmplitudeRecord, ImprovementEvent, record_significant_improvement, update_gcf_set

__all__ = [
    "ALGORITHMS",
    "RunResult",
    "algorithm_names",
    "run_afwa",
    "run_algorithm",
    "run_coffwa",
    "run_dynfwa",
    "run_efwa",
    "run_mfwa",
]

IterationHook = Optional[Callable[[SwarmState], None]]


@dataclass
class RunResult:
    algorithm: str
    best_position: np.ndarray
    best_fitness: float
    trace: List[Tuple[int, float]]
    improvement_events: List[ImprovementEvent]
    amplitude_trace: List[AmplitudeRecord]
    wall_time: float
    seed: int
    evals_used: int = 0
    e_max: int = 0
    iterations: int = 0
    ledger: EvaluationLedger = field(default_factory=EvaluationLedger)
    spark_counts: Dict[str, int] = field(default_factory=dict)
    config: Optional[AlgorithmConfig] = None
    function: str = ""
    dim: int = 0

    @property
    def initial_best(self) -> float:
        return self.trace[0][1]


def _fit_budget(counts: np.ndarray, remaining: int) -> np.ndarray:
    """Truncate spark counts, in firework order, so their sum fits ``remaining``."""
    if counts.sum() <= remaining:
        return counts
    before = np.cumsum(counts) - counts
    return np.clip(remaining - before, 0, counts)


def _explode(state: SwarmState, spec: ObjectiveSpec, cfg: AlgorithmConfig, amps, counts, owners_gcf):
    """Generate and evaluate every firework's explosion sparks for this iteration."""
    fws = state.fireworks
    pos = state.positions()
    owners = np.repeat(np.arange(len(fws)), counts)
    sparks = explosion_sparks(
        pos[owners], amps[owners], spec.lower, spec.upper, state.rng,
        shared_offset=cfg.offset_mode == "shared",
    )
    cf_id = state.cf.id
    tags = [Attribution(fw.id, "explosion", fw.id == cf_id, owners_gcf(fw.id)) for fw in fws]
    values = consume_partitioned(state, spec, sparks, tags, counts)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    batches = [
        SparkBatch(fw.id, sparks[bounds[k]:bounds[k + 1]], values[bounds[k]:bounds[k + 1]], "explosion")
        for k, fw in enumerate(fws)
    ]
    return sparks, values, owners, batches


def _best_spark(values, owners, fws):
    if len(values) == 0:
        return np.inf, None
    b = int(np.argmin(values))
    return float(values[b]), fws[owners[b]].id


def _run_erp(name: str, config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, strategy: str, on_iteration: IterationHook) -> RunResult:
    cfg = config.for_problem(spec)
    start = time.perf_counter()
    state = init_swarm(cfg, spec, seed)
    rng = state.rng
    search_range = spec.search_range
    a_cf = search_range
    prev_cf_amp = None
    prev_improved = False
    events: List[ImprovementEvent] = []
    amp_trace: List[AmplitudeRecord] = []
    spark_counts = {"explosion": 0, "gaussian": 0}
    trace = [(state.evals_used, state.cf.fitness)]

    while state.remaining > 0:
        fws = state.fireworks
        n = len(fws)
        fit = state.fitnesses()
        cf_i = state.cf_index
        cf = fws[cf_i]

        amps = compute_amplitudes(fit, cfg.amp_constant)
        if strategy == "meacs":
            amps = apply_meacs(amps, meacs_min_amplitude(state.evals_used, cfg.e_max, cfg.a_init, cfg.a_final))
        else:
            amps[cf_i] = a_cf
        for k, fw in enumerate(fws):
            fw.amplitude = float(amps[k])

        counts = _fit_budget(compute_spark_counts(fit, cfg.total_sparks, cfg.spark_frac_min, cfg.spark_frac_max), state.remaining)
        gcf = state.gcf_members
        sparks, values, owners, batches = _explode(state, spec, cfg, amps, counts, gcf.__contains__)
        spark_counts["explosion"] += len(values)
        record_significant_improvement(batches, state, events)
        xb_f, xb_parent = _best_spark(values, owners, fws)
        improved = xb_f < cf.fitness

        g_pos = np.empty((0, spec.dim))
        g_val = np.empty(0)
        g_owner = np.empty(0, dtype=np.int64)
        if cfg.gaussian_enabled and cfg.m_gaussian and state.remaining > 0:
            m = min(cfg.m_gaussian, state.remaining)
            g_owner = np.sort(rng.integers(n, m))
            pos = state.positions()
            g_pos = gaussian_sparks(pos[g_owner], cf.position, spec.lower, spec.upper, rng)
            g_counts = np.bincount(g_owner, minlength=n)
            tags = [Attribution(fw.id, "gaussian", k == cf_i, fw.id in gcf) for k, fw in enumerate(fws)]
            g_val = consume_partitioned(state, spec, g_pos, tags, g_counts)
            spark_counts["gaussian"] += m

        # core-firework amplitude for the next iteration
        if strategy == "meacs":
            if prev_cf_amp is not None:
                amp_trace.append(AmplitudeRecord(state.iteration, prev_cf_amp, float(amps[cf_i]), prev_improved))
            prev_cf_amp, prev_improved = float(amps[cf_i]), improved
        else:
            own = owners == cf_i
            if strategy == "dynamic":
                raw = a_cf * (cfg.c_a if improved else cfg.c_r)
                flag = improved
            elif own.any():
                cf_vals = values[own]
                cf_sparks = sparks[own]
                k = int(np.argmin(cf_vals))
                flag = bool(cf_vals[k] < cf.fitness)
                best_pos = cf_sparks[k] if flag else cf.position
                raw = afwa_update(a_cf, cf.fitness, cf_sparks, cf_vals, best_pos, cfg.lambda_smooth, mode=cfg.afwa_mode)
            else:
                raw, flag = None, improved
            if raw is not None:
                new_amp, clamped = clamp_amplitude(raw, search_range)
                amp_trace.append(AmplitudeRecord(state.iteration, a_cf, new_amp, flag, clamped))
                a_cf = new_amp

        # elitism-random selection over fireworks and all sparks
        cand_pos = np.vstack((state.positions(), sparks, g_pos))
        cand_val = np.concatenate((fit, values, g_val))
        ids = np.array([fw.id for fw in fws])
        cand_parent = np.concatenate((ids, ids[owners], ids[g_owner]))
        chosen = elitism_random_select(cand_val, n, rng)
        amp_of = {fw.id: fw.amplitude for fw in fws}
        selected, born = [], set()
        for j in chosen:
            if j < n:
                old = fws[j]
                selected.append(Firework(old.id, old.position, old.fitness, old.amplitude, old.parent_id, old.age + 1))
            else:
                new_id = state.new_id()
                born.add(new_id)
                selected.append(Firework(new_id, cand_pos[j].copy(), float(cand_val[j]), amp_of[int(cand_parent[j])], int(cand_parent[j]), 0))
        state.gcf_members = update_gcf_set(cf.id, cf.fitness, gcf, xb_f, xb_parent, selected, born)
        state.fireworks = selected
        state.refresh_cf()
        state.iteration += 1
        trace.append((state.evals_used, min(trace[-1][1], state.cf.fitness)))
        if on_iteration is not None:
            on_iteration(state)

    return _result(name, cfg, spec, seed, state, trace, events, amp_trace, spark_counts, start)


def _result(name, cfg, spec, seed, state, trace, events, amp_trace, spark_counts, start) -> RunResult:
    wall = time.perf_counter() - start
    best = state.cf
    return RunResult(
        algorithm=name,
        best_position=best.position.copy(),
        best_fitness=float(best.fitness),
        trace=trace,
        improvement_events=events,
        amplitude_trace=amp_trace,
        wall_time=wall,
        seed=int(seed),
        evals_used=state.evals_used,
        e_max=state.e_max,
        iterations=state.iteration,
        ledger=state.ledger,
        spark_counts=spark_counts,
        config=cfg,
        function=spec.name,
        dim=spec.dim,
    )


def run_efwa(config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, on_iteration: IterationHook = None) -> RunResult:
    """EFWA: fitness-shared amplitudes floored by the MEACS schedule."""
    name = "efwa" if config.gaussian_enabled else "efwa-ng"
    return _run_erp(name, config, spec, seed, "meacs", on_iteration)


def run_dynfwa(config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, on_iteration: IterationHook = None) -> RunResult:
    """dynFWA: the core firework's amplitude grows by ``c_a`` after an improvement, shrinks by ``c_r`` otherwise."""
    name = "dynfwa" if config.gaussian_enabled else "dynfwa-ng"
    return _run_erp(name, config, spec, seed, "dynamic", on_iteration)


def run_afwa(config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, on_iteration: IterationHook = None) -> RunResult:
    """AFWA: the core firework's amplitude follows the adaptive infinity-norm rule."""
    name = "afwa" if config.gaussian_enabled else "afwa-ng"
    return _run_erp(name, config, spec, seed, "adaptive", on_iteration)


def run_mfwa(config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, on_iteration: IterationHook = None) -> RunResult:
    """Single firework, all sparks to it, greedy replacement (no Gaussian sparks)."""
    cfg = dataclasses.replace(config, n_fireworks=1, gaussian_enabled=False).for_problem(spec)
    start = time.perf_counter()
    state = init_swarm(cfg, spec, seed)
    search_range = spec.search_range
    amp = search_range
    events: List[ImprovementEvent] = []
    amp_trace: List[AmplitudeRecord] = []
    spark_counts = {"explosion": 0, "gaussian": 0}
    trace = [(state.evals_used, state.cf.fitness)]

    while state.remaining > 0:
        fw = state.fireworks[0]
        fw.amplitude = amp
        m = min(cfg.total_sparks, state.remaining)
        counts = np.array([m])
        sparks, values, owners, batches = _explode(state, spec, cfg, np.array([amp]), counts, lambda _id: True)
        spark_counts["explosion"] += m
        record_significant_improvement(batches, state, events)
        k = int(np.argmin(values))
        improved = bool(values[k] < fw.fitness)
        if cfg.mfwa_strategy == "dynamic":
            raw = amp * (cfg.c_a if improved else cfg.c_r)
        else:
            best_pos = sparks[k] if improved else fw.position
            raw = afwa_update(amp, fw.fitness, sparks, values, best_pos, cfg.lambda_smooth, mode=cfg.afwa_mode)
        new_amp, clamped = clamp_amplitude(raw, search_range)
        amp_trace.append(AmplitudeRecord(state.iteration, amp, new_amp, improved, clamped))
        amp = new_amp
        state.fireworks = [independent_select(fw, sparks, values)]
        state.refresh_cf()
        state.gcf_members = {state.cf.id}
        state.iteration += 1
        trace.append((state.evals_used, min(trace[-1][1], state.cf.fitness)))
        if on_iteration is not None:
            on_iteration(state)

    return _result("mfwa", cfg, spec, seed, state, trace, events, amp_trace, spark_counts, start)


def run_coffwa(config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, on_iteration: IterationHook = None) -> RunResult:
    """Cooperative framework: independent selection per firework plus crowdness avoidance.

    The core firework uses the dynamic amplitude rule; the others use the
    fitness-shared amplitudes.  No Gaussian sparks are generated.  After
    selection, every non-core firework within ``tau_factor * A_CF`` (the
    updated core amplitude) of the core firework is reinitialized.
    """
    cfg = dataclasses.replace(config, gaussian_enabled=False).for_problem(spec)
    start = time.perf_counter()
    state = init_swarm(cfg, spec, seed)
    search_range = spec.search_range
    a_cf = search_range
    events: List[ImprovementEvent] = []
    amp_trace: List[AmplitudeRecord] = []
    spark_counts = {"explosion": 0, "gaussian": 0, "reinit": 0}
    trace = [(state.evals_used, state.cf.fitness)]

    while state.remaining > 0:
        fws = state.fireworks
        fit = state.fitnesses()
        cf_i = state.cf_index
        cf = fws[cf_i]
        amps = compute_amplitudes(fit, cfg.amp_constant)
        amps[cf_i] = a_cf
        for k, fw in enumerate(fws):
            fw.amplitude = float(amps[k])
        counts = _fit_budget(compute_spark_counts(fit, cfg.total_sparks, cfg.spark_frac_min, cfg.spark_frac_max), state.remaining)
        sparks, values, owners, batches = _explode(state, spec, cfg, amps, counts, state.gcf_members.__contains__)
        spark_counts["explosion"] += len(values)
        record_significant_improvement(batches, state, events)
        xb_f, _ = _best_spark(values, owners, fws)
        improved = xb_f < cf.fitness
        new_amp, clamped = clamp_amplitude(a_cf * (cfg.c_a if improved else cfg.c_r), search_range)
        amp_trace.append(AmplitudeRecord(state.iteration, a_cf, new_amp, improved, clamped))
        a_cf = new_amp

        state.fireworks = [independent_select(fw, b.positions, b.fitnesses) for fw, b in zip(fws, batches)]
        state.refresh_cf()
        state.gcf_members = {state.cf.id}
        exhausted = False
        try:
            spark_counts["reinit"] += len(crowdness_avoid(state, spec, a_cf, cfg.tau_factor))
        except BudgetExhausted as exc:
            spark_counts["reinit"] += len(exc.moved)
            exhausted = True
        state.refresh_cf()
        state.gcf_members = {state.cf.id}
        state.iteration += 1
        trace.append((state.evals_used, min(trace[-1][1], state.cf.fitness)))
        if on_iteration is not None:
            on_iteration(state)
        if exhausted:
            break

    return _result("coffwa", cfg, spec, seed, state, trace, events, amp_trace, spark_counts, start)


# name -> (runner, gaussian_enabled)
ALGORITHMS: Dict[str, Tuple[Callable[..., RunResult], Optional[bool]]] = {
    "efwa": (run_efwa, True),
    "efwa-ng": (run_efwa, False),
    "dynfwa": (run_dynfwa, True),
    "dynfwa-ng": (run_dynfwa, False),
    "afwa": (run_afwa, True),
    "afwa-ng": (run_afwa, False),
    "mfwa": (run_mfwa, None),
    "coffwa": (run_coffwa, None),
}


def algorithm_names() -> List[str]:
    return list(ALGORITHMS)


def run_algorithm(name: str, config: AlgorithmConfig, spec: ObjectiveSpec, seed: int, on_iteration: IterationHook = None) -> RunResult:
    """Dispatch by name; ``-ng`` variants switch the Gaussian operator off."""
    try:
        runner, gaussian = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; valid choices: {', '.join(ALGORITHMS)}") from None
    if gaussian is not None:
        config = dataclasses.replace(config, gaussian_enabled=gaussian)
    return runner(config, spec, seed, on_iteration)
