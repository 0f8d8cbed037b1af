"""Survivor selection: elitism-random, independent, and crowdness avoidance."""

from __future__ import annotations

from typing import List

import numpy as np

from .core import Attribution, BudgetExhausted, Firework, SwarmState, consume_evaluation
from .objectives import ObjectiveSpec

__all__ = ["crowdness_avoid", "elitism_random_select", "independent_select"]


def elitism_random_select(fitnesses, n: int, rng) -> np.ndarray:
    """Indices of ``n`` survivors: the best candidate first, the rest uniformly at random.

    Among equal minima the lowest index is the elite.  The remaining ``n - 1``
    are drawn without replacement from all other candidates.
    """
    f = np.asarray(fitnesses, dtype=np.float64)
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(f) < n:
        raise ValueError(f"cannot select {n} from {len(f)} candidates")
    best = int(np.argmin(f))
    if n == 1:
        return np.array([best])
    rest = np.delete(np.arange(len(f)), best)
    picked = rest[rng.sample_without_replacement(len(rest), n - 1)]
    return np.concatenate(([best], picked))


def independent_select(firework: Firework, spark_positions, spark_fitnesses) -> Firework:
    """Keep the better of a firework and its own best spark; ties keep the incumbent."""
    f = np.asarray(spark_fitnesses, dtype=np.float64)
    if len(f):
        k = int(np.argmin(f))
        if f[k] < firework.fitness:
            return Firework(
                id=firework.id,
                position=np.array(spark_positions[k], dtype=np.float64),
                fitness=float(f[k]),
                amplitude=firework.amplitude,
                parent_id=firework.id,
                age=0,
            )
    return Firework(firework.id, firework.position, firework.fitness, firework.amplitude, firework.parent_id, firework.age + 1)


def crowdness_avoid(state: SwarmState, spec: ObjectiveSpec, a_cf: float, tau_factor: float) -> List[int]:
    """Reinitialize every non-core firework closer than ``tau_factor * a_cf`` to the CF.

    One pass: distances are measured against the CF as it stands on entry
    and a reinitialized firework is not checked again.  Each reinitialized
    firework gets a fresh id, no parent, and one budgeted evaluation.
    Returns the indices that were reinitialized.  Raises
    :class:`~fwa.core.BudgetExhausted` (leaving that firework untouched) if
    the budget runs out midway; the exception's ``moved`` attribute lists
    the reinitializations already made.
    """
    tau = tau_factor * a_cf
    cf = state.cf
    moved = []
    for i, fw in enumerate(state.fireworks):
        if i == state.cf_index:
            continue
        if np.max(np.abs(fw.position - cf.position)) < tau:
            position = state.rng.uniform(spec.lower, spec.upper)
            position = np.clip(position, spec.lower, spec.upper)
            new_id = state.next_id
            try:
                fitness = consume_evaluation(state, spec, position, Attribution(new_id, "reinit"))
            except BudgetExhausted as exc:
                exc.moved = moved
                raise
            state.new_id()
            state.gcf_members.discard(fw.id)
            state.fireworks[i] = Firework(new_id, position, fitness, fw.amplitude, None, 0)
            moved.append(i)
    return moved
