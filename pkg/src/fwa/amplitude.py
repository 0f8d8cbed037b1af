"""Explosion-amplitude control: MEACS floor, dynamic rule, adaptive rule."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

__all__ = [
    "afwa_update",
    "apply_meacs",
    "clamp_amplitude",
    "dyn_update",
    "inf_norm",
    "meacs_min_amplitude",
]


def meacs_min_amplitude(t: float, e_max: float, a_init: float, a_final: float) -> float:
    """Lower bound on the amplitude after ``t`` of ``e_max`` evaluations.

    Decays non-linearly from ``a_init`` at ``t = 0`` to ``a_final`` at
    ``t = e_max``.
    """
    if not 0 <= t <= e_max:
        raise ValueError(f"t={t} outside [0, {e_max}]")
    # weight runs 0 -> 1; this form hits both endpoints exactly in floating point
    w = math.sqrt((2.0 * e_max - t) * t) / e_max
    return a_init * (1.0 - w) + a_final * w


def apply_meacs(amplitude, a_min):
    return np.maximum(amplitude, a_min) if isinstance(amplitude, np.ndarray) else max(amplitude, a_min)


def clamp_amplitude(amplitude: float, upper: Optional[float]):
    """Return ``(min(amplitude, upper), was_clamped)``."""
    if upper is not None and amplitude > upper:
        return float(upper), True
    return float(amplitude), False


def dyn_update(a_prev: float, improved: bool, c_a: float, c_r: float, upper: Optional[float] = None) -> float:
    """Amplify on improvement, reduce otherwise; optionally capped at ``upper``."""
    a = a_prev * (c_a if improved else c_r)
    return clamp_amplitude(a, upper)[0]


def inf_norm(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def afwa_update(
    a_used: float,
    cf_fitness: float,
    spark_positions,
    spark_fitnesses,
    best_position,
    lambda_smooth: float,
    *,
    mode: str = "minimal",
    upper: Optional[float] = None,
) -> float:
    """Adaptive amplitude for the core firework.

    Sparks qualify when they are worse than the core firework.  In
    ``"literal"`` mode the candidate distance is a running maximum that
    starts at ``a_used`` and only grows past it; in ``"minimal"`` mode it is
    the smallest qualifying infinity-norm distance to ``best_position``
    (``a_used`` when nothing qualifies).  The result is smoothed as
    ``0.5 * (a_used + lambda_smooth * candidate)``.
    """
    X = np.asarray(spark_positions, dtype=np.float64).reshape(-1, np.size(best_position))
    f = np.asarray(spark_fitnesses, dtype=np.float64).reshape(-1)
    if len(X) == 0:
        raise ValueError("afwa_update needs at least one spark")
    dist = np.max(np.abs(X - np.asarray(best_position, dtype=np.float64)), axis=1)
    worse = f > cf_fitness
    if mode == "literal":
        candidate = max(a_used, float(dist[worse].max())) if worse.any() else a_used
    elif mode == "minimal":
        candidate = float(dist[worse].min()) if worse.any() else a_used
    else:
        raise ValueError(f"unknown afwa mode {mode!r}")
    return clamp_amplitude(0.5 * (a_used + lambda_smooth * candidate), upper)[0]
