"""Explosion and Gaussian-mutation operators.

The batch functions here are what the algorithms call; the single-spark
functions are thin wrappers kept for direct use and testing.  Any ``rng``
argument only needs ``random``, ``uniform`` and ``normal`` with numpy-style
``size`` arguments (see :class:`fwa.core.RngStream`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPS",
    "SparkBatch",
    "compute_amplitudes",
    "compute_spark_counts",
    "explosion_sparks",
    "gaussian_sparks",
    "generate_explosion_spark",
    "generate_gaussian_spark",
    "map_out_of_bounds",
    "remap_out_of_bounds",
]

EPS = np.finfo(np.float64).eps


@dataclass
class SparkBatch:
    parent_id: int
    positions: np.ndarray
    fitnesses: np.ndarray
    kind: str  # "explosion" or "gaussian"

    def __post_init__(self):
        if len(self.positions) != len(self.fitnesses):
            raise ValueError("positions and fitnesses differ in length")

    def __len__(self):
        return len(self.fitnesses)


def compute_amplitudes(fitnesses, amp_constant: float) -> np.ndarray:
    """Fitness-proportional explosion amplitudes; the best firework gets the smallest."""
    f = np.asarray(fitnesses, dtype=np.float64)
    gap = f - f.min()
    return amp_constant * (gap + EPS) / (gap.sum() + EPS)


def compute_spark_counts(fitnesses, total_sparks: int, frac_min: float, frac_max: float) -> np.ndarray:
    """Spark counts inversely related to fitness, rounded and clamped.

    Rounding is half-up; the clamp is ``[round(frac_min * M), round(frac_max * M)]``
    with a floor of one spark.
    """
    f = np.asarray(fitnesses, dtype=np.float64)
    gap = f.max() - f
    raw = total_sparks * (gap + EPS) / (gap.sum() + EPS)
    lo = max(1, int(np.floor(frac_min * total_sparks + 0.5)))
    hi = max(lo, int(np.floor(frac_max * total_sparks + 0.5)))
    return np.clip(np.floor(raw + 0.5), lo, hi).astype(np.int64)


def remap_out_of_bounds(X: np.ndarray, lower: np.ndarray, upper: np.ndarray, rng) -> np.ndarray:
    """Replace each out-of-box coordinate of ``X`` (in place) by a uniform draw in its range."""
    lo = np.broadcast_to(lower, X.shape)
    hi = np.broadcast_to(upper, X.shape)
    bad = (X < lo) | (X > hi)
    if bad.any():
        lo_b, hi_b = lo[bad], hi[bad]
        X[bad] = lo_b + rng.random(lo_b.shape) * (hi_b - lo_b)
    return X


def map_out_of_bounds(value: float, lower: float, upper: float, rng) -> float:
    if lower <= value <= upper:
        return value
    return lower + float(rng.random()) * (upper - lower)


def explosion_sparks(centers, amplitudes, lower, upper, rng, *, shared_offset: bool = False) -> np.ndarray:
    """One explosion spark per row of ``centers``.

    Each dimension is selected with probability 1/2 (``round(rand(0,1))``);
    selected dimensions move by ``amplitude * rand(-1, 1)``, drawn per
    dimension unless ``shared_offset`` is set.
    """
    centers = np.asarray(centers, dtype=np.float64)
    n, d = centers.shape
    mask = rng.random((n, d)) >= 0.5
    width = 1 if shared_offset else d
    offsets = np.asarray(amplitudes, dtype=np.float64).reshape(n, 1) * rng.uniform(-1.0, 1.0, (n, width))
    sparks = centers + np.where(mask, offsets, 0.0)
    return remap_out_of_bounds(sparks, lower, upper, rng)


def gaussian_sparks(selected, best, lower, upper, rng) -> np.ndarray:
    """One Gaussian spark per row of ``selected``, pulled toward ``best``.

    A single ``e ~ N(0, 1)`` is drawn per spark and applied to all of its
    selected dimensions.
    """
    selected = np.asarray(selected, dtype=np.float64)
    n, d = selected.shape
    mask = rng.random((n, d)) >= 0.5
    e = np.asarray(rng.normal(n), dtype=np.float64).reshape(n, 1)
    sparks = selected + np.where(mask, (np.asarray(best) - selected) * e, 0.0)
    return remap_out_of_bounds(sparks, lower, upper, rng)


def _position(individual) -> np.ndarray:
    return np.asarray(getattr(individual, "position", individual), dtype=np.float64)


def generate_explosion_spark(parent, amplitude: float, lower, upper, rng, *, shared_offset: bool = False) -> np.ndarray:
    return explosion_sparks(_position(parent)[None, :], [amplitude], lower, upper, rng, shared_offset=shared_offset)[0]


def generate_gaussian_spark(selected, best, lower, upper, rng) -> np.ndarray:
    return gaussian_sparks(_position(selected)[None, :], _position(best), lower, upper, rng)[0]
