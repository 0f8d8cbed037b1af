"""Bounded benchmark functions with optional shift and rotation.

Every base function is written in a transformed coordinate ``z`` whose
global optimum sits at ``z = 0`` with value 0, so an ``ObjectiveSpec``
evaluates ``base(R @ (x - shift)) + bias`` and its optimum is ``shift``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

__all__ = [
    "ObjectiveSpec",
    "BASE_FUNCTIONS",
    "SUITE_NAMES",
    "evaluate_objective",
    "evaluate_batch",
    "make_objective",
    "make_suite",
    "random_rotation",
    "load_shift",
    "load_rotation",
    "with_transform",
]

ORTHOGONALITY_TOL = 1e-9

# Optimum of u * sin(sqrt|u|) used by the Schwefel 2.26 landscape.
_SCHWEFEL_U = 420.968746
_SCHWEFEL_K = _SCHWEFEL_U * math.sin(math.sqrt(_SCHWEFEL_U))


def _sphere(z):
    return np.sum(z * z, axis=1)


def _ellipsoid(z):
    d = z.shape[1]
    if d == 1:
        return _sphere(z)
    weights = 10.0 ** (6.0 * np.arange(d) / (d - 1))
    return np.sum(weights * z * z, axis=1)


def _rosenbrock(z):
    # 2.048/100 maps the +-100 box onto the classic +-2.048 box.
    u = 0.02048 * z + 1.0
    head, tail = u[:, :-1], u[:, 1:]
    return np.sum(100.0 * (tail - head * head) ** 2 + (head - 1.0) ** 2, axis=1)


def _ackley(z):
    d = z.shape[1]
    r = np.sqrt(np.sum(z * z, axis=1) / d)
    c = np.sum(np.cos(2.0 * np.pi * z), axis=1) / d
    return -20.0 * np.exp(-0.2 * r) - np.exp(c) + 20.0 + math.e


def _griewank(z):
    u = 6.0 * z
    d = u.shape[1]
    sq = np.sum(u * u, axis=1) / 4000.0
    prod = np.prod(np.cos(u / np.sqrt(np.arange(1, d + 1))), axis=1)
    return sq - prod + 1.0


def _rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=1)


def _schwefel_term(u):
    # CEC-style handling outside +-500 keeps the optimum global.
    d = u.shape[1]
    g = u * np.sin(np.sqrt(np.abs(u)))
    hi = u > 500.0
    if hi.any():
        m = 500.0 - np.fmod(u[hi], 500.0)
        g[hi] = m * np.sin(np.sqrt(np.abs(m))) - (u[hi] - 500.0) ** 2 / (10000.0 * d)
    lo = u < -500.0
    if lo.any():
        m = np.fmod(np.abs(u[lo]), 500.0) - 500.0
        g[lo] = m * np.sin(np.sqrt(np.abs(m))) - (u[lo] + 500.0) ** 2 / (10000.0 * d)
    return g


def _schwefel(z):
    return np.sum(_SCHWEFEL_K - _schwefel_term(z + _SCHWEFEL_U), axis=1)


def _composite_rastrigin(z):
    # z arrives rotated by R; the second component reads it in reversed
    # coordinate order (another orthogonal frame), same optimum at z = 0.
    return 0.5 * (_rastrigin(z) + _rastrigin(z[:, ::-1]))


BASE_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sphere": _sphere,
    "ellipsoid": _ellipsoid,
    "rosenbrock": _rosenbrock,
    "ackley": _ackley,
    "griewank": _griewank,
    "rastrigin": _rastrigin,
    "schwefel": _schwefel,
    "composite": _composite_rastrigin,
}

# Per-function (box half-width, rotated?, pre-scale applied to x - shift).
_SUITE_LAYOUT = {
    "sphere": (100.0, False, 1.0),
    "ellipsoid": (100.0, True, 1.0),
    "rosenbrock": (100.0, False, 1.0),
    "ackley": (100.0, True, 1.0),
    "griewank": (100.0, True, 1.0),
    "rastrigin": (5.12, False, 1.0),
    "schwefel": (500.0, False, 1.0),
    "composite": (100.0, True, 0.0512),
}

SUITE_NAMES: List[str] = list(_SUITE_LAYOUT)


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """A box-constrained test function ``base(R @ (scale * (x - shift))) + bias``.

    Instances are immutable; arrays are copied and made read-only on
    construction so a spec can be shared between concurrent runs.
    """

    name: str
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    shift: Optional[np.ndarray] = None
    rotation: Optional[np.ndarray] = None
    bias: float = 0.0
    known_optimum_value: Optional[float] = 0.0
    base: Optional[str] = None
    scale: float = 1.0
    _rotated: bool = field(default=False, init=False, repr=False)

    def __post_init__(self):
        d = int(self.dim)
        if d < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        base = self.base or self.name
        if base not in BASE_FUNCTIONS:
            raise ValueError(f"unknown base function {base!r}; choose from {sorted(BASE_FUNCTIONS)}")
        lower = _frozen_vector(self.lower, d, "lower")
        upper = _frozen_vector(self.upper, d, "upper")
        if not np.all(lower < upper):
            raise ValueError("lower must be strictly below upper in every dimension")
        shift = np.zeros(d) if self.shift is None else self.shift
        shift = _frozen_vector(shift, d, "shift")
        if np.any(shift < lower) or np.any(shift > upper):
            raise ValueError("shift vector must lie inside the search box")
        if self.rotation is None:
            rotation = np.eye(d)
        else:
            rotation = np.array(self.rotation, dtype=np.float64)
            if rotation.shape != (d, d):
                raise ValueError(f"rotation must be {d}x{d}, got {rotation.shape}")
            err = np.abs(rotation.T @ rotation - np.eye(d)).max()
            if err > ORTHOGONALITY_TOL:
                raise ValueError(f"rotation is not orthogonal (max |R^T R - I| = {err:.3g})")
        rotation.setflags(write=False)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "_rotated", not np.array_equal(rotation, np.eye(d)))

    @property
    def search_range(self) -> float:
        """Infinity norm of the box extent, ``max_k (upper_k - lower_k)``."""
        return float(np.max(self.upper - self.lower))

    @property
    def optimum(self) -> np.ndarray:
        return self.shift

    def __call__(self, x) -> float:
        return evaluate_objective(self, x)


def _frozen_vector(value, d, label):
    v = np.array(value, dtype=np.float64).reshape(-1)
    if v.shape != (d,):
        raise ValueError(f"{label} must have length {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{label} must be finite")
    v.setflags(write=False)
    return v


def evaluate_batch(spec: ObjectiveSpec, X) -> np.ndarray:
    """Evaluate every row of ``X`` (shape ``(n, dim)``) and return ``n`` values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.dim:
        raise ValueError(f"expected points of dimension {spec.dim}, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite input component")
    z = X - spec.shift
    if spec.scale != 1.0:
        z = spec.scale * z
    if spec._rotated:
        # einsum keeps every row's arithmetic independent of the batch size
        z = np.einsum("ij,nj->ni", spec.rotation, z)
    values = BASE_FUNCTIONS[spec.base](z)
    if spec.bias:
        values = values + spec.bias
    return values


def evaluate_objective(spec: ObjectiveSpec, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a single point, got shape {x.shape}")
    return float(evaluate_batch(spec, x[None, :])[0])


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Orthonormalize a Gaussian matrix (QR with sign correction)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    return q


def make_objective(name: str, dim: int, *, shift=None, rotation=None, bias: float = 0.0) -> ObjectiveSpec:
    """Build one suite function in its conventional box."""
    if name not in _SUITE_LAYOUT:
        raise ValueError(f"unknown function {name!r}; choose from {SUITE_NAMES}")
    half, _, scale = _SUITE_LAYOUT[name]
    return ObjectiveSpec(
        name=name,
        dim=dim,
        lower=np.full(dim, -half),
        upper=np.full(dim, half),
        shift=shift,
        rotation=rotation,
        bias=bias,
        known_optimum_value=bias,
        scale=scale,
    )


def make_suite(dim: int, seed: int) -> List[ObjectiveSpec]:
    """The eight-function desk suite, shifted and (where listed) rotated.

    Shift vectors are drawn uniformly from the central 80% of each box.
    Everything is derived from ``seed`` so the suite is reproducible.
    """
    if dim < 2:
        raise ValueError(f"the suite needs dim >= 2, got {dim}")
    suite = []
    for index, name in enumerate(SUITE_NAMES):
        half, rotated, _ = _SUITE_LAYOUT[name]
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, index])
        shift = rng.uniform(-0.8 * half, 0.8 * half, size=dim)
        rotation = random_rotation(dim, rng) if rotated else None
        suite.append(make_objective(name, dim, shift=shift, rotation=rotation))
    return suite


def load_shift(path, dim: int) -> np.ndarray:
    """Read a whitespace-separated shift vector; extra trailing entries are ignored."""
    values = np.loadtxt(Path(path), dtype=np.float64, ndmin=1).reshape(-1)
    if values.size < dim:
        raise ValueError(f"{path}: need {dim} shift entries, found {values.size}")
    return values[:dim]


def load_rotation(path, dim: int) -> np.ndarray:
    """Read a row-major rotation matrix, one whitespace-separated row per line."""
    values = np.loadtxt(Path(path), dtype=np.float64, ndmin=2)
    if values.shape[0] < dim or values.shape[1] != dim:
        raise ValueError(f"{path}: expected a {dim}x{dim} matrix, found {values.shape}")
    return values[:dim]


def with_transform(spec: ObjectiveSpec, *, shift=None, rotation=None) -> ObjectiveSpec:
    """Return a copy of ``spec`` with a replaced shift and/or rotation."""
    return replace(
        spec,
        shift=spec.shift if shift is None else shift,
        rotation=spec.rotation if rotation is None else rotation,
    )
