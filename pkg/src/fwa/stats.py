"""Nonparametric comparison: Wilcoxon signed-rank test, rank tables, verdict matrices."""

from __future__ import annotations

import csv
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence

import numpy as np
from scipy.stats import norm, rankdata

__all__ = [
    "ComparisonCell",
    "WilcoxonResult",
    "exact_wilcoxon",
    "load_external_results",
    "rank_table",
    "significance_matrix",
    "verdict",
    "wilcoxon_signed_rank",
]

EXACT_MAX_N = 12
DEFAULT_LEVEL = 0.05


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # min(W+, W-)
    pvalue: float
    n_eff: int  # nonzero differences
    method: str  # "exact", "normal" or "degenerate"

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


def _signed_ranks(d: np.ndarray):
    d = d[d != 0]
    return d, rankdata(np.abs(d))


def exact_wilcoxon(d) -> WilcoxonResult:
    """Brute-force exact test: enumerate all ``2**n`` sign patterns of the ranks.

    Used as an oracle for the exact branch of :func:`wilcoxon_signed_rank`.
    """
    d, r = _signed_ranks(np.asarray(d, dtype=np.float64))
    n = len(d)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 0, "degenerate")
    if n > EXACT_MAX_N:
        raise ValueError(f"enumeration limited to n <= {EXACT_MAX_N}, got {n}")
    w_plus = float(r[d > 0].sum())
    w = min(w_plus, float(r.sum()) - w_plus)
    total = float(r.sum())
    hits = 0
    for signs in itertools.product((0, 1), repeat=n):
        wp = float(np.dot(signs, r))
        if min(wp, total - wp) <= w:
            hits += 1
    return WilcoxonResult(w, min(1.0, hits / 2**n), n, "exact")


def _exact_pvalue(r: np.ndarray, w: float) -> float:
    # Ranks are multiples of 0.5, so count W+ distributions over doubled integer ranks.
    ranks2 = np.rint(2 * r).astype(np.int64)
    total = int(ranks2.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for k in ranks2:
        counts[k:] = counts[k:] + counts[: total + 1 - k].copy()
    wp = np.arange(total + 1)
    w2 = int(round(2 * w))
    hits = int(counts[np.minimum(wp, total - wp) <= w2].sum())
    return min(1.0, hits / 2 ** len(r))


def wilcoxon_signed_rank(a, b) -> WilcoxonResult:
    """Two-sided paired Wilcoxon signed-rank test on ``a - b``.

    Zero differences are dropped.  Tied magnitudes get average ranks.  The
    p-value is exact for at most 12 nonzero differences, otherwise from the
    normal approximation with tie-corrected variance and a 0.5 continuity
    correction.  All-zero differences give a degenerate result with p = 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be 1-d vectors of equal length")
    if len(a) < 5:
        raise ValueError(f"need at least 5 pairs, got {len(a)}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    d, r = _signed_ranks(a - b)
    n = len(d)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, 0, "degenerate")
    w_plus = float(r[d > 0].sum())
    w = min(w_plus, float(r.sum()) - w_plus)
    if n <= EXACT_MAX_N:
        return WilcoxonResult(w, _exact_pvalue(r, w), n, "exact")
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(r, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    z = (mean - w - 0.5) / math.sqrt(var)
    p = 2.0 * norm.sf(max(z, 0.0))
    return WilcoxonResult(w, float(min(1.0, p)), n, "normal")


def verdict(a, b, level: float = DEFAULT_LEVEL):
    """``(p, v)``: v = 1 if ``a`` is significantly better (smaller), -1 if worse, else 0.

    Direction comes from the medians; equal medians fall back to the rank sums.
    """
    res = wilcoxon_signed_rank(a, b)
    if res.pvalue >= level:
        return res.pvalue, 0
    ma, mb = float(np.median(a)), float(np.median(b))
    if ma != mb:
        return res.pvalue, 1 if ma < mb else -1
    d, r = _signed_ranks(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    w_plus, w_minus = r[d > 0].sum(), r[d < 0].sum()
    return res.pvalue, 1 if w_minus > w_plus else (-1 if w_plus > w_minus else 0)


def rank_table(results):
    """Competition ranks per row (1 = smallest mean) and the average rank per column."""
    m = np.asarray(results, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise ValueError("results must be a non-empty 2-d matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("results contain non-finite entries")
    ranks = np.vstack([rankdata(row, method="min") for row in m]).astype(int)
    return ranks, ranks.mean(axis=0)


@dataclass(frozen=True)
class ComparisonCell:
    function: str
    first: str
    second: str
    pvalue: float
    verdict: int


def significance_matrix(
    per_run: Mapping[str, Mapping[str, Sequence[float]]],
    pairs=None,
    level: float = DEFAULT_LEVEL,
) -> List[ComparisonCell]:
    """Pairwise Wilcoxon verdicts per function.

    ``per_run[algorithm][function]`` holds the final fitness of each run.
    ``pairs`` defaults to every ordered pair of distinct algorithms.
    """
    algos = list(per_run)
    if pairs is None:
        pairs = [(x, y) for x in algos for y in algos if x != y]
    cells = []
    for x, y in pairs:
        for fn in per_run[x]:
            if fn not in per_run[y]:
                continue
            a, b = per_run[x][fn], per_run[y][fn]
            if len(a) != len(b):
                raise ValueError(f"unequal run counts for {fn}: {x}={len(a)}, {y}={len(b)}")
            p, v = verdict(a, b, level)
            cells.append(ComparisonCell(fn, x, y, p, v))
    return cells


def load_external_results(path) -> Dict[str, List[float]]:
    """Read comparator results: one row per run with ``function_id,final_fitness``."""
    out: Dict[str, List[float]] = defaultdict(list)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"function_id", "final_fitness"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out[row["function_id"]].append(float(row["final_fitness"]))
    return dict(out)
