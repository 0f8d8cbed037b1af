"""Run instrumentation: improvement crediting, GCF tracking, resource shares,
and amplitude-ratio statistics."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Set

import numpy as np

from .core import EvaluationLedger, Firework, SwarmState
from .operators import SparkBatch

__all__ = [
    "AmplitudeRecord",
    "ImprovementEvent",
    "RatioHistogram",
    "SignificanceMetrics",
    "amplitude_ratio_histogram",
    "compute_significance_metrics",
    "read_events_csv",
    "read_ratios_csv",
    "record_significant_improvement",
    "update_gcf_set",
    "write_events_csv",
    "write_ratios_csv",
]

EVENT_COLUMNS = ["evals", "firework_id", "is_cf", "is_gcf"]
RATIO_COLUMNS = ["iteration", "ratio", "improved", "clamped"]


@dataclass(frozen=True)
class ImprovementEvent:
    evals_at_event: int
    credited_firework_id: int
    credited_is_cf: bool
    credited_is_gcf: bool


class AmplitudeRecord(NamedTuple):
    iteration: int
    before: float
    after: float
    improved: bool
    clamped: bool = False

    @property
    def ratio(self) -> float:
        return self.after / self.before


@dataclass(frozen=True)
class SignificanceMetrics:
    """Shares of significant improvements (alpha, beta) and of evaluations (theta).

    A ``None`` field means its denominator was zero.
    """

    alpha_cf: Optional[float]
    beta_cf: Optional[float]
    alpha_gcf: Optional[float]
    beta_gcf: Optional[float]
    theta_cf: Optional[float]
    theta_gcf: Optional[float]

    def as_dict(self):
        return asdict(self)


def record_significant_improvement(
    batches: Sequence[SparkBatch],
    swarm: SwarmState,
    log: List[ImprovementEvent],
    evals_at_event: Optional[int] = None,
) -> List[ImprovementEvent]:
    """Append at most one event: the best explosion spark, if it beats every firework.

    ``swarm`` must still hold the fireworks that produced ``batches``.
    Gaussian batches are ignored.
    """
    best_f, parent = math.inf, None
    for batch in batches:
        if batch.kind != "explosion" or len(batch) == 0:
            continue
        k = int(np.argmin(batch.fitnesses))
        if batch.fitnesses[k] < best_f:
            best_f, parent = float(batch.fitnesses[k]), batch.parent_id
    if parent is not None and best_f < min(fw.fitness for fw in swarm.fireworks):
        log.append(
            ImprovementEvent(
                evals_at_event=swarm.evals_used if evals_at_event is None else int(evals_at_event),
                credited_firework_id=parent,
                credited_is_cf=parent == swarm.cf.id,
                credited_is_gcf=parent in swarm.gcf_members,
            )
        )
    return log


def update_gcf_set(
    cf_id: int,
    cf_fitness: float,
    gcf_members: Set[int],
    best_spark_fitness: float,
    best_spark_parent: Optional[int],
    selected: Sequence[Firework],
    born_this_iteration: Set[int],
) -> Set[int]:
    """General-core-firework membership for the next iteration.

    ``selected`` are the survivors; those whose id is in
    ``born_this_iteration`` are sparks created this iteration (their
    ``parent_id`` is the firework that produced them), the others are
    fireworks carried over.

    On improvement (best explosion spark strictly beats the CF) members are
    the survivors produced by the best spark's parent plus that parent
    itself.  Otherwise members are the survivors produced by the CF plus
    carried-over fireworks that were already members.  The next CF (the
    first survivor with minimal fitness) is always a member.
    """
    members = set()
    improved = best_spark_parent is not None and best_spark_fitness < cf_fitness
    for fw in selected:
        born = fw.id in born_this_iteration
        if improved:
            keep = (born and fw.parent_id == best_spark_parent) or (not born and fw.id == best_spark_parent)
        else:
            keep = (born and fw.parent_id == cf_id) or (not born and fw.id in gcf_members)
        if keep:
            members.add(fw.id)
    if selected:
        next_cf = min(selected, key=lambda fw: (fw.fitness, fw.id))
        members.add(next_cf.id)
    return members


def _share(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def compute_significance_metrics(events: Sequence[ImprovementEvent], ledger: EvaluationLedger, e_max: int) -> SignificanceMetrics:
    """alpha over all events, beta over events from evaluation ``e_max / 30`` on,
    theta over all attributed (post-initialization) evaluations."""
    cutoff = e_max / 30.0
    late = [e for e in events if e.evals_at_event >= cutoff]
    return SignificanceMetrics(
        alpha_cf=_share(sum(e.credited_is_cf for e in events), len(events)),
        beta_cf=_share(sum(e.credited_is_cf for e in late), len(late)),
        alpha_gcf=_share(sum(e.credited_is_gcf for e in events), len(events)),
        beta_gcf=_share(sum(e.credited_is_gcf for e in late), len(late)),
        theta_cf=_share(ledger.total(cf=True), ledger.attributed),
        theta_gcf=_share(ledger.total(gcf=True), ledger.attributed),
    )


class RatioHistogram(NamedTuple):
    improved: Optional[tuple]  # (probabilities, bin_edges)
    missed: Optional[tuple]
    geo_mean_improved: Optional[float]
    geo_mean_missed: Optional[float]


def _geo_mean(values: np.ndarray) -> Optional[float]:
    return float(np.exp(np.mean(np.log(values)))) if len(values) else None


def _hist(values: np.ndarray, bins: int):
    if not len(values):
        return None
    lo, hi = float(values.min()), float(values.max())
    # near-identical ratios (e.g. 1.2 up to rounding) cannot be split into finite bins
    pad = 1e-6 * max(abs(lo), 1.0)
    rng = (lo - pad, hi + pad) if hi - lo < pad else (lo, hi)
    counts, edges = np.histogram(values, bins=bins, range=rng)
    return counts / counts.sum(), edges


def amplitude_ratio_histogram(trace: Iterable[AmplitudeRecord], bins: int = 50, *, exclude_clamped: bool = False) -> RatioHistogram:
    """Split ``after / before`` ratios by the improved flag; histogram and geometric-mean each part."""
    records = [r for r in trace if not (exclude_clamped and r.clamped)]
    if not records:
        raise ValueError("amplitude trace is empty")
    ratios = np.array([r.ratio for r in records])
    flags = np.array([r.improved for r in records], dtype=bool)
    up, down = ratios[flags], ratios[~flags]
    return RatioHistogram(_hist(up, bins), _hist(down, bins), _geo_mean(up), _geo_mean(down))


def write_events_csv(path, events: Iterable[ImprovementEvent]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_COLUMNS)
        for e in events:
            w.writerow([e.evals_at_event, e.credited_firework_id, int(e.credited_is_cf), int(e.credited_is_gcf)])


def read_events_csv(path) -> List[ImprovementEvent]:
    with open(path, newline="") as fh:
        return [
            ImprovementEvent(int(r["evals"]), int(r["firework_id"]), r["is_cf"] == "1", r["is_gcf"] == "1")
            for r in csv.DictReader(fh)
        ]


def write_ratios_csv(path, trace: Iterable[AmplitudeRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RATIO_COLUMNS)
        for r in trace:
            w.writerow([r.iteration, repr(float(r.ratio)), int(r.improved), int(r.clamped)])


def read_ratios_csv(path) -> List[tuple]:
    """Rows as ``(iteration, ratio, improved, clamped)``."""
    with open(path, newline="") as fh:
        return [
            (int(r["iteration"]), float(r["ratio"]), r["improved"] == "1", r["clamped"] == "1")
            for r in csv.DictReader(fh)
        ]
