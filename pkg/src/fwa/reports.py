"""Run serialization, campaign execution and aggregate report tables.

Per-run files live at ``<out>/<algorithm>/<function>/run_<k>.*``:

- ``run_<k>.csv``: ``evals,best_so_far``
- ``run_<k>.json``: scalar summary plus significance metrics
- ``run_<k>_events.csv``: ``evals,firework_id,is_cf,is_gcf``
- ``run_<k>_ratios.csv``: ``iteration,ratio,improved,clamped``

Campaign tables are written to ``<out>/reports/`` (see :func:`write_reports`).
"""

from __future__ import annotations

import csv
import json
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import RunResult, run_algorithm
from .core import AlgorithmConfig, run_seed
from .objectives import ObjectiveSpec
from .stats import rank_table, significance_matrix
from .telemetry import (
    AmplitudeRecord,
    amplitude_ratio_histogram,
    compute_significance_metrics,
    write_events_csv,
    write_ratios_csv,
)

__all__ = [
    "CellFailure",
    "RunSummary",
    "read_trace_csv",
    "run_campaign",
    "summarize_run",
    "write_reports",
    "write_run",
]

TRACE_COLUMNS = ["evals", "best_so_far"]
METRIC_ALGORITHMS = ("efwa-ng", "dynfwa-ng", "afwa-ng")
RUNTIME_REFERENCE = "dynfwa"


@dataclass
class RunSummary:
    """Compact, picklable digest of a :class:`RunResult`."""

    algorithm: str
    function: str
    run: int
    seed: int
    dim: int
    best_fitness: float
    evals_used: int
    e_max: int
    iterations: int
    wall_time: float
    metrics: Dict[str, Optional[float]]
    ratios: List[AmplitudeRecord] = field(default_factory=list)
    trace: List[Tuple[int, float]] = field(default_factory=list)


@dataclass
class CellFailure:
    algorithm: str
    function: str
    run: int
    error: str


def summarize_run(result: RunResult, run: int = 0) -> RunSummary:
    metrics = compute_significance_metrics(result.improvement_events, result.ledger, result.e_max)
    return RunSummary(
        algorithm=result.algorithm,
        function=result.function,
        run=run,
        seed=result.seed,
        dim=result.dim,
        best_fitness=float(result.best_fitness),
        evals_used=result.evals_used,
        e_max=result.e_max,
        iterations=result.iterations,
        wall_time=result.wall_time,
        metrics=metrics.as_dict(),
        ratios=list(result.amplitude_trace),
        trace=list(result.trace),
    )


def write_trace_csv(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for evals, best in trace:
            w.writerow([int(evals), repr(float(best))])


def read_trace_csv(path) -> List[Tuple[int, float]]:
    with open(path, newline="") as fh:
        return [(int(r["evals"]), float(r["best_so_far"])) for r in csv.DictReader(fh)]


def write_run(result: RunResult, directory, run: int = 0) -> RunSummary:
    """Write the four per-run files into ``directory`` and return the summary."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stem = directory / f"run_{run}"
    summary = summarize_run(result, run)
    write_trace_csv(f"{stem}.csv", result.trace)
    write_events_csv(f"{stem}_events.csv", result.improvement_events)
    write_ratios_csv(f"{stem}_ratios.csv", result.amplitude_trace)
    doc = {
        "algorithm": result.algorithm,
        "function": result.function,
        "dim": result.dim,
        "run": run,
        "seed": result.seed,
        "best_fitness": float(result.best_fitness),
        "best_position": [float(v) for v in result.best_position],
        "evals_used": result.evals_used,
        "e_max": result.e_max,
        "iterations": result.iterations,
        "wall_time": result.wall_time,
        "spark_counts": dict(result.spark_counts),
        "metrics": summary.metrics,
        "config": asdict(result.config) if result.config is not None else None,
    }
    with open(f"{stem}.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _run_cell(args):
    algorithm, spec, config, seed, run, out_dir = args
    try:
        result = run_algorithm(algorithm, config, spec, seed)
        if out_dir is None:
            return summarize_run(result, run)
        return write_run(result, Path(out_dir) / algorithm / spec.name, run)
    except Exception as exc:  # recorded per cell; the campaign carries on
        msg = f"{type(exc).__name__}: {exc}"
        if not isinstance(exc, (ValueError, OSError)):
            msg += "\n" + traceback.format_exc()
        return CellFailure(algorithm, spec.name, run, msg)


def run_campaign(
    algorithms: Sequence[str],
    specs: Sequence[ObjectiveSpec],
    configs,
    runs: int,
    seed_base: int,
    out_dir=None,
    jobs: int = 1,
    progress=None,
):
    """Run every (algorithm, function, run) cell; returns ``(summaries, failures)``.

    ``configs`` is an :class:`AlgorithmConfig` or a mapping from algorithm
    name to one.  Run ``k`` of every cell uses seed ``seed_base + k``.  With
    ``out_dir`` the per-run files are written as cells finish.
    """
    if isinstance(configs, AlgorithmConfig):
        configs = {a: configs for a in algorithms}
    tasks = [
        (a, spec, configs[a], run_seed(seed_base, k), k, None if out_dir is None else str(out_dir))
        for a in algorithms
        for spec in specs
        for k in range(runs)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        outcomes = []
        for t in tasks:
            outcomes.append(_run_cell(t))
            if progress is not None:
                progress(len(outcomes), len(tasks))
    summaries = [o for o in outcomes if isinstance(o, RunSummary)]
    failures = [o for o in outcomes if isinstance(o, CellFailure)]
    return summaries, failures


def group_finals(summaries: Sequence[RunSummary]) -> Dict[str, Dict[str, List[float]]]:
    """``{algorithm: {function: [final fitness by run index]}}``."""
    out: Dict[str, Dict[str, List[Tuple[int, float]]]] = {}
    for s in summaries:
        out.setdefault(s.algorithm, {}).setdefault(s.function, []).append((s.run, s.best_fitness))
    return {a: {f: [v for _, v in sorted(rows)] for f, rows in fns.items()} for a, fns in out.items()}


def _ordered(keys, seen):
    return [k for k in keys if k in seen] + sorted(set(seen) - set(keys))


def _fmt(v):
    return "" if v is None else repr(float(v))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def mean_rank_rows(finals, algorithms, functions):
    """Rows of the mean-fitness table plus the average-rank row."""
    means = np.array([[float(np.mean(finals[a][f])) for a in algorithms] for f in functions])
    ranks, ar = rank_table(means)
    rows = []
    for i, f in enumerate(functions):
        row = [f]
        for j in range(len(algorithms)):
            row += [repr(float(means[i, j])), int(ranks[i, j])]
        rows.append(row)
    rows.append(["AR"] + sum([["", f"{v:.2f}"] for v in ar], []))
    return rows, means, ranks, ar


def write_reports(
    summaries: Sequence[RunSummary],
    out_dir,
    algorithms: Optional[Sequence[str]] = None,
    failures: Sequence[CellFailure] = (),
    external: Optional[Dict[str, Dict[str, List[float]]]] = None,
    bins: int = 50,
    plots: bool = True,
) -> Dict[str, Path]:
    """Aggregate campaign results into ``<out_dir>/reports``.

    Tables:

    - ``final_fitness.csv``: ``algorithm,function,run,seed,best_fitness,evals_used,wall_time``
    - ``mean_rank.csv``: per function ``<algo>_mean,<algo>_rank``; last row ``AR``
    - ``wilcoxon.csv``: ``function,first,second,pvalue,verdict`` for every ordered pair
    - ``wilcoxon_summary.csv``: ``first,second,better,equal,worse``
    - ``significance.csv``: run means of the six CF/GCF shares for the no-Gaussian ERP variants
    - ``amplitude_ratios.csv``: ``algorithm,function,n_improved,n_missed,geo_mean_improved,geo_mean_missed``
    - ``amplitude_ratio_hist.csv``: ``algorithm,function,partition,bin_left,bin_right,probability``
    - ``runtime.csv``: ``algorithm,total_wall_time,mean_wall_time,ratio``, ratio relative to dynfwa
    - ``failures.csv``: ``algorithm,function,run,error``

    ``external`` adds comparator finals (``{name: {function: finals}}``) to
    the rank and Wilcoxon tables.  Figures go to ``reports/figures``.
    """
    reports = Path(out_dir) / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    seen_algos = {s.algorithm for s in summaries}
    algorithms = _ordered(list(algorithms or []), seen_algos)
    finals = group_finals(summaries)
    if external:
        for name, fns in external.items():
            finals[name] = {f: list(v) for f, v in fns.items()}
            if name not in algorithms:
                algorithms.append(name)
    algorithms = [a for a in algorithms if a in finals]
    functions = list(dict.fromkeys(s.function for s in summaries))
    paths: Dict[str, Path] = {}

    p = paths["final_fitness"] = reports / "final_fitness.csv"
    _write_csv(
        p,
        ["algorithm", "function", "run", "seed", "best_fitness", "evals_used", "wall_time"],
        [
            [s.algorithm, s.function, s.run, s.seed, repr(s.best_fitness), s.evals_used, repr(s.wall_time)]
            for s in sorted(summaries, key=lambda s: (algorithms.index(s.algorithm), functions.index(s.function), s.run))
        ],
    )

    complete = [f for f in functions if all(f in finals[a] for a in algorithms)]
    if algorithms and complete:
        rows, *_ = mean_rank_rows(finals, algorithms, complete)
        p = paths["mean_rank"] = reports / "mean_rank.csv"
        _write_csv(p, ["function"] + sum([[f"{a}_mean", f"{a}_rank"] for a in algorithms], []), rows)

    usable = {
        a: {f: v for f, v in finals[a].items() if f in complete and len(v) >= 5} for a in algorithms
    }
    if len(algorithms) > 1:
        try:
            cells = significance_matrix(usable)
        except ValueError as exc:
            cells = []
            failures = list(failures) + [CellFailure("*", "*", -1, f"wilcoxon skipped: {exc}")]
        p = paths["wilcoxon"] = reports / "wilcoxon.csv"
        _write_csv(p, ["function", "first", "second", "pvalue", "verdict"], [[c.function, c.first, c.second, repr(c.pvalue), c.verdict] for c in cells])
        tally: Dict[Tuple[str, str], List[int]] = {}
        for c in cells:
            t = tally.setdefault((c.first, c.second), [0, 0, 0])
            t[{1: 0, 0: 1, -1: 2}[c.verdict]] += 1
        p = paths["wilcoxon_summary"] = reports / "wilcoxon_summary.csv"
        _write_csv(p, ["first", "second", "better", "equal", "worse"], [[x, y, *t] for (x, y), t in tally.items()])

    metric_rows = []
    for a in algorithms:
        if a not in METRIC_ALGORITHMS:
            continue
        for f in functions:
            cell = [s.metrics for s in summaries if s.algorithm == a and s.function == f]
            if not cell:
                continue
            row = [a, f, len(cell)]
            for key in ("alpha_cf", "beta_cf", "theta_cf", "alpha_gcf", "beta_gcf", "theta_gcf"):
                vals = [m[key] for m in cell if m[key] is not None]
                row.append(_fmt(np.mean(vals)) if vals else "")
            metric_rows.append(row)
    if metric_rows:
        p = paths["significance"] = reports / "significance.csv"
        _write_csv(p, ["algorithm", "function", "runs", "alpha_cf", "beta_cf", "theta_cf", "alpha_gcf", "beta_gcf", "theta_gcf"], metric_rows)

    ratio_rows, hist_rows, hists = [], [], {}
    for a in algorithms:
        for f in functions:
            trace = [r for s in summaries if s.algorithm == a and s.function == f for r in s.ratios]
            if not trace:
                continue
            h = amplitude_ratio_histogram(trace, bins=bins)
            hists[(a, f)] = h
            n_up = sum(r.improved for r in trace)
            ratio_rows.append([a, f, n_up, len(trace) - n_up, _fmt(h.geo_mean_improved), _fmt(h.geo_mean_missed)])
            for part, hist in (("improved", h.improved), ("missed", h.missed)):
                if hist is None:
                    continue
                probs, edges = hist
                for k, prob in enumerate(probs):
                    hist_rows.append([a, f, part, repr(float(edges[k])), repr(float(edges[k + 1])), repr(float(prob))])
    if ratio_rows:
        p = paths["amplitude_ratios"] = reports / "amplitude_ratios.csv"
        _write_csv(p, ["algorithm", "function", "n_improved", "n_missed", "geo_mean_improved", "geo_mean_missed"], ratio_rows)
        p = paths["amplitude_ratio_hist"] = reports / "amplitude_ratio_hist.csv"
        _write_csv(p, ["algorithm", "function", "partition", "bin_left", "bin_right", "probability"], hist_rows)

    runtime = {a: [s.wall_time for s in summaries if s.algorithm == a] for a in algorithms if a in seen_algos}
    ref = sum(runtime.get(RUNTIME_REFERENCE, [])) or None
    p = paths["runtime"] = reports / "runtime.csv"
    _write_csv(
        p,
        ["algorithm", "total_wall_time", "mean_wall_time", "ratio"],
        [
            [a, repr(sum(t)), repr(sum(t) / len(t)), "" if ref is None else repr(1.0 if a == RUNTIME_REFERENCE else sum(t) / ref)]
            for a, t in runtime.items()
        ],
    )

    p = paths["failures"] = reports / "failures.csv"
    _write_csv(p, ["algorithm", "function", "run", "error"], [[c.algorithm, c.function, c.run, c.error] for c in failures])

    if plots and summaries:
        from . import plotting

        paths.update(plotting.render_campaign(summaries, hists, metric_rows, reports / "figures", algorithms, functions))
    return paths
