import numpy as np
import pytest

from fwa.core import AlgorithmConfig, Attribution, EvaluationLedger, Firework, init_swarm
from fwa.objectives import make_objective
from fwa.operators import SparkBatch
from fwa.telemetry import (
    AmplitudeRecord,
    ImprovementEvent,
    amplitude_ratio_histogram,
    compute_significance_metrics,
    read_events_csv,
    read_ratios_csv,
    record_significant_improvement,
    update_gcf_set,
    write_events_csv,
    write_ratios_csv,
)

SPHERE2 = make_objective("sphere", 2)


def _two_firework_swarm():
    st = init_swarm(AlgorithmConfig(e_max=1000, n_fireworks=2), SPHERE2, 0)
    st.fireworks[0].position, st.fireworks[0].fitness = np.array([1.0, 0.0]), 1.0
    st.fireworks[1].position, st.fireworks[1].fitness = np.array([3.0, 0.0]), 9.0
    st.refresh_cf()
    st.gcf_members = {st.cf.id}
    return st


def _batch(fid, points, kind="explosion"):
    P = np.array(points, dtype=float)
    return SparkBatch(fid, P, np.sum(P**2, axis=1), kind)


def test_event_credited_to_cf():
    st = _two_firework_swarm()
    cf, other = st.fireworks
    log = record_significant_improvement([_batch(cf.id, [[0.5, 0.0]]), _batch(other.id, [[2.0, 0.0]])], st, [])
    assert len(log) == 1
    assert log[0].credited_firework_id == cf.id and log[0].credited_is_cf and log[0].credited_is_gcf


def test_no_event_without_improvement():
    st = _two_firework_swarm()
    cf, other = st.fireworks
    log = record_significant_improvement([_batch(cf.id, [[1.5, 0.0]]), _batch(other.id, [[2.0, 0.0]])], st, [])
    assert log == []


def test_event_credited_to_non_cf():
    st = _two_firework_swarm()
    cf, other = st.fireworks
    log = record_significant_improvement([_batch(cf.id, [[1.2, 0.0]]), _batch(other.id, [[0.1, 0.0]])], st, [])
    assert len(log) == 1
    ev = log[0]
    assert ev.credited_firework_id == other.id and not ev.credited_is_cf and not ev.credited_is_gcf
    assert ev.evals_at_event == st.evals_used


def test_gaussian_batches_ignored():
    st = _two_firework_swarm()
    cf, _ = st.fireworks
    log = record_significant_improvement([_batch(cf.id, [[0.0, 0.0]], kind="gaussian"), _batch(cf.id, [[2.0, 0.0]])], st, [])
    assert log == []


def _fw(fid, f, parent=None):
    return Firework(fid, np.zeros(2), f, 1.0, parent)


def test_gcf_after_improvement_by_non_cf():
    # CF = 1, F2 = 2; best spark (id 10) from F2 beats the CF
    selected = [_fw(10, 0.1, parent=2), _fw(2, 4.0), _fw(11, 3.0, parent=1), _fw(3, 9.0)]
    members = update_gcf_set(1, 1.0, {1}, 0.1, 2, selected, born_this_iteration={10, 11})
    assert members == {10, 2}


def test_gcf_without_improvement():
    # CF = 1 stays best; its spark 12 is selected, 3 was already a member, 4 was not
    selected = [_fw(1, 1.0), _fw(12, 2.0, parent=1), _fw(3, 5.0), _fw(4, 6.0), _fw(13, 7.0, parent=4)]
    members = update_gcf_set(1, 1.0, {1, 3}, 1.5, 1, selected, born_this_iteration={12, 13})
    assert members == {1, 12, 3}


def test_gcf_initially_cf():
    st = init_swarm(AlgorithmConfig(e_max=100), SPHERE2, 4)
    assert st.gcf_members == {st.cf.id}


def test_metrics_alpha_beta():
    events = [ImprovementEvent(100, 1, True, True), ImprovementEvent(5000, 2, False, False)]
    m = compute_significance_metrics(events, EvaluationLedger(), 6000)
    assert m.alpha_cf == 0.5 and m.beta_cf == 0.0
    assert m.alpha_gcf == 0.5 and m.beta_gcf == 0.0
    assert m.theta_cf is None


def test_metrics_all_cf():
    events = [ImprovementEvent(e, 1, True, True) for e in (10, 500, 900)]
    m = compute_significance_metrics(events, EvaluationLedger(), 1000)
    assert m.alpha_cf == 1.0 and m.beta_cf == 1.0


def test_metrics_theta():
    led = EvaluationLedger(init_evals=5)
    for it in range(10):
        led.record(it, Attribution(1, "explosion", True, True), 90)
        led.record(it, Attribution(2, "explosion", False, False), 40)
        led.record(it, Attribution(3, "explosion", False, True), 20)
    m = compute_significance_metrics([], led, 10_000)
    assert m.theta_cf == pytest.approx(0.6, abs=1e-12)
    assert m.theta_gcf == pytest.approx(110 / 150, abs=1e-12)
    assert m.alpha_cf is None and m.beta_cf is None


def test_ratio_histogram_dynamic_spikes():
    trace = [AmplitudeRecord(i, 1.0, 1.2 if i % 3 == 0 else 0.9, i % 3 == 0) for i in range(30)]
    h = amplitude_ratio_histogram(trace)
    assert h.geo_mean_improved == pytest.approx(1.2) and h.geo_mean_missed == pytest.approx(0.9)
    probs, edges = h.improved
    assert len(probs) == 50 and probs.max() == 1.0


def test_ratio_histogram_empty_partition():
    h = amplitude_ratio_histogram([AmplitudeRecord(0, 1.0, 1.3, True)])
    assert h.geo_mean_missed is None and h.missed is None
    assert h.geo_mean_improved == pytest.approx(1.3)
    with pytest.raises(ValueError):
        amplitude_ratio_histogram([])


def test_ratio_histogram_near_identical_values():
    trace = [AmplitudeRecord(0, 3.0, 3.6, True), AmplitudeRecord(1, 0.7, 0.84, True)]
    h = amplitude_ratio_histogram(trace)
    assert h.improved[0].sum() == pytest.approx(1.0)


def test_csv_round_trip(tmp_path):
    events = [ImprovementEvent(150, 3, True, True), ImprovementEvent(900, 4, False, True)]
    write_events_csv(tmp_path / "e.csv", events)
    assert read_events_csv(tmp_path / "e.csv") == events
    trace = [AmplitudeRecord(0, 3.0, 3.6, True), AmplitudeRecord(1, 3.6, 3.6 * 0.9, False, True)]
    write_ratios_csv(tmp_path / "r.csv", trace)
    rows = read_ratios_csv(tmp_path / "r.csv")
    assert [(r[0], r[2], r[3]) for r in rows] == [(0, True, False), (1, False, True)]
    assert [r[1] for r in rows] == [t.ratio for t in trace]
