import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fwa import AlgorithmConfig, make_suite, run_algorithm
from fwa.amplitude import afwa_update, dyn_update, inf_norm, meacs_min_amplitude
from fwa.core import Firework, RngStream
from fwa.objectives import SUITE_NAMES, evaluate_batch, evaluate_objective
from fwa.operators import compute_amplitudes, compute_spark_counts, explosion_sparks, gaussian_sparks
from fwa.selection import elitism_random_select, independent_select
from fwa.stats import rank_table, wilcoxon_signed_rank

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
fitness_vectors = arrays(np.float64, st.integers(1, 12), elements=st.floats(0, 1e6, allow_nan=False))
seeds = st.integers(0, 2**32 - 1)


@given(fitness_vectors, st.floats(0.1, 1e3))
def test_amplitudes_positive_best_smallest(f, amp):
    a = compute_amplitudes(f, amp)
    assert np.all(a > 0)
    assert a[np.argmin(f)] == a.min()


@given(fitness_vectors, st.integers(10, 500))
def test_counts_clamped_best_gets_most(f, total):
    c = compute_spark_counts(f, total, 0.04, 0.8)
    lo = max(1, int(np.floor(0.04 * total + 0.5)))
    hi = int(np.floor(0.8 * total + 0.5))
    assert np.all((c >= lo) & (c <= hi))
    assert c[np.argmin(f)] == c.max()


@given(seeds, st.integers(1, 6), st.floats(1e-6, 500))
def test_explosion_sparks_feasible(seed, d, amp):
    rng = RngStream(seed)
    lo, hi = np.full(d, -5.0), np.full(d, 5.0)
    centers = rng.uniform(lo, hi, (20, d))
    s = explosion_sparks(centers, np.full(20, amp), lo, hi, rng)
    assert np.all((s >= lo) & (s <= hi))


@given(seeds, st.integers(1, 6))
def test_gaussian_sparks_feasible(seed, d):
    rng = RngStream(seed)
    lo, hi = np.full(d, -1.0), np.full(d, 1.0)
    sel = rng.uniform(lo, hi, (30, d))
    s = gaussian_sparks(sel, rng.uniform(lo, hi, d), lo, hi, rng)
    assert np.all((s >= lo) & (s <= hi))


@given(st.integers(1, 8).flatmap(lambda d: st.tuples(*(arrays(np.float64, d, elements=finite) for _ in range(3)))))
def test_inf_norm_metric(vs):
    a, b, c = vs
    assert inf_norm(a, b) == inf_norm(b, a) >= 0
    assert inf_norm(a, c) <= inf_norm(a, b) + inf_norm(b, c) + 1e-9


@given(st.floats(1e-6, 1e3), st.booleans())
def test_dyn_update_bounded(a, improved):
    out = dyn_update(a, improved, 1.2, 0.9, upper=200.0)
    assert 0 < out <= 200.0


@given(seeds, st.floats(1e-3, 10), st.floats(0.5, 2.0))
def test_afwa_minimal_not_above_literal(seed, a, lam):
    rng = np.random.default_rng(seed)
    sparks = rng.uniform(-5, 5, (12, 3))
    f = np.sum(sparks**2, axis=1)
    best = sparks[np.argmin(f)]
    cf_f = float(np.median(f))
    lit = afwa_update(a, cf_f, sparks, f, best, lam, mode="literal")
    mini = afwa_update(a, cf_f, sparks, f, best, lam, mode="minimal")
    assert mini <= lit
    assert lit >= 0.5 * a * (1 + lam) - 1e-12


@given(st.integers(1, 10**6), st.floats(0, 1), st.floats(0.01, 10), st.floats(0.001, 0.009))
def test_meacs_between_bounds(e_max, frac, a_init, a_final):
    t = frac * e_max
    v = meacs_min_amplitude(t, e_max, a_init, a_final)
    assert a_final - 1e-12 <= v <= a_init + 1e-12


@given(fitness_vectors.filter(lambda f: len(f) >= 2), seeds, st.data())
def test_erp_best_first_unique(f, seed, data):
    n = data.draw(st.integers(1, len(f)))
    idx = elitism_random_select(f, n, RngStream(seed))
    assert len(set(idx)) == n == len(idx)
    assert f[idx[0]] == f.min()


@given(arrays(np.float64, st.integers(0, 10), elements=st.floats(-100, 100)), st.floats(-100, 100))
def test_independent_select_never_worse(fs, f0):
    fw = Firework(3, np.zeros(2), f0, 1.0)
    out = independent_select(fw, np.ones((len(fs), 2)), fs)
    assert out.fitness <= f0 and out.id == 3


@given(
    st.integers(5, 40).flatmap(
        lambda n: st.tuples(
            arrays(np.float64, n, elements=st.floats(-50, 50)),
            arrays(np.float64, n, elements=st.floats(-50, 50)),
        )
    )
)
def test_wilcoxon_p_range_and_symmetry(ab):
    a, b = ab
    r1, r2 = wilcoxon_signed_rank(a, b), wilcoxon_signed_rank(b, a)
    assert 0 < r1.pvalue <= 1
    assert r1.pvalue == r2.pvalue


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(-10, 10)))
def test_rank_rows_are_competition_ranks(m):
    ranks, ar = rank_table(m)
    k = m.shape[1]
    for row, r in zip(m, ranks):
        assert r.min() == 1 and r.max() <= k
        for j in range(k):
            assert r[j] == 1 + np.sum(row < row[j])
    assert np.allclose(ar, ranks.mean(axis=0))


@given(st.sampled_from(SUITE_NAMES), seeds, st.integers(2, 6))
def test_batch_equals_pointwise(name, seed, d):
    (spec,) = [s for s in make_suite(d, seed % 1000) if s.name == name]
    X = np.random.default_rng(seed).uniform(spec.lower, spec.upper, (4, d))
    assert np.array_equal(evaluate_batch(spec, X), [evaluate_objective(spec, x) for x in X])


@given(st.sampled_from(["efwa", "dynfwa-ng", "afwa", "mfwa", "coffwa"]), seeds, st.integers(20, 400))
def test_budget_always_exact(name, seed, budget):
    spec = make_suite(2, 0)[0]
    r = run_algorithm(name, AlgorithmConfig(e_max=budget + 5), spec, seed)
    assert r.evals_used == r.e_max
    assert r.ledger.init_evals + r.ledger.attributed == r.evals_used
