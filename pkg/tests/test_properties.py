"""Property tests for the invariants of the mixing, push-sum and optimization layers."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from subgradpush.graph import Digraph, RandomBConnectedSequence, window_verdicts
from subgradpush.mixing import ConnectivityParams, build_mixing, column_sum_error, measure_delta, theoretical_params
from subgradpush.objectives import ObjectiveSpec, weighted_median_interval
from subgradpush.pushsum import DecayingPerturbation, SequencePerturbation, ZeroPerturbation, run_pushsum
from subgradpush.schedule import StepSchedule
from subgradpush.sgp import lemma9_bound, run_sgp, theorem2_bound

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@st.composite
def digraphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    mask = draw(arrays(bool, (n, n)))
    np.fill_diagonal(mask, False)
    rows, cols = np.nonzero(mask)
    return Digraph(n, frozenset(zip(rows.tolist(), cols.tolist())))


@st.composite
def sequences(draw):
    n = draw(st.integers(1, 8))
    B = draw(st.integers(1, 3))
    return RandomBConnectedSequence(n, B, seed=draw(st.integers(0, 2**32)), p=draw(st.floats(0, 0.6)))


@given(digraphs())
def test_mixing_column_stochastic(g):
    a = build_mixing(g)
    assert column_sum_error(a) <= 1e-12
    assert a.min() >= 0
    assert np.all(np.diag(a) > 0)


@settings(max_examples=40, deadline=None)
@given(sequences())
def test_generator_windows_connected(seq):
    assert all(window_verdicts(seq, seq.B, 12))


@settings(max_examples=40, deadline=None)
@given(sequences())
def test_delta_lower_bound(seq):
    assert measure_delta(seq, 60) >= theoretical_params(seq.n, seq.B).delta


@settings(max_examples=40, deadline=None)
@given(sequences(), st.integers(1, 3), st.integers(0, 2**31))
def test_pushsum_conservation(seq, d, seed):
    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=(seq.n, d)) * 10
    noise = rng.normal(size=(41, seq.n, d))
    tr = run_pushsum(seq, x0, SequencePerturbation(noise), 40)
    assert tr.y_sum_error() <= 1e-10
    assert tr.mass_identity_error() <= 1e-9
    assert tr.y.min() > 0


@settings(max_examples=30, deadline=None)
@given(sequences(), st.integers(0, 2**31))
def test_lemma1_theoretical_holds(seq, seed):
    x0 = np.random.default_rng(seed).normal(size=(seq.n, 1))
    from subgradpush.pushsum import lemma1_bounds

    eps = DecayingPerturbation(0.5, signs=np.where(np.arange(seq.n) % 2, -1.0, 1.0))
    for source in (ZeroPerturbation(), eps):
        tr = run_pushsum(seq, x0, source, 60)
        b = lemma1_bounds(tr, theoretical_params(seq.n, seq.B))
        assert np.all(tr.track_err[1:] <= b[:, None])


@given(st.lists(finite, min_size=1, max_size=9), st.data())
def test_weighted_median_minimizes(values, data):
    w = data.draw(st.lists(st.floats(0.1, 5), min_size=len(values), max_size=len(values)))
    lo, hi = weighted_median_interval(values, w)
    f = lambda z: float(np.dot(w, np.abs(np.asarray(values) - z)))
    best = min(f(lo), f(hi))
    assert abs(f(lo) - f(hi)) <= 1e-9 * max(1.0, best)
    for z in np.linspace(min(values) - 1, max(values) + 1, 41):
        assert f(z) >= best - 1e-9 * max(1.0, best)


@given(st.sampled_from(["l1-distance", "huber", "linear-clipped"]), st.integers(1, 3), st.data())
def test_subgradient_inequality(family, d, data):
    n = 3
    vec = arrays(float, (n, d), elements=finite)
    spec = ObjectiveSpec(family, data.draw(vec), scales=data.draw(arrays(float, n, elements=st.floats(0, 3))))
    z = data.draw(vec)
    v = data.draw(arrays(float, d, elements=finite))
    g = spec.subgradients(z)
    for i in range(n):
        lhs = spec.value(i, v)
        rhs = spec.value(i, z[i]) + g[i] @ (v - z[i])
        assert lhs >= rhs - 1e-9 * max(1.0, abs(lhs))
        assert np.linalg.norm(g[i]) <= spec.L[i] + 1e-12


@settings(max_examples=25, deadline=None)
@given(sequences(), st.integers(0, 2**31))
def test_sgp_identities(seq, seed):
    rng = np.random.default_rng(seed)
    spec = ObjectiveSpec("l1-distance", rng.uniform(-5, 5, size=(seq.n, 2)))
    v = rng.uniform(-6, 6, size=(3, 2))
    tr = run_sgp(seq, spec, StepSchedule(), rng.normal(size=(seq.n, 2)), 120,
                 monitors=("avdone", "ztilde", "lemma8"), v_points=v)
    assert tr.violations() == 0, tr.monitors


@settings(max_examples=15, deadline=None)
@given(sequences(), st.integers(0, 2**31))
def test_sgp_rate_bounds(seq, seed):
    anchors = np.random.default_rng(seed).integers(-5, 6, size=seq.n).astype(float)
    tr = run_sgp(seq, ObjectiveSpec("abs-deviation", anchors), StepSchedule(), None, 150,
                 monitors=("theorem2", "lemma9"), params=theoretical_params(seq.n, seq.B))
    assert tr.violations() == 0


@given(st.integers(2, 30), st.floats(1e-3, 1.0), st.floats(0.0, 0.999),
       st.integers(1, 10**6), st.integers(0, 2**31))
def test_lemma9_below_theorem2(n, delta, lam, t, seed):
    rng = np.random.default_rng(seed)
    spec = ObjectiveSpec("abs-deviation", rng.normal(size=n), scales=rng.uniform(0, 2, size=n))
    p = ConnectivityParams.from_lambda(delta, lam, 4.0)
    x0 = rng.normal(size=(n, 1))
    z = rng.normal(size=1)
    assert lemma9_bound(spec, p, x0, z, t) <= theorem2_bound(spec, p, x0, z, t) * (1 + 1e-12)
