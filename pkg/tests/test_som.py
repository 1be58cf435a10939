import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relnet.errors import InputDomainError, ParameterError, StructuralError
from relnet.graph import RelationGraph, default_schedules
from relnet.som import DecaySchedule, SelfOrganizingMap, schedule_value, winner


def make_som(preferred, var):
    preferred = np.asarray(preferred, dtype=float)
    return SelfOrganizingMap(preferred, np.full(len(preferred), var), var_floor=1e-12)


def tuning_curve(s, w, var):
    # independent scalar evaluation of the tuning curve
    return math.exp(-((s - w) ** 2) / (2 * var)) / (math.sqrt(2 * math.pi) * math.sqrt(var))


class TestActivate:
    def test_peak_at_preferred(self):
        som = make_som([0.3], 1.0)
        assert som.activate([0.3])[0] == pytest.approx(1 / math.sqrt(2 * math.pi))
        assert som.activate([0.3])[0] == pytest.approx(0.398942, abs=1e-6)

    def test_one_sigma_point(self):
        xi = 0.2
        som = make_som([0.0], xi**2)
        expected = math.exp(-0.5) / (math.sqrt(2 * math.pi) * xi)
        assert som.activate([xi])[0] == pytest.approx(expected, rel=1e-12)

    def test_three_neuron_example(self):
        som = make_som([0.0, 0.5, 1.0], 0.01)
        expected = [tuning_curve(0.5, w, 0.01) for w in (0.0, 0.5, 1.0)]
        np.testing.assert_allclose(som.activate([0.5]), expected, rtol=1e-12)
        # frozen values from the oracle
        np.testing.assert_allclose(som.activate([0.5]), [1.4867195e-5, 3.9894228, 1.4867195e-5], rtol=1e-7)

    def test_vector_sample_uses_euclidean_distance(self):
        som = SelfOrganizingMap([[0.0, 0.0], [3.0, 4.0]], [1.0, 1.0], 1e-6)
        a = som.activate([0.0, 0.0])
        assert a[1] == pytest.approx(tuning_curve(5.0, 0.0, 1.0))

    @pytest.mark.parametrize("bad", [[np.nan], [np.inf], [0.1, 0.2]])
    def test_rejects_bad_samples(self, bad):
        with pytest.raises(InputDomainError):
            make_som([0.0, 1.0], 0.1).activate(bad)


class TestWinner:
    def test_unique_max(self):
        assert winner([0.1, 0.9, 0.3]) == 1

    def test_tie_goes_low(self):
        assert winner([0.5, 0.5]) == 0

    def test_from_activation(self):
        som = make_som([0.0, 0.5, 1.0], 0.01)
        assert winner(som.activate([0.5])) == 1

    def test_empty(self):
        with pytest.raises(StructuralError):
            winner([])

    @given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=30, unique=True), st.data())
    def test_consistent_with_activate(self, ints, data):
        prefs = [0.01 * v for v in ints]
        som = make_som(prefs, 0.05)
        i = data.draw(st.integers(0, len(prefs) - 1))
        assert winner(som.activate([prefs[i]])) == i


class TestKernel:
    def test_example(self):
        som = make_som(np.linspace(0, 1, 5), 0.1)
        h = som.interaction_kernel(2, 1.0)
        np.testing.assert_allclose(h, np.exp([-2, -0.5, 0, -0.5, -2]), rtol=1e-12)

    def test_one_sigma(self):
        som = make_som(np.linspace(0, 1, 10), 0.1)
        assert som.interaction_kernel(3, 2.0)[5] == pytest.approx(math.exp(-0.5))

    def test_bad_sigma(self):
        with pytest.raises(ParameterError):
            make_som([0, 1], 0.1).interaction_kernel(0, 0.0)

    @given(st.integers(1, 60), st.data(), st.floats(0.05, 50))
    def test_bounded_with_peak_at_winner(self, n, data, sigma):
        som = make_som(np.linspace(0, 1, n), 0.1)
        b = data.draw(st.integers(0, n - 1))
        h = som.interaction_kernel(b, sigma)
        # positive wherever exp() of the exponent is representable
        representable = (np.arange(n) - b) ** 2 / (2 * sigma**2) < 700
        assert np.all(h[representable] > 0) and np.all(h >= 0)
        assert np.all(h <= 1)
        assert h[b] == 1.0
        assert winner(h) == b


class TestAdapt:
    def test_full_step_moves_winner_to_sample(self):
        som = make_som([0.0, 0.4, 0.9], 0.01)
        som.adapt([0.45], 1.0, 1e-3)
        assert som.preferred[1, 0] == 0.45

    def test_zero_error_hits_floor(self):
        som = SelfOrganizingMap([0.2], [0.04], var_floor=1e-6)
        som.adapt([0.2], 1.0, 1.0)
        assert som.tuning_var[0] == 1e-6

    def test_hand_example(self):
        som = SelfOrganizingMap([0.0], [0.04], var_floor=1e-8)
        som.adapt([0.2], 0.5, 1.0)
        assert som.preferred[0, 0] == pytest.approx(0.1)
        assert som.tuning_var[0] == pytest.approx(0.04)

    def test_full_step_idempotent(self):
        som = make_som([0.0, 0.4, 0.9], 0.01)
        som.adapt([0.5], 1.0, 0.3)
        b = winner(som.activate([0.5]))
        before = som.preferred.copy()
        som.adapt([0.5], 1.0, 0.3)
        assert som.preferred[b, 0] == 0.5
        np.testing.assert_array_equal(som.preferred[b], before[b])

    def test_counts_steps(self):
        som = make_som([0.0, 1.0], 0.1)
        for _ in range(3):
            som.adapt([0.3], 0.1, 1.0)
        assert som.step_count == 3

    def test_rejects_bad_rate(self):
        with pytest.raises(ParameterError):
            make_som([0.0], 0.1).adapt([0.0], 1.5, 1.0)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=200), st.floats(0.01, 1), st.floats(0.1, 10))
    def test_state_stays_finite_and_positive(self, samples, alpha, sigma):
        som = SelfOrganizingMap.from_warmup(10, np.array(samples), np.random.default_rng(0))
        for s in samples:
            som.adapt([s], alpha, sigma)
        assert np.all(np.isfinite(som.preferred))
        assert np.all(som.tuning_var >= som.var_floor) and np.all(som.tuning_var > 0)
        np.testing.assert_array_equal(som.positions, np.arange(10))


class TestSchedule:
    def test_values(self):
        s = DecaySchedule(0.1, 0.01, 1000)
        assert schedule_value(s, 0) == 0.1
        assert s.value(1000) == pytest.approx(0.01 + 0.09 * math.exp(-1))
        assert s.value(1000) == pytest.approx(0.04311, abs=1e-5)
        assert s.value(10**7) == pytest.approx(0.01)

    @given(st.floats(0.01, 10), st.floats(0, 0.009), st.floats(1, 1e4), st.integers(0, 10**5))
    def test_decreasing_above_floor(self, initial, floor, tau, k):
        s = DecaySchedule(initial, floor, tau)
        assert s.value(k) >= floor
        assert s.value(k + 1) <= s.value(k)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            DecaySchedule(0.1, 0.0, 0.0)
        with pytest.raises(ParameterError):
            DecaySchedule(0.1, 0.0, 1.0).value(-1)


def _train_single(samples, n=50, seed=0):
    g = RelationGraph({"x": n, "y": n}, [("x", "y")], seed=seed, planned_steps=len(samples))
    g.fit({"x": samples, "y": samples})
    return g.som("x")


def test_quantization_error_decreases():
    rng = np.random.default_rng(11)
    x = rng.random(5000)
    sched = default_schedules(5000, 50)
    som = SelfOrganizingMap.from_warmup(50, x[:100], rng)
    errs = []
    for k, s in enumerate(x):
        b = winner(som.activate([s]))
        errs.append((s - som.preferred[b, 0]) ** 2)
        som.adapt([s], sched["alpha"].value(k), sched["sigma"].value(k))
    assert np.mean(errs[-500:]) < np.mean(errs[:500])


def test_density_adaptation():
    rng = np.random.default_rng(5)
    n = 20000
    u = rng.random(n)
    x = np.where(rng.random(n) < 0.8, 0.2 * u, 0.8 + 0.2 * u)
    som = _train_single(x, n=100, seed=5)
    w = som.preferred[:, 0]
    dense, sparse = w <= 0.2, w >= 0.8
    assert dense.sum() > sparse.sum()
    assert som.tuning_var[dense].mean() < som.tuning_var[sparse].mean()


def test_from_warmup_bounds():
    rng = np.random.default_rng(0)
    batch = rng.uniform(2.0, 3.0, 100)
    som = SelfOrganizingMap.from_warmup(20, batch, rng)
    assert som.preferred.min() >= batch.min() and som.preferred.max() <= batch.max()
    span = batch.max() - batch.min()
    np.testing.assert_allclose(som.tuning_var, (span / 20) ** 2)
    assert som.var_floor == pytest.approx((span * 1e-3) ** 2)
