import numpy as np
import pytest

from squadmds.core import RunConfig
from squadmds.errors import ConfigError, NonFiniteUpdate
from squadmds.linalg import seeded_rng
from squadmds.optimizer import (
    LrSchedule,
    OptimizerState,
    PermutationStream,
    embedding_span,
    initial_embedding,
    lr_at,
    nesterov_step,
    run_squad_mds,
)
from squadmds.quartet import full_relative_stress

# first three rows of a 50-iteration run on a fixed 12 x 5 sample (seed 3)
FROZEN_RUN = np.array([
    [1.2574694655916463, -0.2795833688819184],
    [1.1823722160520413, 8.767355400642945],
    [-1.7639427977855546, 0.7142501516944738],
])


def small_data(n=12, m=5, seed=7):
    return seeded_rng(seed).standard_normal((n, m))


class TestSchedule:
    def test_constant_when_a_is_zero(self):
        s = LrSchedule(0.3)
        assert [lr_at(s, t) for t in (0, 1, 100, 10**6)] == [0.3] * 4

    def test_decaying_reaches_tenth(self):
        s = LrSchedule.decaying(2.0, 500)
        assert lr_at(s, 0) == 2.0
        assert lr_at(s, 500) == pytest.approx(0.2, rel=1e-15)
        assert s.a == pytest.approx(9.0 / 500)

    def test_monotone(self):
        s = LrSchedule.decaying(1.0, 100, ratio=100.0)
        values = [lr_at(s, t) for t in range(101)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_invalid(self):
        with pytest.raises(ConfigError):
            LrSchedule(1.0, a=-1.0)
        with pytest.raises(ConfigError):
            LrSchedule(1.0, b=0.0)


class TestNesterovStep:
    def test_zero_momentum_is_plain_gradient_step(self):
        x = np.array([[1.0, 2.0], [3.0, -1.0]])
        state = OptimizerState(np.zeros((2, 2)), LrSchedule(0.1), gamma=0.0)
        new, state = nesterov_step(x, state, lambda y: 2 * y)
        np.testing.assert_allclose(new, 0.8 * x)
        assert state.t == 1

    def test_zero_gradient_with_zero_velocity_stays(self):
        x = np.array([[1.0, 2.0], [3.0, -1.0]])
        state = OptimizerState(np.zeros((2, 2)), LrSchedule(0.5))
        new, _ = nesterov_step(x, state, np.zeros_like)
        np.testing.assert_array_equal(new, x)

    def test_gradient_evaluated_at_lookahead(self):
        seen = []
        x = np.zeros((1, 2))
        state = OptimizerState(np.array([[1.0, -2.0]]), LrSchedule(0.1), gamma=0.5)

        def grad(y):
            seen.append(y.copy())
            return np.zeros_like(y)

        new, state = nesterov_step(x, state, grad)
        np.testing.assert_array_equal(seen[0], [[0.5, -1.0]])
        np.testing.assert_array_equal(new, [[0.5, -1.0]])
        np.testing.assert_array_equal(state.velocity, [[0.5, -1.0]])

    def test_quadratic_converges(self):
        x = np.array([[5.0, -3.0]])
        state = OptimizerState(np.zeros((1, 2)), LrSchedule(0.05), gamma=0.9)
        for _ in range(200):
            x, state = nesterov_step(x, state, lambda y: 2 * y)
        assert np.abs(x).max() < 1e-3

    def test_scalar_quadratic(self):
        # J = theta^2, gamma 0.9, eta 0.01, theta_0 = 1
        x = np.array([[1.0, 0.0]])
        state = OptimizerState(np.zeros((1, 2)), LrSchedule(0.01), gamma=0.9)
        for _ in range(200):
            x, state = nesterov_step(x, state, lambda y: 2 * y)
        assert abs(x[0, 0]) < 1e-3

    def test_inputs_untouched(self):
        x = np.ones((3, 2))
        v = np.full((3, 2), 0.1)
        state = OptimizerState(v, LrSchedule(0.1))
        nesterov_step(x, state, lambda y: y)
        np.testing.assert_array_equal(x, 1.0)
        np.testing.assert_array_equal(v, 0.1)

    def test_non_finite_raises(self):
        state = OptimizerState(np.zeros((1, 2)), LrSchedule(1.0), t=7)
        with pytest.raises(NonFiniteUpdate) as info:
            nesterov_step(np.zeros((1, 2)), state, lambda y: np.full_like(y, np.inf))
        assert info.value.iteration == 7

    def test_bad_momentum(self):
        with pytest.raises(ConfigError):
            OptimizerState(np.zeros((1, 2)), LrSchedule(1.0), gamma=1.0)


class TestPermutationStream:
    def test_each_row_is_a_permutation(self):
        stream = PermutationStream(seeded_rng(0), 9)
        perms = stream.take(100)
        for row in perms:
            assert sorted(row.tolist()) == list(range(9))

    def test_blockwise_equals_one_at_a_time(self):
        n = 30
        a = PermutationStream(seeded_rng(5), n)
        b = PermutationStream(seeded_rng(5), n)
        whole = np.concatenate([a.take(a.block).copy() for _ in range(3)])
        single = np.concatenate([b.take(1) for _ in range(3 * b.block)])
        np.testing.assert_array_equal(whole, single)

    def test_mixed_sizes(self):
        n = 20
        a = PermutationStream(seeded_rng(1), n)
        b = PermutationStream(seeded_rng(1), n)
        ref = a.take(150)
        parts = np.concatenate([b.take(k) for k in (3, 64, 1, 50, 32)])
        np.testing.assert_array_equal(ref, parts)

    def test_block_size_depends_only_on_n(self):
        assert PermutationStream(seeded_rng(0), 10).block == 64
        assert PermutationStream(seeded_rng(0), 1 << 20).block == 4
        assert PermutationStream(seeded_rng(0), 1 << 23).block == 1


class TestInitialEmbedding:
    def test_pca_is_deterministic(self):
        data = small_data()
        a = initial_embedding(data, RunConfig())
        b = initial_embedding(data, RunConfig(seed=99))
        np.testing.assert_array_equal(a, b)

    def test_target_std(self):
        y = initial_embedding(small_data(), RunConfig(), target_std=10.0)
        assert np.std(y) == pytest.approx(10.0, rel=1e-12)

    def test_constant_data_falls_back_to_random(self):
        from squadmds.core import validate_dataset

        y = initial_embedding(validate_dataset(np.ones((10, 3))), RunConfig())
        assert y.shape == (10, 2)
        assert np.all(np.abs(y) <= 1.0)
        assert embedding_span(y) > 0

    def test_random_init_uses_seed(self):
        data = small_data()
        a = initial_embedding(data, RunConfig(init="random", seed=1))
        b = initial_embedding(data, RunConfig(init="random", seed=2))
        assert not np.array_equal(a, b)


class TestRunSquadMds:
    def test_frozen_run(self):
        y = run_squad_mds(small_data(), RunConfig(iterations=50, seed=3))
        np.testing.assert_allclose(y[:3], FROZEN_RUN, rtol=1e-12, atol=1e-12)

    def test_four_points_reach_zero_stress(self):
        # a planar quartet can be embedded exactly
        hd = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 1.0, 0.0], [0.3, 1.4, 0.0]])
        y = run_squad_mds(hd, RunConfig(iterations=2000, seed=0, init="random"))
        assert full_relative_stress(hd, y) < 1e-6

    def test_stress_drops_from_start(self):
        data = small_data(40, 6)
        start = initial_embedding(data, RunConfig(init="random", seed=0))
        y = run_squad_mds(data, RunConfig(iterations=500, seed=0), init=start)
        assert full_relative_stress(data, y) < 0.5 * full_relative_stress(data, start)

    @pytest.mark.slow
    def test_full_run_beats_pca_start(self):
        from squadmds import datasets

        data = datasets.gaussian_blob(200, m=10, seed=0)
        start = initial_embedding(data, RunConfig())
        y = run_squad_mds(data, RunConfig(iterations=5000, seed=0))
        sub = np.linspace(0, 199, 64).astype(int)
        assert full_relative_stress(data.points[sub], y[sub]) < full_relative_stress(data.points[sub], start[sub])

    def test_deterministic(self):
        data = small_data(50, 4)
        cfg = RunConfig(iterations=100, seed=11)
        np.testing.assert_array_equal(run_squad_mds(data, cfg), run_squad_mds(data, cfg))

    def test_seed_matters(self):
        data = small_data(50, 4)
        a = run_squad_mds(data, RunConfig(iterations=100, seed=1))
        b = run_squad_mds(data, RunConfig(iterations=100, seed=2))
        assert not np.array_equal(a, b)

    def test_parallel_matches_sequential(self):
        data = small_data(203, 7)
        a = run_squad_mds(data, RunConfig(iterations=120, seed=4, workers=1))
        b = run_squad_mds(data, RunConfig(iterations=120, seed=4, workers=4))
        np.testing.assert_array_equal(a, b)

    def test_scale_of_data_does_not_matter(self):
        data = small_data(60, 5)
        a = run_squad_mds(data, RunConfig(iterations=200, seed=0))
        b = run_squad_mds(1000.0 * data, RunConfig(iterations=200, seed=0))
        np.testing.assert_allclose(1000.0 * a, b, rtol=1e-6, atol=1e-6 * np.abs(b).max())

    def test_telemetry(self):
        records = []
        run_squad_mds(small_data(), RunConfig(iterations=70, seed=0), telemetry=records.append)
        assert [r["iteration"] for r in records] == list(range(70))
        assert set(records[0]) == {"iteration", "eta", "grad_norm_mean", "grad_norm_std", "stress"}
        assert records[0]["eta"] > records[-1]["eta"]

    def test_init_overrides_config(self):
        data = small_data()
        init = seeded_rng(0).standard_normal((12, 2))
        a = run_squad_mds(data, RunConfig(iterations=10, init="pca"), init=init)
        b = run_squad_mds(data, RunConfig(iterations=10, init="random"), init=init)
        np.testing.assert_array_equal(a, b)

    def test_leftover_points_still_move(self):
        data = small_data(13, 3)
        y = run_squad_mds(data, RunConfig(iterations=20, seed=0))
        assert np.isfinite(y).all() and y.shape == (13, 2)

    def test_zero_lr_rejected(self):
        with pytest.raises(ConfigError):
            run_squad_mds(small_data(), RunConfig(lr_mds=0.0))
