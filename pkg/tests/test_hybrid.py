import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from squadmds import datasets
from squadmds.core import RunConfig
from squadmds.errors import ConfigError, DimensionMismatch
from squadmds.hybrid import BlendConfig, blend, normalize_by_norm_std, run_hybrid
from squadmds.linalg import seeded_rng
from squadmds.optimizer import LrSchedule, embedding_span, initial_embedding, run_squad_mds
from squadmds.tsne import multiscale_similarities, run_tsne


def norm_std(g):
    return float(np.std(np.linalg.norm(g, axis=1)))


class TestNormalize:
    def test_unit_norm_std(self, rng):
        g = rng.standard_normal((50, 2)) * 37.0
        assert norm_std(normalize_by_norm_std(g)) == pytest.approx(1.0, rel=1e-12)

    @given(st.floats(1e-6, 1e6))
    def test_scale_invariant(self, c):
        g = seeded_rng(0).standard_normal((20, 2))
        np.testing.assert_allclose(normalize_by_norm_std(c * g), normalize_by_norm_std(g), rtol=1e-9)

    def test_zero_rows_unchanged(self):
        np.testing.assert_array_equal(normalize_by_norm_std(np.zeros((5, 2))), 0.0)

    def test_population_std_convention(self):
        # norms {1, 3}: population std is 1, so the rows are unchanged
        g = np.array([[1.0, 0.0], [0.0, 3.0]])
        np.testing.assert_allclose(normalize_by_norm_std(g), g, rtol=1e-15)

    def test_equal_norms_floor(self):
        # all norms equal: std is 0 and the floor keeps the result finite
        g = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
        out = normalize_by_norm_std(g, eps=1e-12)
        assert np.isfinite(out).all()

    def test_input_untouched(self):
        g = np.array([[3.0, 4.0], [0.0, 1.0]])
        normalize_by_norm_std(g)
        np.testing.assert_array_equal(g, [[3.0, 4.0], [0.0, 1.0]])

    def test_wrong_shape(self):
        with pytest.raises(DimensionMismatch):
            normalize_by_norm_std(np.zeros((4, 3)))


class TestBlend:
    def setup_method(self):
        rng = seeded_rng(1)
        self.g_mds = rng.standard_normal((30, 2)) * 1e-3
        self.g_tsne = rng.standard_normal((30, 2)) * 1e2

    def test_mds_only(self):
        out = blend(self.g_mds, self.g_tsne, BlendConfig(lr_mds=0.5, lr_tsne=0.0), 0)
        np.testing.assert_allclose(out, 0.5 * normalize_by_norm_std(self.g_mds))

    def test_tsne_only(self):
        out = blend(self.g_mds, self.g_tsne, BlendConfig(lr_mds=0.0, lr_tsne=1.0), 0)
        np.testing.assert_allclose(out, normalize_by_norm_std(self.g_tsne))

    def test_equal_weights_balance_arms(self):
        cfg = BlendConfig(lr_mds=1.0, lr_tsne=1.0)
        out = blend(self.g_mds, self.g_tsne, cfg, 0)
        expected = normalize_by_norm_std(self.g_mds) + normalize_by_norm_std(self.g_tsne)
        np.testing.assert_allclose(out, expected)
        # neither arm dominates despite raw magnitudes 1e5 apart
        assert norm_std(normalize_by_norm_std(self.g_mds)) == pytest.approx(
            norm_std(normalize_by_norm_std(self.g_tsne)))

    def test_default_weights_at_start(self):
        g_mds = np.array([[1.0, 0.0], [0.0, 3.0]])
        g_tsne = np.array([[0.0, -3.0], [1.0, 0.0]])
        out = blend(g_mds, g_tsne, BlendConfig(), 0)
        np.testing.assert_allclose(out, 1.0 * g_tsne + 0.5 * g_mds, rtol=1e-15)

    def test_arms_cancel(self):
        g_mds = np.array([[1.0, 0.0], [0.0, 3.0]])
        g_tsne = -g_mds
        out = blend(g_mds, g_tsne, BlendConfig(lr_mds=1.0, lr_tsne=1.0), 0)
        np.testing.assert_array_equal(out, 0.0)

    def test_decayed_schedules(self):
        cfg = BlendConfig()
        schedules = cfg.schedules(100)
        out = blend(self.g_mds, self.g_tsne, cfg, 100, schedules)
        expected = 0.1 * normalize_by_norm_std(self.g_tsne) + 0.05 * normalize_by_norm_std(self.g_mds)
        np.testing.assert_allclose(out, expected, rtol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            blend(self.g_mds, self.g_tsne[:10], BlendConfig(), 0)

    def test_both_zero_rejected(self):
        with pytest.raises(ConfigError):
            BlendConfig(lr_mds=0.0, lr_tsne=0.0)


class TestRunHybrid:
    def test_without_tsne_equals_squad_mds(self):
        data = seeded_rng(0).standard_normal((101, 6))
        init = initial_embedding(data, RunConfig())
        standalone = run_squad_mds(data, RunConfig(iterations=150, seed=5), init=init)
        eta0 = 0.05 * embedding_span(init)
        hybrid = run_hybrid(data, RunConfig(method="hybrid", iterations=150, seed=5, lr_tsne=0.0, lr_mds=eta0),
                            init=init)
        np.testing.assert_array_equal(hybrid, standalone)

    def test_without_mds_equals_tsne(self):
        data = seeded_rng(2).standard_normal((70, 4))
        cfg = dict(iterations=60, seed=1, perplexities=(5.0, 15.0))
        a = run_hybrid(data, RunConfig(method="hybrid", lr_mds=0.0, **cfg))
        b = run_tsne(data, RunConfig(method="tsne", **cfg))
        np.testing.assert_array_equal(a, b)

    def test_deterministic(self):
        data = datasets.hierarchical_mixture(120, n_macro=3, n_sub=2, seed=0)
        cfg = RunConfig(method="hybrid", iterations=80, seed=9, perplexities=(4.0, 20.0))
        np.testing.assert_array_equal(run_hybrid(data, cfg), run_hybrid(data, cfg))

    def test_parallel_matches_sequential(self):
        data = datasets.hierarchical_mixture(150, n_macro=3, n_sub=2, seed=1)
        cfg = dict(method="hybrid", iterations=60, seed=2, perplexities=(4.0, 20.0))
        a = run_hybrid(data, RunConfig(workers=1, **cfg))
        b = run_hybrid(data, RunConfig(workers=4, **cfg))
        np.testing.assert_array_equal(a, b)

    def test_precomputed_similarities(self):
        data = seeded_rng(3).standard_normal((60, 4))
        cfg = RunConfig(method="hybrid", iterations=30, perplexities=(4.0, 12.0))
        sims = multiscale_similarities(data, cfg.perplexities)
        np.testing.assert_array_equal(run_hybrid(data, cfg), run_hybrid(data, cfg, similarities=sims))

    def test_steps_stay_bounded(self):
        # the normalised blend cannot blow up: no point moves further than
        # a few multiples of the initial spread in one step
        data = datasets.two_clusters(200, seed=0)
        records = []
        y = run_hybrid(data, RunConfig(method="hybrid", iterations=200, perplexities=(4.0, 30.0)),
                       telemetry=records.append)
        assert np.isfinite(y).all()
        assert max(r["move_max"] for r in records) < 50.0
        assert {"eta_mds", "eta_tsne", "stress", "blend_norm_mean"} <= set(records[0])

    def test_similarity_size_mismatch(self):
        data = seeded_rng(3).standard_normal((60, 4))
        sims = multiscale_similarities(data[:50], (4.0,))
        with pytest.raises(DimensionMismatch):
            run_hybrid(data, RunConfig(method="hybrid", iterations=2, perplexities=(4.0,)), similarities=sims)

    def test_perplexity_checked(self):
        with pytest.raises(ConfigError):
            run_hybrid(seeded_rng(0).standard_normal((20, 3)), RunConfig(method="hybrid"))

    def test_sparse_mode_runs(self):
        data = datasets.hierarchical_mixture(300, n_macro=3, n_sub=2, seed=0)
        y = run_hybrid(data, RunConfig(method="hybrid", iterations=50, sparse_similarities=True,
                                       perplexities=(4.0, 20.0)))
        assert y.shape == (300, 2) and np.isfinite(y).all()

    def test_exaggeration_changes_run(self):
        data = seeded_rng(4).standard_normal((60, 4))
        cfg = dict(method="hybrid", iterations=40, perplexities=(5.0,))
        a = run_hybrid(data, RunConfig(**cfg))
        b = run_hybrid(data, RunConfig(exaggeration=4.0, **cfg))
        assert not np.array_equal(a, b)


def test_schedule_shape_shared():
    mds, tsne = BlendConfig(0.5, 1.0).schedules(750)
    assert mds == LrSchedule.decaying(0.5, 750)
    assert tsne == LrSchedule.decaying(1.0, 750)
