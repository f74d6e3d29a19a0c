import numpy as np
import pytest

from archpairs.errors import ConfigError, FormatError
from archpairs.textcnn import (
    CnnConfig,
    cnn_forward,
    cnn_train,
    grad_check,
    init_weights,
    load_weights,
    save_weights,
)
from archpairs.textcnn.model import _run_forward

RNG = np.random.default_rng(2024)


def small_config(**over):
    defaults = dict(embed_dim=8, branch_kernels=(2, 3), filters_per_branch=3,
                    projection_dim=5, seed=0)
    defaults.update(over)
    return CnnConfig(**defaults)


def zeroed(weights):
    for arr in weights.arrays():
        arr[...] = 0.0
    return weights


class TestForward:
    def test_zero_weights_propagate(self):
        cfg = small_config()
        w = zeroed(init_weights(cfg))
        w.proj_b[...] = np.arange(cfg.projection_dim, dtype=np.float64)
        w.head_b[...] = 0.7
        z, score = cnn_forward(RNG.normal(size=(6, cfg.embed_dim)), w)
        assert np.array_equal(z, w.proj_b)
        assert score == pytest.approx(1.0 / (1.0 + np.exp(-0.7)))

    def test_minimal_length_input(self):
        cfg = small_config(branch_kernels=(2, 2))
        w = init_weights(cfg)
        z, score = cnn_forward(RNG.normal(size=(2, cfg.embed_dim)), w)
        assert z.shape == (cfg.projection_dim,)
        assert 0.0 < score < 1.0

    @pytest.mark.parametrize("t", [2, 5, 50])
    def test_relevance_preset_emits_256(self, t):
        cfg = CnnConfig.sentence_relevance(embed_dim=12, filters_per_branch=4)
        w = init_weights(cfg)
        z, _ = cnn_forward(RNG.normal(size=(t, 12)), w)
        assert z.shape == (256,)

    def test_too_short_input_rejected(self):
        cfg = small_config(branch_kernels=(4,))
        w = init_weights(cfg)
        with pytest.raises(ConfigError, match="shorter"):
            cnn_forward(RNG.normal(size=(3, cfg.embed_dim)), w)

    def test_wrong_embed_dim_rejected(self):
        cfg = small_config()
        w = init_weights(cfg)
        with pytest.raises(ConfigError):
            cnn_forward(RNG.normal(size=(5, cfg.embed_dim + 1)), w)

    def test_score_strictly_inside_unit_interval(self):
        cfg = small_config()
        w = init_weights(cfg)
        for _ in range(10):
            _, score = cnn_forward(RNG.normal(size=(4, cfg.embed_dim)) * 10, w)
            assert 0.0 < score < 1.0

    def test_swapping_rows_outside_every_argmax_is_invisible(self):
        cfg = small_config(branch_kernels=(1,), filters_per_branch=2)
        w = init_weights(cfg)
        x = RNG.normal(size=(6, cfg.embed_dim))
        state = _run_forward(x, w)
        winners = set(int(i) for i in state.amax[0])
        losers = [i for i in range(6) if i not in winners]
        assert len(losers) >= 2
        y = x.copy()
        y[[losers[0], losers[1]]] = y[[losers[1], losers[0]]]
        z1, s1 = cnn_forward(x, w)
        z2, s2 = cnn_forward(y, w)
        # h=1 kernels: pooled values depend only on the winning rows
        assert np.allclose(z1, z2) and s1 == pytest.approx(s2)

    def test_maxpool_dominance(self):
        cfg = small_config(branch_kernels=(1,), filters_per_branch=1)
        w = init_weights(cfg)
        x = np.abs(RNG.normal(size=(4, cfg.embed_dim))) + 0.1
        w.conv_w[0][...] = np.abs(w.conv_w[0]) + 0.1  # all-positive activations
        state = _run_forward(x, w)
        t_star = int(state.amax[0][0])
        pooled_before = state.pooled[0][0]
        x2 = x.copy()
        x2[t_star] *= 2.0
        state2 = _run_forward(x2, w)
        assert state2.pooled[0][0] > pooled_before


class TestTrain:
    def _planted(self, n=10, d=8, seed=5):
        rng = np.random.default_rng(seed)
        pos = rng.normal(size=d)
        neg = rng.normal(size=d)
        data = []
        for i in range(n):
            mat = rng.normal(size=(4, d)) * 0.05
            mat[i % 3] = pos if i % 2 == 0 else neg
            data.append((mat, 1 if i % 2 == 0 else 0))
        return data

    def test_planted_keyword_learned_within_10_epochs(self):
        data = self._planted()
        cfg = small_config(learning_rate=0.05, epochs=10, filters_per_branch=8,
                           seed=11, patience=100)
        w = cnn_train(data, cfg)
        acc = np.mean([(cnn_forward(x, w)[1] >= 0.5) == y for x, y in data])
        assert acc == 1.0

    def test_bitwise_deterministic(self):
        data = self._planted()
        cfg = small_config(learning_rate=0.02, epochs=4, seed=3, dropout_rate=0.25)
        w1 = cnn_train(data, cfg)
        w2 = cnn_train(data, cfg)
        for a, b in zip(w1.arrays(), w2.arrays()):
            assert a.tobytes() == b.tobytes()

    def test_empty_input_rejected(self):
        with pytest.raises(ConfigError):
            cnn_train([], small_config())

    def test_single_class_rejected(self):
        x = RNG.normal(size=(4, 8))
        with pytest.raises(ConfigError, match="both classes"):
            cnn_train([(x, 1), (x, 1)], small_config())


class TestGradCheck:
    def test_small_configs_under_tolerance(self):
        for seed in range(3):
            cfg = small_config(seed=seed)
            assert grad_check(cfg, seed=seed) < 1e-4

    def test_zero_loss_construction_gives_zero_gradients(self):
        from archpairs.textcnn.model import _accumulate_grads, _zero_grads
        cfg = small_config()
        w = init_weights(cfg)
        x = RNG.normal(size=(5, cfg.embed_dim))
        _, score = cnn_forward(x, w)
        grads = _zero_grads(w)
        _accumulate_grads(x, score, w, grads, 1.0)  # label equals score
        assert all(np.allclose(g, 0.0, atol=1e-12) for g in grads)

    def test_repeatable(self):
        cfg = small_config()
        assert grad_check(cfg, seed=9) == grad_check(cfg, seed=9)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        cfg = small_config()
        w = init_weights(cfg)
        path = tmp_path / "weights.npz"
        save_weights(w, path)
        again = load_weights(path)
        assert again.config == cfg
        for a, b in zip(w.arrays(), again.arrays()):
            assert np.allclose(a, b, atol=1e-12)

    def test_config_mismatch_rejected(self, tmp_path):
        w = init_weights(small_config())
        path = tmp_path / "weights.npz"
        save_weights(w, path)
        with pytest.raises(FormatError):
            load_weights(path, expect=small_config(embed_dim=9))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_weights(tmp_path / "nope.npz")


class TestKernelParity:
    def test_python_and_selected_kernel_agree(self):
        from archpairs.textcnn import kernels
        from archpairs.textcnn import kernels_py
        rng = np.random.default_rng(7)
        for _ in range(5):
            x = rng.normal(size=(9, 6))
            w = rng.normal(size=(4, 3, 6))
            b = rng.normal(size=4)
            p1, a1, g1 = kernels.branch_forward(x, w, b)
            p2, a2, g2 = kernels_py.branch_forward(x, w, b)
            assert np.allclose(p1, p2, atol=1e-10)
            assert np.array_equal(g1, g2)
            assert np.array_equal(a1[g1 > 0], a2[g2 > 0])
