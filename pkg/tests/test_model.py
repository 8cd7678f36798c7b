import math
from dataclasses import replace

import numpy as np
import pytest

from stepe.datagen import make_blobs
from stepe.errors import ConfigError, ShapeError, StateError
from stepe.model import (
    OptimizerConfig,
    cosine_lr,
    cross_entropy,
    forward_logits,
    init_model,
    loss_and_grads,
    per_sample_loss,
    sgd_epoch,
)

from gradcheck import max_grad_error, random_instance


def _params_equal(a, b):
    return all(np.array_equal(p, q) for p, q in zip(a.params(), b.params()))


class TestInit:
    def test_linear_shapes_and_determinism(self):
        m = init_model("linear", 4, 3, seed=7)
        assert m.weights[0].shape == (3, 4)
        assert m.biases[0].shape == (3,)
        assert _params_equal(m, init_model("linear", 4, 3, seed=7))

    def test_mlp_shapes(self):
        m = init_model("mlp", 8, 5, seed=1, hidden=16)
        assert [W.shape for W in m.weights] == [(16, 8), (5, 16)]
        assert [b.shape for b in m.biases] == [(16,), (5,)]
        assert all(not b.any() for b in m.biases)
        assert all(v.shape == p.shape and not v.any() for v, p in zip(m.velocity, m.params()))

    def test_seeds_differ(self):
        assert not _params_equal(init_model("mlp", 8, 5, 1, hidden=4), init_model("mlp", 8, 5, 2, hidden=4))

    def test_glorot_bounds(self):
        m = init_model("mlp", 30, 10, seed=3, hidden=20)
        assert np.abs(m.weights[0]).max() <= math.sqrt(6 / 50)
        assert np.abs(m.weights[1]).max() <= math.sqrt(6 / 30)

    @pytest.mark.parametrize("args", [("linear", 0, 3), ("linear", 4, 1), ("conv", 4, 3), ("mlp", 4, 3)])
    def test_invalid(self, args):
        with pytest.raises(ConfigError):
            init_model(*args, seed=0)


class TestForward:
    def test_zero_linear(self):
        m = init_model("linear", 3, 4, seed=0)
        m.weights[0][:] = 0
        assert not forward_logits(m, np.random.default_rng(0).normal(size=(5, 3))).any()

    def test_identity_weights(self):
        m = init_model("linear", 2, 2, seed=0)
        m.weights[0][:] = np.eye(2)
        np.testing.assert_array_equal(forward_logits(m, [[1.0, 0.0]]), [[1.0, 0.0]])

    def test_mlp_zero_second_layer(self):
        m = init_model("mlp", 3, 4, seed=0, hidden=5)
        m.weights[1][:] = 0
        assert not forward_logits(m, np.random.default_rng(1).normal(size=(6, 3))).any()

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            forward_logits(init_model("linear", 3, 2, 0), np.zeros((2, 4)))


class TestLoss:
    def test_uniform_logits_give_log_k(self):
        ds = make_blobs(K=10, d=3, n_train=20, n_test=10, separation=1.0, seed=0)
        m = init_model("linear", 3, 10, seed=0)
        m.weights[0][:] = 0
        np.testing.assert_allclose(per_sample_loss(m, ds, np.arange(20)), 2.302585092994046, rtol=0, atol=1e-12)

    def test_saturated_softmax(self):
        ds = make_blobs(K=3, d=2, n_train=3, n_test=3, separation=1.0, seed=0)
        m = init_model("linear", 2, 3, seed=0)
        m.weights[0][:] = 0
        m.biases[0][:] = 0
        m.biases[0][ds.y_noisy[0]] = 50.0
        assert per_sample_loss(m, ds, [0])[0] < 1e-20

    def test_matches_scalar_oracle(self, tiny_ds):
        m = init_model("mlp", 4, 3, seed=9, hidden=6)
        idx = np.array([3, 17, 0, 44, 81])
        got = per_sample_loss(m, tiny_ds, idx)
        for value, i in zip(got, idx):
            x = tiny_ds.X_train[i]
            hidden = [max(0.0, sum(m.weights[0][j, k] * x[k] for k in range(4)) + m.biases[0][j]) for j in range(6)]
            logits = [sum(m.weights[1][c, j] * hidden[j] for j in range(6)) + m.biases[1][c] for c in range(3)]
            top = max(logits)
            lse = top + math.log(sum(math.exp(z - top) for z in logits))
            assert value == pytest.approx(lse - logits[tiny_ds.y_noisy[i]], abs=1e-12)

    def test_order_independent_and_pure(self, tiny_ds):
        m = init_model("mlp", 4, 3, seed=2, hidden=5)
        before = [p.copy() for p in m.params()]
        idx = np.arange(tiny_ds.n)
        perm = np.random.default_rng(0).permutation(idx)
        np.testing.assert_array_equal(per_sample_loss(m, tiny_ds, idx)[perm], per_sample_loss(m, tiny_ds, perm))
        assert all(np.array_equal(a, b) for a, b in zip(before, m.params()))

    def test_empty_indices(self, tiny_ds):
        assert per_sample_loss(init_model("linear", 4, 3, 0), tiny_ds, []).shape == (0,)


@pytest.mark.parametrize("arch", ["linear", "mlp"])
def test_gradients_match_finite_differences(arch):
    rng = np.random.default_rng(1234 if arch == "linear" else 4321)
    for _ in range(5):
        assert max_grad_error(*random_instance(rng, arch)) <= 1e-5


def test_loss_cap_zeroes_clipped_gradients():
    rng = np.random.default_rng(0)
    m, X, y = random_instance(rng, "linear")
    losses = cross_entropy(forward_logits(m, X), y)
    cap = float(np.median(losses))
    keep = losses <= cap
    capped_loss, capped = loss_and_grads(m, X, y, loss_cap=cap)
    assert capped_loss == pytest.approx(np.minimum(losses, cap).mean())
    if keep.any():
        _, ref = loss_and_grads(m, X[keep], y[keep])
        # mean over the full batch, so rescale the kept-only gradient
        for g, r in zip(capped, ref):
            np.testing.assert_allclose(g, r * keep.sum() / len(y), atol=1e-12)


class TestSgdEpoch:
    def test_zero_lr_keeps_parameters(self, tiny_ds):
        m = init_model("mlp", 4, 3, seed=0, hidden=5)
        out, _ = sgd_epoch(m, tiny_ds, np.arange(tiny_ds.n), OptimizerConfig(), 0.0, seed=1)
        assert _params_equal(m, out)
        assert any(v.any() for v in out.velocity)

    def test_input_model_not_mutated(self, tiny_ds):
        m = init_model("linear", 4, 3, seed=0)
        snapshot = m.copy()
        sgd_epoch(m, tiny_ds, np.arange(tiny_ds.n), OptimizerConfig(), 0.1, seed=1)
        assert _params_equal(m, snapshot)

    def test_matches_gate_free_reference(self, tiny_ds):
        opt = OptimizerConfig(batch_size=16)
        m = init_model("mlp", 4, 3, seed=3, hidden=6)
        got = m
        for epoch in range(3):
            got, _ = sgd_epoch(got, tiny_ds, np.arange(tiny_ds.n), opt, 0.05, seed=epoch)

        ref = m.copy()
        params = ref.params()
        vel = [np.zeros_like(p) for p in params]
        for epoch in range(3):
            order = np.random.default_rng(epoch).permutation(tiny_ds.n)
            for s in range(0, tiny_ds.n, 16):
                b = order[s:s + 16]
                _, grads = loss_and_grads(ref, tiny_ds.X_train[b], tiny_ds.y_noisy[b])
                for p, v, g in zip(params, vel, grads):
                    g = g + opt.weight_decay * p
                    v[:] = opt.momentum * v + g
                    p[:] = p - 0.05 * (g + opt.momentum * v)
        assert _params_equal(got, ref)

    def test_dropped_samples_have_no_influence(self, tiny_ds):
        kept = np.arange(0, tiny_ds.n, 2)
        X = tiny_ds.X_train.copy()
        X[1::2] = 1e6  # garbage in dropped rows must not matter
        poisoned = replace(tiny_ds, X_train=X)
        m = init_model("linear", 4, 3, seed=0)
        a, _ = sgd_epoch(m, tiny_ds, kept, OptimizerConfig(batch_size=8), 0.1, seed=4)
        b, _ = sgd_epoch(m, poisoned, kept, OptimizerConfig(batch_size=8), 0.1, seed=4)
        assert _params_equal(a, b)

    def test_deterministic(self, tiny_ds):
        m = init_model("mlp", 4, 3, seed=0, hidden=5)
        a, la = sgd_epoch(m, tiny_ds, np.arange(50), OptimizerConfig(batch_size=7), 0.1, seed=9)
        b, lb = sgd_epoch(m, tiny_ds, np.arange(50), OptimizerConfig(batch_size=7), 0.1, seed=9)
        assert _params_equal(a, b) and la == lb

    def test_empty_kept(self, tiny_ds):
        with pytest.raises(StateError, match="empty kept set"):
            sgd_epoch(init_model("linear", 4, 3, 0), tiny_ds, [], OptimizerConfig(), 0.1, seed=0)

    def test_reduces_loss(self, tiny_ds):
        m = init_model("linear", 4, 3, seed=0)
        before = per_sample_loss(m, tiny_ds, np.arange(tiny_ds.n)).mean()
        for t in range(5):
            m, _ = sgd_epoch(m, tiny_ds, np.arange(tiny_ds.n), OptimizerConfig(batch_size=16), 0.05, seed=t)
        assert per_sample_loss(m, tiny_ds, np.arange(tiny_ds.n)).mean() < before


class TestOptimizerConfig:
    def test_defaults(self):
        opt = OptimizerConfig()
        assert (opt.lr0, opt.momentum, opt.weight_decay, opt.batch_size) == (0.1, 0.9, 5e-4, 128)

    @pytest.mark.parametrize("kw", [{"lr0": 0}, {"momentum": 1.0}, {"weight_decay": -1}, {"batch_size": 0}])
    def test_validation(self, kw):
        with pytest.raises(ConfigError):
            OptimizerConfig(**kw)


class TestCosine:
    def test_endpoints(self):
        assert cosine_lr(0, 60, 0.1) == 0.1
        assert cosine_lr(30, 60, 0.1) == pytest.approx(0.05, abs=1e-15)
        # 40-digit evaluation of 0.1 * (1 + cos(59 pi / 60)) / 2
        assert cosine_lr(59, 60, 0.1) == pytest.approx(6.852326227130631e-05, rel=1e-12)

    def test_monotone(self):
        lrs = [cosine_lr(t, 60, 0.1) for t in range(60)]
        assert all(a >= b for a, b in zip(lrs, lrs[1:]))

    @pytest.mark.parametrize("t", [-1, 60])
    def test_out_of_range(self, t):
        with pytest.raises(ConfigError):
            cosine_lr(t, 60, 0.1)
