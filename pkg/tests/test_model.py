import math

import numpy as np
import pytest

from moddyn import (
    DimensionError,
    MtbConfig,
    RepresentationStack,
    ValidationError,
    backward,
    forward,
    init_params,
    layer_collapse,
    loss,
    mtb_transform,
    pool_modulation,
    pool_raw,
    predict_score,
    sgd_step,
)

from oracles import central_difference, straightline_score


def stack_of(rng, shape=(3, 4, 30)):
    return RepresentationStack(data=rng.standard_normal(shape).astype(np.float32), frame_rate=50.0)


def params_of(variant, rng, layers=3, features=4, hidden=5):
    return init_params(variant, layers, features, hidden=hidden, rng=rng)


class TestInit:
    def test_layer_weights_equal(self):
        p = params_of("raw", np.random.default_rng(0), layers=4)
        assert np.allclose(p.layer_weights, 0.25)

    def test_biases_zero(self):
        p = params_of("proposed", np.random.default_rng(1))
        assert np.all(p.b1 == 0.0) and p.b2 == 0.0

    def test_glorot_bounds(self):
        p = params_of("raw", np.random.default_rng(2), features=10, hidden=30)
        bound = math.sqrt(6.0 / (10 + 30))
        assert np.max(np.abs(p.w1)) <= bound
        assert np.max(np.abs(p.w2)) <= math.sqrt(6.0 / 31)

    def test_unknown_variant(self):
        with pytest.raises(ValidationError):
            init_params("mlp", 3, 4)

    def test_deterministic_given_rng(self):
        a = params_of("raw", np.random.default_rng(5))
        b = params_of("raw", np.random.default_rng(5))
        assert np.array_equal(a.w1, b.w1) and np.array_equal(a.w2, b.w2)


class TestForward:
    def test_raw_equals_straightline(self):
        rng = np.random.default_rng(3)
        st = stack_of(rng)
        p = params_of("raw", rng)
        score, _ = forward(p, st, MtbConfig())
        v = pool_raw(layer_collapse(st, p.layer_weights))
        assert abs(score - straightline_score(p, v)) <= 1e-12

    def test_proposed_equals_straightline(self):
        rng = np.random.default_rng(4)
        st = stack_of(rng)
        p = params_of("proposed", rng)
        cfg = MtbConfig()
        score, _ = forward(p, st, cfg)
        v = pool_modulation(mtb_transform(st, p.layer_weights, cfg))
        assert abs(score - straightline_score(p, v)) <= 1e-12

    def test_dropout_mask_applied(self):
        rng = np.random.default_rng(5)
        st = stack_of(rng)
        p = params_of("raw", rng)
        zero_mask = np.zeros(5)
        score, _ = forward(p, st, MtbConfig(), dropout_mask=zero_mask)
        # all hidden units dropped: only the output bias survives
        assert score == pytest.approx(0.5)

    def test_mask_shape_checked(self):
        rng = np.random.default_rng(6)
        with pytest.raises(DimensionError):
            forward(params_of("raw", rng), stack_of(rng), MtbConfig(), dropout_mask=np.ones(3))

    def test_dim_mismatch(self):
        rng = np.random.default_rng(7)
        p = params_of("raw", rng, layers=2)
        with pytest.raises(DimensionError):
            forward(p, stack_of(rng), MtbConfig())

    def test_predict_is_pure(self):
        rng = np.random.default_rng(8)
        st = stack_of(rng)
        p = params_of("proposed", rng)
        cfg = MtbConfig()
        assert predict_score(p, st, cfg) == predict_score(p, st, cfg)

    def test_score_in_open_interval(self):
        rng = np.random.default_rng(9)
        for seed in range(5):
            st = stack_of(np.random.default_rng(seed))
            p = params_of("proposed", rng)
            s = predict_score(p, st, MtbConfig())
            assert 0.0 < s < 1.0


class TestLoss:
    def test_unweighted_midpoint(self):
        # -log(0.5) for the spoof class
        assert loss(0.5, 0, w_genuine=10.0) == pytest.approx(0.6931471805599453, abs=1e-12)

    def test_weighted_midpoint(self):
        # 10 * -log(0.5) for bonafide
        assert loss(0.5, 1, w_genuine=10.0) == pytest.approx(6.931471805599453, abs=1e-12)

    def test_weight_one_is_plain_bce(self):
        s = 0.73
        assert loss(s, 1, w_genuine=1.0) == pytest.approx(-math.log(s), abs=1e-12)

    def test_domain_checks(self):
        with pytest.raises(ValidationError):
            loss(0.0, 1)
        with pytest.raises(ValidationError):
            loss(1.0, 0)
        with pytest.raises(ValidationError):
            loss(0.5, 2)
        with pytest.raises(ValidationError):
            loss(0.5, 1, w_genuine=0.0)


FIELDS = [("layer_weights", (3,)), ("w1", (5, 4)), ("b1", (5,)), ("w2", (5,)), ("b2", None)]


def all_indices(shape):
    if shape is None:
        return [None]
    return list(np.ndindex(*shape))


class TestGradients:
    @pytest.mark.parametrize("variant", ["raw", "proposed"])
    @pytest.mark.parametrize("label", [0, 1])
    def test_every_gradient_matches_fd(self, variant, label):
        rng = np.random.default_rng(42)
        st = stack_of(rng, (3, 4, 30))
        p = params_of(variant, rng)
        mask = (np.random.default_rng(7).random(5) >= 0.25).astype(float)
        cfg = MtbConfig()

        def fun(q):
            s, _ = forward(q, st, cfg, dropout_mask=mask)
            return loss(s, label)

        _, grads = backward(p, st, cfg, label, dropout_mask=mask)
        for field, shape in FIELDS:
            g = getattr(grads, field)
            for idx in all_indices(shape):
                fd = central_difference(fun, p, field, idx)
                analytic = float(g) if idx is None else float(g[idx])
                assert abs(analytic - fd) <= 1e-4 * abs(fd) + 1e-6, (field, idx)

    @pytest.mark.parametrize("variant", ["raw", "proposed"])
    def test_gradient_short_input_padding(self, variant):
        # T < window exercises the zero-pad truncation in the backward pass
        rng = np.random.default_rng(11)
        st = stack_of(rng, (2, 3, 3))
        p = init_params(variant, 2, 3, hidden=4, rng=rng)
        cfg = MtbConfig()

        def fun(q):
            s, _ = forward(q, st, cfg)
            return loss(s, 0)

        _, grads = backward(p, st, cfg, 0)
        for i in range(2):
            fd = central_difference(fun, p, "layer_weights", (i,))
            assert abs(grads.layer_weights[i] - fd) <= 1e-4 * abs(fd) + 1e-6

    def test_no_dropout_backward(self):
        rng = np.random.default_rng(12)
        st = stack_of(rng)
        p = params_of("proposed", rng)
        cfg = MtbConfig()

        def fun(q):
            s, _ = forward(q, st, cfg)
            return loss(s, 1)

        _, grads = backward(p, st, cfg, 1)
        fd = central_difference(fun, p, "b2", None)
        assert abs(grads.b2 - fd) <= 1e-4 * abs(fd) + 1e-6


class TestSgdStep:
    def test_moves_against_gradient(self):
        rng = np.random.default_rng(13)
        st = stack_of(rng)
        p = params_of("raw", rng)
        cfg = MtbConfig()
        before, _ = forward(p, st, cfg)
        val0 = loss(before, 1)
        _, grads = backward(p, st, cfg, 1)
        sgd_step(p, grads, 1e-3)
        after, _ = forward(p, st, cfg)
        assert loss(after, 1) < val0

    def test_updates_all_fields(self):
        rng = np.random.default_rng(14)
        p = params_of("proposed", rng)
        q = p.copy()
        st = stack_of(rng)
        _, grads = backward(p, st, MtbConfig(), 0)
        sgd_step(p, grads, 0.1)
        assert not np.array_equal(p.w1, q.w1)
        assert not np.array_equal(p.layer_weights, q.layer_weights)
        assert p.b2 != q.b2
