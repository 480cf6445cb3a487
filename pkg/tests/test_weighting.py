import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmdq.errors import NegativeWeight, NonFiniteComponent, ShapeMismatch
from mmdq.weighting import (
    COMPONENTS,
    WeightingConfig,
    format_float,
    load_weights,
    sample_weight,
    save_weights,
    weighted_ce_grad,
    weighted_ce_loss,
)


class TestSampleWeight:
    def test_plain_mean(self):
        sw = sample_weight(0.9, 0.6, 0.3)
        assert sw.raw_mean == pytest.approx(0.6)
        assert sw.weight == pytest.approx(0.6)

    def test_floor_applies(self):
        sw = sample_weight(0.0, 0.0, 0.06)
        assert sw.raw_mean == pytest.approx(0.02)
        assert sw.weight == 0.05

    def test_floor_handles_negative_mean(self):
        # cosine scores may be negative; the floor still guards the weight
        sw = sample_weight(0.1, -0.9, -0.8)
        assert sw.raw_mean < 0
        assert sw.weight == 0.05

    def test_custom_floor(self):
        sw = sample_weight(0.0, 0.0, 0.0, WeightingConfig(floor_eps=0.25))
        assert sw.weight == 0.25

    @pytest.mark.parametrize(
        "enabled,expected",
        [
            (("it", "ai"), (0.6 + 0.3) / 2),
            (("image", "ai"), (0.9 + 0.3) / 2),
            (("image", "it"), (0.9 + 0.6) / 2),
        ],
    )
    def test_ablation_mean_of_remaining(self, enabled, expected):
        sw = sample_weight(0.9, 0.6, 0.3, enabled=enabled)
        assert sw.raw_mean == pytest.approx(expected)
        assert set(sw.components) == set(enabled)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteComponent):
            sample_weight(float("nan"), 0.5, 0.5)
        with pytest.raises(NonFiniteComponent):
            sample_weight(0.5, float("inf"), 0.5)

    def test_unknown_component_rejected(self):
        with pytest.raises(ValueError):
            sample_weight(0.5, 0.5, 0.5, enabled=("image", "bogus"))

    @given(
        st.floats(0, 1, allow_nan=False),
        st.floats(-1, 1, allow_nan=False),
        st.floats(-1, 1, allow_nan=False),
    )
    def test_weight_at_least_floor(self, a, b, c):
        sw = sample_weight(a, b, c)
        assert sw.weight >= 0.05
        assert sw.weight == max(0.05, sw.raw_mean)


class TestFormatFloat:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (0.05, "0.05"),
            (1.0, "1"),
            (1 / 3, "0.333333333"),
            (0.7310585786300049, "0.731058579"),
        ],
    )
    def test_nine_significant_digits(self, value, expected):
        assert format_float(value) == expected

    @given(st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False))
    def test_round_trip_close(self, x):
        assert float(format_float(x)) == pytest.approx(x, rel=1e-8)


def random_batch(rng, n=6, k=3, weights=None):
    logits = rng.normal(size=(n, k))
    labels = rng.integers(0, k, size=n)
    if weights is None:
        weights = rng.uniform(0.05, 1.0, size=n)
    return logits, labels, weights


class TestWeightedCeLoss:
    def test_hand_case(self):
        # two samples with margin-1 logits: per-sample CE = log(1 + e^-1);
        # weights (1, 2) average to 1.5x that
        logits = np.array([[1.0, 0.0], [0.0, 1.0]])
        labels = np.array([0, 1])
        loss = weighted_ce_loss(logits, labels, np.array([1.0, 2.0]))
        assert loss == pytest.approx(0.4698925312773343, abs=1e-12)

    def test_all_ones_is_plain_mean_ce(self, rng):
        logits, labels, _ = random_batch(rng)
        ones = np.ones(len(labels))
        # independent plain CE
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        plain = -log_probs[np.arange(len(labels)), labels].mean()
        assert weighted_ce_loss(logits, labels, ones) == pytest.approx(plain, abs=1e-12)

    @given(st.floats(0.01, 100), st.integers(0, 2**32 - 1))
    @settings(max_examples=40)
    def test_linear_in_weights(self, c, seed):
        rng = np.random.default_rng(seed)
        logits, labels, weights = random_batch(rng)
        base = weighted_ce_loss(logits, labels, weights)
        assert weighted_ce_loss(logits, labels, c * weights) == pytest.approx(
            c * base, rel=1e-12
        )

    def test_zero_weight_removes_sample(self, rng):
        logits, labels, weights = random_batch(rng, n=4)
        weights = weights.copy()
        weights[2] = 0.0
        # altering the zero-weight sample's logits must not change the loss
        bent = logits.copy()
        bent[2] += 100.0
        assert weighted_ce_loss(logits, labels, weights) == pytest.approx(
            weighted_ce_loss(bent, labels, weights), abs=1e-12
        )

    def test_extreme_logits_stable(self):
        logits = np.array([[1000.0, 0.0], [0.0, 1000.0]])
        labels = np.array([0, 1])
        loss = weighted_ce_loss(logits, labels, np.ones(2))
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_negative_weight_rejected(self, rng):
        logits, labels, _ = random_batch(rng, n=3)
        with pytest.raises(NegativeWeight):
            weighted_ce_loss(logits, labels, np.array([0.5, -0.1, 0.5]))

    def test_shape_checks(self, rng):
        logits, labels, weights = random_batch(rng, n=3)
        with pytest.raises(ShapeMismatch):
            weighted_ce_loss(logits[:2], labels, weights)
        with pytest.raises(ShapeMismatch):
            weighted_ce_loss(logits[:, :1], labels, weights)
        with pytest.raises(ShapeMismatch):
            weighted_ce_loss(logits, labels.astype(float), weights)
        with pytest.raises(ShapeMismatch):
            weighted_ce_loss(logits, labels + 10, weights)


class TestWeightedCeGrad:
    def test_matches_finite_differences(self):
        # central differences at h=1e-5 across several random instances
        h = 1e-5
        for seed in range(20):
            rng = np.random.default_rng(seed)
            logits, labels, weights = random_batch(rng, n=5, k=4)
            grad = weighted_ce_grad(logits, labels, weights)
            for i in range(logits.shape[0]):
                for j in range(logits.shape[1]):
                    up = logits.copy()
                    up[i, j] += h
                    down = logits.copy()
                    down[i, j] -= h
                    fd = (
                        weighted_ce_loss(up, labels, weights)
                        - weighted_ce_loss(down, labels, weights)
                    ) / (2 * h)
                    assert grad[i, j] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_rows_sum_to_zero(self, rng):
        logits, labels, weights = random_batch(rng)
        grad = weighted_ce_grad(logits, labels, weights)
        np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)

    def test_zero_weight_zero_row(self, rng):
        logits, labels, weights = random_batch(rng, n=4)
        weights = weights.copy()
        weights[1] = 0.0
        grad = weighted_ce_grad(logits, labels, weights)
        np.testing.assert_array_equal(grad[1], np.zeros(logits.shape[1]))


class TestWeightsFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "weights.csv"
        rows = [("s1", 0.05), ("s2", 1 / 3), ("s3", 1.0)]
        save_weights(path, rows)
        loaded = load_weights(path)
        assert loaded == {"s1": 0.05, "s2": pytest.approx(1 / 3, rel=1e-8), "s3": 1.0}

    def test_file_shape(self, tmp_path):
        path = tmp_path / "weights.csv"
        save_weights(path, [("s1", 0.25)])
        assert path.read_text(encoding="utf-8") == "id,weight\ns1,0.25\n"
