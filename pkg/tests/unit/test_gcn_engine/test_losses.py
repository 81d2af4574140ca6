"""
Unit Tests: Losses
------------------
Covers src/gcn_engine/losses.py.
"""

import numpy as np
import pytest

from src.gcn_engine.exceptions import ContractViolation, ParameterError, ShapeError
from src.gcn_engine.losses import meta_loss, one_hot, per_example_ce, weighted_loss


def test_one_hot():
    np.testing.assert_array_equal(one_hot([1, 0, 1], 2), [[0, 1], [1, 0], [0, 1]])
    with pytest.raises(ParameterError):
        one_hot([2], 2)


class TestPerExampleCe:
    def test_sigmoid_binary_cross_entropy(self):
        probs = np.array([[0.2, 0.7]])
        ce = per_example_ce(probs, [[0.0, 1.0]])
        assert ce.losses[0] == pytest.approx(-np.log(0.8) - np.log(0.7), rel=1e-14)
        np.testing.assert_allclose(ce.residuals, [[0.2, -0.3]], rtol=1e-14)

    def test_softmax_cross_entropy(self):
        probs = np.array([[0.25, 0.75], [0.9, 0.1]])
        ce = per_example_ce(probs, [[0.0, 1.0], [0.0, 1.0]], output="softmax")
        np.testing.assert_allclose(ce.losses, [-np.log(0.75), -np.log(0.1)], rtol=1e-14)

    def test_clamped_at_certainty(self):
        ce = per_example_ce(np.array([[1.0, 0.0]]), [[0.0, 1.0]])
        assert np.isfinite(ce.losses).all()
        assert ce.losses[0] == pytest.approx(2 * -np.log(1e-12), rel=1e-4)

    def test_non_one_hot_labels(self):
        with pytest.raises(ContractViolation):
            per_example_ce(np.full((2, 2), 0.5), [[1.0, 1.0], [0.0, 1.0]])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            per_example_ce(np.full((2, 2), 0.5), [[1.0, 0.0]])


class TestWeightedLoss:
    def test_value_and_gradient_rows(self):
        ce = per_example_ce(np.array([[0.4, 0.6], [0.5, 0.5]]), [[0.0, 1.0], [1.0, 0.0]])
        value, grad = weighted_loss(ce, [0.25, 0.75])
        assert value == pytest.approx(0.25 * ce.losses[0] + 0.75 * ce.losses[1], rel=1e-14)
        np.testing.assert_allclose(grad, [[0.1, -0.1], [-0.375, 0.375]], rtol=1e-14)

    def test_zero_weights(self):
        ce = per_example_ce(np.full((2, 2), 0.5), [[0.0, 1.0], [1.0, 0.0]])
        value, grad = weighted_loss(ce, [0.0, 0.0])
        assert value == 0.0
        assert not grad.any()

    def test_negative_weight_rejected(self):
        ce = per_example_ce(np.full((1, 2), 0.5), [[0.0, 1.0]])
        with pytest.raises(ContractViolation):
            weighted_loss(ce, [-0.1])

    def test_length_mismatch(self):
        ce = per_example_ce(np.full((1, 2), 0.5), [[0.0, 1.0]])
        with pytest.raises(ContractViolation):
            weighted_loss(ce, [0.5, 0.5])


def test_meta_loss_is_mean():
    probs = np.array([[0.3, 0.7], [0.6, 0.4]])
    labels = [[0.0, 1.0], [1.0, 0.0]]
    assert meta_loss(probs, labels) == pytest.approx(per_example_ce(probs, labels).losses.mean(), rel=1e-14)
    with pytest.raises(ParameterError):
        meta_loss(np.zeros((0, 2)), np.zeros((0, 2)))
