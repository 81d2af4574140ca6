"""
Unit Tests: Meta-Weighted Training
----------------------------------
Covers src/gcn_engine/meta_trainer.py.
Validates:
- Weight proposal / normalization invariants (wᵢ ≥ 0, Σw ∈ {0, 1}, all-zero guard, scale-free)
- All-zero weights leave θ untouched under SGD and a primed Adam
- Meta-gradient: jvp path = per-example path = finite differences
- The weighted update equals θ − α Σ wᵢ ∇lᵢ under SGD
- Mirror-symmetric balanced data gets equal per-class weights
- Training loop logging, best-validation checkpoint selection, plain SGD descent
"""

from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp

from src.data.datasets import standardize
from src.data.meta_set import MetaSet, sample_meta_set
from src.data.splits import split
from src.gcn_engine.constants import TRAINLOG_COLUMNS
from src.gcn_engine.exceptions import ParameterError
from src.gcn_engine.graph import GraphData, induced_subgraph
from src.gcn_engine.losses import one_hot
from src.gcn_engine.meta_trainer import (
    class_balanced_weights,
    meta_gradient,
    meta_weight_step,
    normalize_weights,
    per_example_param_gradients,
    perturbed_meta_loss,
    predict_probabilities,
    propose_weights,
    train,
    uniform_weights,
)
from src.gcn_engine.model import init_params
from src.gcn_engine.optimizers import build_optimizer
from src.models.training import TrainerConfig
from tests.conftest import random_adjacency

LINEAR = dict(hidden=[], activation="identity")


def empty_graph(n: int) -> GraphData:
    return GraphData.from_adjacency(sp.csr_matrix((n, n)))


def make_meta(x, labels, graph, nodes) -> MetaSet:
    nodes = np.asarray(nodes)
    return MetaSet(node_indices=nodes, features=x[nodes], labels=labels[nodes], graph=induced_subgraph(graph, nodes))


@pytest.fixture
def small_problem():
    """10 nodes, 3 features, random graph; nodes 0-6 train, 7-9 meta."""
    rng = np.random.default_rng(4)
    graph = GraphData.from_adjacency(random_adjacency(10, 0.35, seed=4))
    x = rng.standard_normal((10, 3))
    labels = np.array([0, 1, 0, 0, 1, 0, 1, 0, 1, 1])
    return graph, x, labels, np.arange(7), make_meta(x, labels, graph, [7, 8, 9])


@pytest.fixture
def prepared(communities):
    raw, graph = communities
    splits = split(raw, seed=0)
    dataset = standardize(raw, splits.train)
    return dataset, graph, splits, sample_meta_set(dataset, splits, graph, seed=0)


# =========================================================
# ⚖️ Weight Rules
# =========================================================
class TestWeightRules:
    def test_propose_clamps_at_zero(self):
        np.testing.assert_array_equal(propose_weights([0.5, -0.2, 0.0], eta=2.0), [0.0, 0.4, 0.0])

    def test_normalize_sums_to_one(self):
        w = normalize_weights([0.0, 1.0, 3.0])
        np.testing.assert_allclose(w, [0.0, 0.25, 0.75])
        assert w.sum() == 1.0

    def test_normalize_all_zero_stays_zero(self):
        w = normalize_weights(np.zeros(4))
        assert np.all(w == 0.0)

    @pytest.mark.parametrize("c", [1e-6, 0.5, 3.0, 1e4])
    def test_normalize_ignores_positive_scale(self, c):
        w_tilde = np.random.default_rng(0).random(7)
        w_tilde[[1, 4]] = 0.0
        np.testing.assert_allclose(normalize_weights(c * w_tilde), normalize_weights(w_tilde), rtol=1e-12)

    def test_uniform_and_class_balanced(self):
        np.testing.assert_allclose(uniform_weights(4), 0.25)
        w = class_balanced_weights([0, 0, 0, 1], n_classes=2)
        np.testing.assert_allclose(w, [1 / 6, 1 / 6, 1 / 6, 1 / 2])
        assert w.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(class_balanced_weights([0, 1, 0, 1], 2), uniform_weights(4))

    def test_class_balanced_ignores_absent_classes(self):
        np.testing.assert_allclose(class_balanced_weights([0, 0, 2, 2], n_classes=3), 0.25)


# =========================================================
# 🎯 Meta-Gradient
# =========================================================
class TestMetaGradient:
    def test_jvp_and_per_example_agree(self, small_problem):
        graph, x, labels, train_idx, meta = small_problem
        params = init_params([3, 4, 2], seed=1)
        y = one_hot(labels, 2)
        base = TrainerConfig(alpha=0.1, hidden=[4])
        by_jvp = meta_gradient(params, graph, x, y, train_idx, meta, base)
        by_examples = meta_gradient(
            params, graph, x, y, train_idx, meta, base.model_copy(update={"meta_gradient": "per_example"})
        )
        np.testing.assert_allclose(by_jvp, by_examples, rtol=1e-9, atol=1e-13)

    @pytest.mark.parametrize("architecture", ["gcn", "mlp"])
    def test_matches_finite_differences(self, small_problem, architecture):
        graph, x, labels, train_idx, meta = small_problem
        cfg = TrainerConfig(alpha=0.1, architecture=architecture, **LINEAR)
        params = init_params([3, 2], seed=2)
        y = one_hot(labels, 2)
        analytic = meta_gradient(params, graph, x, y, train_idx, meta, cfg)

        h = 1e-4
        for i in range(train_idx.size):
            gamma = np.zeros(train_idx.size)
            gamma[i] = h
            plus = perturbed_meta_loss(params, graph, x, y, train_idx, meta, cfg, gamma)
            minus = perturbed_meta_loss(params, graph, x, y, train_idx, meta, cfg, -gamma)
            assert analytic[i] == pytest.approx((plus - minus) / (2 * h), rel=1e-5, abs=1e-9)

    def test_zero_gamma_leaves_meta_loss(self, small_problem):
        graph, x, labels, train_idx, meta = small_problem
        cfg = TrainerConfig(alpha=0.1, hidden=[4])
        params = init_params([3, 4, 2], seed=1)
        y = one_hot(labels, 2)
        a = perturbed_meta_loss(params, graph, x, y, train_idx, meta, cfg, np.zeros(train_idx.size))
        b = perturbed_meta_loss(params, graph, x, y, train_idx, meta, cfg, np.zeros(train_idx.size))
        assert a == b > 0.0

    def test_per_example_gradients_count(self, small_problem):
        graph, x, labels, train_idx, _ = small_problem
        grads = per_example_param_gradients(
            init_params([3, 4, 2], seed=0), graph, x, one_hot(labels, 2), train_idx, TrainerConfig(hidden=[4])
        )
        assert len(grads) == train_idx.size
        assert [g.shape for g in grads[0]] == [(3, 4), (4, 2)]

    def test_empty_training_set(self, small_problem):
        graph, x, labels, _, meta = small_problem
        with pytest.raises(ParameterError):
            meta_gradient(init_params([3, 2], 0), graph, x, one_hot(labels, 2), [], meta, TrainerConfig(**LINEAR))


# =========================================================
# 🔁 One Meta Step
# =========================================================
class TestMetaWeightStep:
    def test_sgd_update_is_weighted_gradient_step(self, small_problem):
        graph, x, labels, train_idx, meta = small_problem
        cfg = TrainerConfig(alpha=0.05, eta=1.0, hidden=[4], optimizer="sgd")
        params = init_params([3, 4, 2], seed=3)
        y = one_hot(labels, 2)
        result = meta_weight_step(params, graph, x, y, train_idx, meta, cfg)

        per_example = per_example_param_gradients(params, graph, x, y, train_idx, cfg)
        for l in range(params.n_layers):
            step = sum(w * g[l] for w, g in zip(result.weights.w, per_example))
            expected = params.layers[l] - 0.05 * step
            np.testing.assert_allclose(result.params.layers[l], expected, rtol=1e-10, atol=1e-14)

    def test_weights_invariant_over_steps(self, small_problem):
        graph, x, labels, train_idx, meta = small_problem
        cfg = TrainerConfig(alpha=0.05, hidden=[4], optimizer="adam")
        params = init_params([3, 4, 2], seed=5)
        y = one_hot(labels, 2)
        optimizer = build_optimizer(cfg)
        for _ in range(10):
            result = meta_weight_step(params, graph, x, y, train_idx, meta, cfg, optimizer)
            w = result.weights.w
            assert np.all(w >= 0.0)
            assert w.sum() == 0.0 or w.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(result.weights.gamma == 0.0)
            params = result.params

    def test_all_zero_proposals_give_zero_weights(self):
        """Meta labels opposite to every training label: each γᵢ increase lowers nothing, so w = 0."""
        x = np.tile([[1.0, 0.5]], (6, 1))
        labels = np.array([0, 0, 0, 1, 1, 1])
        meta = MetaSet(node_indices=np.arange(3, 6), features=x[3:], labels=labels[3:], graph=empty_graph(3))
        cfg = TrainerConfig(alpha=0.1, architecture="mlp", optimizer="sgd", **LINEAR)
        params = init_params([2, 2], seed=0)

        result = meta_weight_step(params, None, x, one_hot(labels, 2), np.arange(3), meta, cfg)
        assert np.all(result.meta_gradient > 0.0)
        assert np.all(result.weights.w_tilde == 0.0)
        assert np.all(result.weights.w == 0.0)
        np.testing.assert_array_equal(result.params.layers[0], params.layers[0])

    def test_all_zero_weights_freeze_adam(self):
        """Adam carrying moments from an earlier step still leaves θ untouched when w = 0."""
        x = np.tile([[1.0, 0.5]], (6, 1))
        labels = np.array([0, 0, 0, 1, 1, 1])
        y = one_hot(labels, 2)
        agreeing = MetaSet(np.arange(3), x[:3], labels[:3], empty_graph(3))
        opposing = MetaSet(np.arange(3, 6), x[3:], labels[3:], empty_graph(3))
        cfg = TrainerConfig(alpha=0.1, architecture="mlp", optimizer="adam", **LINEAR)
        optimizer = build_optimizer(cfg)

        primed = meta_weight_step(init_params([2, 2], seed=0), None, x, y, np.arange(3), agreeing, cfg, optimizer)
        assert primed.weights.w.sum() == pytest.approx(1.0)

        frozen = meta_weight_step(primed.params, None, x, y, np.arange(3), opposing, cfg, optimizer)
        assert np.all(frozen.weights.w == 0.0)
        for before, after in zip(primed.params.layers, frozen.params.layers):
            assert after.tobytes() == before.tobytes()

    def test_mirrored_balanced_classes_get_equal_weight(self):
        """Class-1 nodes mirror class-0 nodes (x → −x, same edges): per-class mean weights match."""
        class_means = []
        for seed in range(10):
            rng = np.random.default_rng(seed)
            half = rng.standard_normal((6, 3))
            block = random_adjacency(6, 0.4, seed).toarray()
            adjacency = np.block([[block, np.zeros((6, 6))], [np.zeros((6, 6)), block]])
            graph = GraphData.from_adjacency(sp.csr_matrix(adjacency))
            x = np.vstack([half, -half])
            labels = np.repeat([0, 1], 6)

            meta_x = rng.standard_normal((4, 3))
            meta = MetaSet(np.arange(4), meta_x, np.array([0, 0, 1, 1]), empty_graph(4))
            cfg = TrainerConfig(alpha=0.1, eta=1.0, optimizer="sgd", **LINEAR)
            result = meta_weight_step(
                init_params([3, 2], seed), graph, x, one_hot(labels, 2), np.arange(12), meta, cfg
            )
            w = result.weights.w
            class_means.append([w[:6].mean(), w[6:].mean()])

        mean0, mean1 = np.mean(class_means, axis=0)
        assert mean0 == pytest.approx(mean1, rel=0.1, abs=1e-12)

    def test_empty_meta_set_rejected(self, small_problem):
        graph, x, labels, train_idx, _ = small_problem
        with pytest.raises(ParameterError):
            meta_weight_step(init_params([3, 2], 0), graph, x, one_hot(labels, 2), train_idx, None,
                             TrainerConfig(**LINEAR))


# =========================================================
# 🏋️ Training Loop
# =========================================================
class TestTrain:
    def test_plain_mode_log(self, prepared):
        dataset, graph, splits, meta = prepared
        cfg = TrainerConfig(mode="plain", epochs=6, hidden=[8], optimizer="adam")
        result = train(dataset, graph, splits, meta, cfg)

        assert len(result.log) == 6
        assert [r.epoch for r in result.log.records] == list(range(1, 7))
        assert all(r.meta_loss is not None for r in result.log.records)
        assert result.log.records[0].w_mean == pytest.approx(1.0 / splits.train.size)

    def test_best_epoch_is_earliest_maximum(self, prepared):
        dataset, graph, splits, meta = prepared
        cfg = TrainerConfig(mode="meta", epochs=12, hidden=[8], optimizer="adam", alpha=0.02)
        result = train(dataset, graph, splits, meta, cfg)

        f1 = [r.validation.macro_f1 for r in result.log.records]
        assert result.best_epoch == int(np.argmax(f1)) + 1
        probs = predict_probabilities(result.params, graph, dataset.features, cfg)
        assert probs.shape == (dataset.n_nodes, 2)

    def test_meta_mode_weights_logged(self, prepared):
        dataset, graph, splits, meta = prepared
        result = train(dataset, graph, splits, meta, TrainerConfig(mode="meta", epochs=4, hidden=[8]))
        for record in result.log.records:
            assert record.w_min >= 0.0
            assert record.w_max <= 1.0
            assert record.meta_loss > 0.0

    def test_class_weighted_mode(self, prepared):
        dataset, graph, splits, meta = prepared
        result = train(dataset, graph, splits, None, TrainerConfig(mode="class_weighted", epochs=2, hidden=[4]))
        record = result.log.records[0]
        counts = np.bincount(dataset.labels[splits.train], minlength=2)
        assert record.class_mean_weights[0] * counts[0] == pytest.approx(0.5)
        assert record.class_mean_weights[1] * counts[1] == pytest.approx(0.5)
        assert record.meta_loss is None

    def test_plain_sgd_loss_decreases(self, communities):
        raw, graph = communities
        signs = np.where(raw.labels == 1, 1.0, -1.0)[:, None]
        dataset = replace(raw, features=raw.features + 3.0 * signs)
        splits = split(dataset, seed=0)
        cfg = TrainerConfig(mode="plain", optimizer="sgd", alpha=0.1, epochs=10, **LINEAR)
        losses = [r.train_loss for r in train(dataset, graph, splits, None, cfg).log.records]
        assert len(losses) == 10
        assert np.all(np.diff(losses) < 0.0)

    def test_mlp_needs_no_graph(self, prepared):
        dataset, _, splits, meta = prepared
        result = train(dataset, None, splits, meta, TrainerConfig(mode="plain", architecture="mlp", epochs=2))
        assert result.best_epoch >= 1

    def test_gcn_without_graph_rejected(self, prepared):
        dataset, _, splits, meta = prepared
        with pytest.raises(ParameterError):
            train(dataset, None, splits, meta, TrainerConfig(mode="plain", epochs=1))

    def test_meta_mode_requires_meta_set(self, prepared):
        dataset, graph, splits, _ = prepared
        with pytest.raises(ParameterError):
            train(dataset, graph, splits, None, TrainerConfig(mode="meta", epochs=1))

    def test_trainlog_csv(self, prepared, tmp_path):
        dataset, graph, splits, _ = prepared
        result = train(dataset, graph, splits, None, TrainerConfig(mode="plain", epochs=3, hidden=[4]))
        path = result.log.to_csv(tmp_path / "trainlog.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(TRAINLOG_COLUMNS)
        assert len(lines) == 4

    def test_same_seed_same_parameters(self, prepared):
        dataset, graph, splits, meta = prepared
        cfg = TrainerConfig(mode="meta", epochs=3, hidden=[4], seed=7)
        a = train(dataset, graph, splits, meta, cfg)
        b = train(dataset, graph, splits, meta, cfg)
        for la, lb in zip(a.final_params.layers, b.final_params.layers):
            assert la.tobytes() == lb.tobytes()
