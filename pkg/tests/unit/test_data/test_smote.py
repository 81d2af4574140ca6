"""
Unit Tests: SMOTE Oversampling
------------------------------
Covers src/data/smote.py.
Validates:
- Every synthetic row lies on a segment between two real minority rows
- Minority count reaches round(scale × majority)
- Synthetic nodes are appended to the graph and the training indices
"""

import itertools

import numpy as np
import pytest

from src.data.datasets import standardize
from src.data.smote import smote_oversample, smote_target
from src.data.splits import split
from src.gcn_engine.exceptions import ParameterError
from src.gcn_engine.graph import knn_graph


@pytest.fixture
def prepared(two_moons):
    splits = split(two_moons, seed=0)
    return standardize(two_moons, splits.train), splits


def on_minority_segment(row, minority_rows) -> bool:
    for a, b in itertools.permutations(minority_rows, 2):
        diff = b - a
        t = float(np.dot(row - a, diff) / np.dot(diff, diff))
        if -1e-12 <= t <= 1 + 1e-12 and np.allclose(a + t * diff, row, rtol=0, atol=1e-12):
            return True
    return False


def test_smote_target():
    assert smote_target(10, 40, 0.8) == 32
    assert smote_target(10, 40, 0.1) == 10


def test_synthetic_rows_are_convex_combinations(prepared):
    d, splits = prepared
    result = smote_oversample(d, splits.train, scale=0.8, k=5, seed=0)
    minority_rows = d.features[splits.train][d.labels[splits.train] == 1]

    synthetic = result.dataset.features[d.n_nodes:]
    assert synthetic.shape[0] == result.n_synthetic > 0
    for row in synthetic:
        assert on_minority_segment(row, minority_rows)


@pytest.mark.parametrize("scale", [0.5, 0.8, 1.0])
def test_class_ratio_matches_scale(prepared, scale):
    d, splits = prepared
    result = smote_oversample(d, splits.train, scale=scale, k=5, seed=1)
    train_labels = result.dataset.labels[result.train_indices]
    n_majority = int((train_labels == 0).sum())
    n_minority = int((train_labels == 1).sum())
    assert abs(n_minority - scale * n_majority) <= 1.0


def test_original_rows_untouched(prepared):
    d, splits = prepared
    result = smote_oversample(d, splits.train, scale=1.0, seed=2)
    np.testing.assert_array_equal(result.dataset.features[: d.n_nodes], d.features)
    np.testing.assert_array_equal(result.train_indices[: splits.train.size], splits.train)
    synthetic_idx = np.arange(d.n_nodes, result.dataset.n_nodes)
    np.testing.assert_array_equal(result.train_indices[splits.train.size:], synthetic_idx)
    assert np.all(result.dataset.labels[d.n_nodes:] == 1)


def test_graph_extended(prepared):
    d, splits = prepared
    graph = knn_graph(d.features, k=3)
    result = smote_oversample(d, splits.train, scale=0.8, seed=0, graph=graph, graph_k=3)
    assert result.graph.n_nodes == result.dataset.n_nodes
    np.testing.assert_array_equal(
        result.graph.adjacency[: d.n_nodes, : d.n_nodes].toarray(), graph.adjacency.toarray()
    )
    new_degrees = np.asarray(result.graph.adjacency[d.n_nodes:].sum(axis=1)).ravel()
    assert np.all(new_degrees == 3)


def test_nothing_to_generate(prepared):
    d, splits = prepared
    result = smote_oversample(d, splits.train, scale=0.1)
    assert result.n_synthetic == 0
    assert result.dataset is d


def test_same_seed_same_rows(prepared):
    d, splits = prepared
    a = smote_oversample(d, splits.train, seed=4)
    b = smote_oversample(d, splits.train, seed=4)
    np.testing.assert_array_equal(a.dataset.features, b.dataset.features)


def test_rejects_bad_parameters(prepared):
    d, splits = prepared
    with pytest.raises(ParameterError):
        smote_oversample(d, splits.train, scale=0.0)
    with pytest.raises(ParameterError):
        smote_oversample(d, splits.train, k=0)
