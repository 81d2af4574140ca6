"""
Pytest Configuration File
-------------------------
Shared fixtures for the Meta-GCN test suite.

- Redirects the default output directory into tmp_path for every test
- Small graphs, generated datasets and fast trainer configs
- Helpers writing INI configs and UCI-format data files
"""

import textwrap

import numpy as np
import pytest
import scipy.sparse as sp

from src.config import config
from src.data.synthetic import make_community_dataset, make_two_moons_dataset
from src.gcn_engine.graph import GraphData
from src.models.training import TrainerConfig


# =========================================================
# 🧩 Environment Isolation
# =========================================================
@pytest.fixture(autouse=True)
def isolate_output_dir(tmp_path, monkeypatch):
    """Runs without an explicit `out` land in tmp_path, never in the repo."""
    monkeypatch.setattr(config, "OUTPUT_DIR", str(tmp_path / "runs"), raising=False)
    monkeypatch.setattr(config, "N_JOBS", 1, raising=False)
    yield


# =========================================================
# 🕸️ Graphs
# =========================================================
@pytest.fixture
def path_graph():
    """0 - 1 - 2 - 3"""
    rows, cols = [0, 1, 1, 2, 2, 3], [1, 0, 2, 1, 3, 2]
    return GraphData.from_adjacency(sp.csr_matrix((np.ones(6), (rows, cols)), shape=(4, 4)))


def random_adjacency(n: int, p: float, seed: int) -> sp.csr_matrix:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return sp.csr_matrix((upper | upper.T).astype(np.float64))


# =========================================================
# 📦 Datasets
# =========================================================
@pytest.fixture
def two_moons():
    return make_two_moons_dataset(n_nodes=60, minority_fraction=0.3, noise=0.1, seed=0)


@pytest.fixture
def communities():
    return make_community_dataset(n_nodes=80, n_features=4, minority_fraction=0.3, p_in=0.4, p_out=0.02, seed=1)


@pytest.fixture
def fast_trainer():
    return TrainerConfig(epochs=5, hidden=[8], optimizer="adam", alpha=0.01)


# =========================================================
# 📄 Files
# =========================================================
def haberman_rows(n_rows: int = 60, seed: int = 0) -> str:
    """Haberman-format text: age, year, nodes, status (1 or 2, about a quarter are 2)."""
    rng = np.random.default_rng(seed)
    lines = []
    for i in range(n_rows):
        status = 2 if i % 4 == 0 else 1
        age = int(rng.integers(30, 80))
        year = int(rng.integers(58, 70))
        nodes = int(rng.integers(0, 20)) + (8 if status == 2 else 0)
        lines.append(f"{age},{year},{nodes},{status}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def haberman_file(tmp_path):
    path = tmp_path / "haberman.data"
    path.write_text(haberman_rows(), encoding="utf-8")
    return path


@pytest.fixture
def write_ini(tmp_path):
    """Write a dedented INI string and return its path."""
    def _write(body: str, name: str = "experiment.ini"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(body).lstrip(), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def synthetic_ini(write_ini, tmp_path):
    """Small community experiment: 2 seeds, few epochs, every method."""
    return write_ini(f"""
        [dataset]
        generator = community
        n_nodes = 60
        n_features = 3
        minority_fraction = 0.3
        p_in = 0.4
        p_out = 0.02
        seed = 3

        [graph]
        k = 3

        [trainer]
        optimizer = adam
        epochs = 4
        hidden = 4

        [experiment]
        methods = mlp, gcn, gcn_weighted, smote, graph_smote_external, meta_gcn
        n_seeds = 2
        out = {tmp_path / "results"}
    """)
