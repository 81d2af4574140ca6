"""
Integration Tests: Experiment Harness
-------------------------------------
Runs the full (method × seed) grid on a small generated problem and checks
the artifacts, the skipped external baseline and run-to-run determinism.
"""

import json

import numpy as np
import pandas as pd
import pytest

from ml.config_loader import load_experiment_config
from ml.experiment import method_means, run_experiment
from src.data.splits import read_split_manifest
from src.gcn_engine.constants import TRAINLOG_COLUMNS
from src.gcn_engine.model import load_params
from src.models.experiment import CellStatus


@pytest.fixture
def cfg(synthetic_ini):
    return load_experiment_config(synthetic_ini)


class TestRun:
    def test_table_rows(self, cfg):
        table = run_experiment(cfg)
        assert table.datasets == ["community"]
        assert table.methods == list(cfg.experiment.methods)
        assert len(table.cells) == 6 * 2
        for row in table.rows:
            expected = CellStatus.SKIPPED if row.method == "graph_smote_external" else CellStatus.OK
            assert row.status is expected
        assert set(method_means(table, "community", "macro_f1")) == {
            "mlp", "gcn", "gcn_weighted", "smote", "meta_gcn"
        }

    def test_cell_artifacts(self, cfg):
        run_experiment(cfg)
        out = cfg.experiment.out
        cell = f"{out}/community/meta_gcn/seed1"

        log = pd.read_csv(f"{cell}/trainlog.csv")
        assert list(log.columns) == TRAINLOG_COLUMNS
        assert log["epoch"].tolist() == [1, 2, 3, 4]

        splits = read_split_manifest(f"{cell}/splits.txt")
        assert sum(part.size for part in splits.parts()) == 60

        params = load_params(f"{cell}/params.bin")
        assert params.widths == [3, 4, 2]

        metrics = json.loads(open(f"{cell}/metrics.json", encoding="utf-8").read())
        assert metrics["status"] == "ok"
        assert 1 <= metrics["best_epoch"] <= 4

    def test_external_method_skipped(self, cfg):
        run_experiment(cfg)
        cell = f"{cfg.experiment.out}/community/graph_smote_external/seed0"
        metrics = json.loads(open(f"{cell}/metrics.json", encoding="utf-8").read())
        assert metrics["status"] == "skipped"
        assert metrics["metrics"] is None

    def test_tables_and_config_written(self, cfg):
        run_experiment(cfg)
        out = cfg.experiment.out
        text = open(f"{out}/table.txt", encoding="utf-8").read()
        assert "Meta-GCN" in text and "skipped" in text
        assert "trainer.epochs = 4" in open(f"{out}/config.txt", encoding="utf-8").read()


class TestDeterminism:
    def test_identical_tables(self, cfg, tmp_path):
        first = run_experiment(cfg.model_copy(update={
            "experiment": cfg.experiment.model_copy(update={"out": str(tmp_path / "a")})
        }))
        second = run_experiment(cfg.model_copy(update={
            "experiment": cfg.experiment.model_copy(update={"out": str(tmp_path / "b")})
        }))
        assert first == second
        for name in ("table.json", "table.txt", "table.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_parallel_matches_serial(self, cfg, tmp_path):
        serial = run_experiment(cfg.model_copy(update={
            "experiment": cfg.experiment.model_copy(update={"out": str(tmp_path / "s"), "n_jobs": 1})
        }))
        parallel = run_experiment(cfg.model_copy(update={
            "experiment": cfg.experiment.model_copy(update={"out": str(tmp_path / "p"), "n_jobs": 2})
        }))
        assert serial == parallel


def test_in_memory_dataset(cfg, two_moons):
    table = run_experiment(cfg, dataset=two_moons)
    assert table.datasets == [two_moons.name]
    f1 = method_means(table, two_moons.name, "macro_f1")
    assert all(0.0 <= value <= 1.0 for value in f1.values())
    assert np.isfinite(list(f1.values())).all()
