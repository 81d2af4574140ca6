"""
Unit Tests: Result Reports
--------------------------
Covers ml/report.py: the "m.mm ± s.ss" text table, CSV and JSON output,
collecting per-cell metrics.json files and the bar chart.
"""

import json

import pandas as pd
import pytest

from ml.report import (
    collect_results,
    format_summary,
    parse_json,
    plot_table,
    render_text,
    report,
    write_tables,
)
from src.gcn_engine.exceptions import DataError, ParameterError
from src.models.experiment import CellResult, CellStatus, MetricSummary, ResultTable
from src.models.training import MetricReport


def ok_cell(method: str, seed: int, f1: float, dataset: str = "haberman") -> CellResult:
    return CellResult(
        dataset=dataset,
        method=method,
        seed=seed,
        status=CellStatus.OK,
        metrics=MetricReport(accuracy=0.7, macro_f1=f1, auc_roc=0.6),
        best_epoch=3,
    )


@pytest.fixture
def table():
    cells = [
        ok_cell("meta_gcn", 0, 0.60),
        ok_cell("meta_gcn", 1, 0.80),
        ok_cell("gcn", 0, 0.50),
        ok_cell("gcn", 1, 0.50),
        CellResult(dataset="haberman", method="graph_smote_external", seed=0, status=CellStatus.SKIPPED),
    ]
    return ResultTable.from_cells(cells)


def test_format_summary():
    assert format_summary(MetricSummary(mean=0.7389, std=0.1712)) == "0.74 ± 0.17"
    assert format_summary(None) == "n/a"


class TestText:
    def test_layout(self, table):
        text = render_text(table)
        lines = text.splitlines()
        assert lines[0].startswith("Method") and "haberman" in lines[0]
        assert "Accuracy" in lines[1] and "Macro F1" in lines[1] and "AUC-ROC" in lines[1]
        assert set(lines[2]) == {"-"}
        assert [line.split()[0] for line in lines[3:]] == ["GCN", "GraphSMOTE", "Meta-GCN"]

    def test_cells(self, table):
        text = render_text(table)
        meta_line = next(line for line in text.splitlines() if line.startswith("Meta-GCN"))
        assert "0.70 ± 0.00" in meta_line
        assert "0.70 ± 0.10" in meta_line
        skipped_line = next(line for line in text.splitlines() if line.startswith("GraphSMOTE"))
        assert skipped_line.count("skipped") == 3


class TestFormats:
    def test_csv(self, table):
        from io import StringIO

        frame = pd.read_csv(StringIO(report(table, "csv")))
        assert list(frame["method"]) == ["gcn", "graph_smote_external", "meta_gcn"]
        meta = frame[frame["method"] == "meta_gcn"].iloc[0]
        assert meta["macro_f1_mean"] == pytest.approx(0.7)
        assert meta["macro_f1_std"] == pytest.approx(0.1)
        assert frame[frame["method"] == "graph_smote_external"]["macro_f1_mean"].isna().all()

    def test_json_round_trip(self, table):
        text = report(table, "json")
        assert json.loads(text)["rows"][0]["method"] == "gcn"
        assert parse_json(text) == table

    def test_empty_table(self):
        with pytest.raises(ParameterError):
            report(ResultTable(), "text")

    def test_unknown_format(self, table):
        with pytest.raises(ParameterError):
            report(table, "xml")

    def test_write_tables(self, table, tmp_path):
        paths = write_tables(table, tmp_path / "out")
        assert [p.name for p in paths] == ["table.txt", "table.csv", "table.json"]
        assert (tmp_path / "out" / "table.txt").read_text(encoding="utf-8") == render_text(table)


class TestCollect:
    def test_rebuilds_table(self, tmp_path, table):
        for cell in table.cells:
            cell_dir = tmp_path / cell.dataset / cell.method / f"seed{cell.seed}"
            cell_dir.mkdir(parents=True)
            (cell_dir / "metrics.json").write_text(cell.model_dump_json(), encoding="utf-8")
        assert collect_results(tmp_path) == table

    def test_missing_dir(self, tmp_path):
        with pytest.raises(DataError):
            collect_results(tmp_path / "nope")

    def test_empty_dir(self, tmp_path):
        with pytest.raises(DataError, match="no metrics.json"):
            collect_results(tmp_path)

    def test_corrupt_cell(self, tmp_path):
        cell_dir = tmp_path / "haberman" / "gcn" / "seed0"
        cell_dir.mkdir(parents=True)
        (cell_dir / "metrics.json").write_text("{not json", encoding="utf-8")
        with pytest.raises(DataError, match="unreadable"):
            collect_results(tmp_path)


class TestPlot:
    def test_writes_png(self, table, tmp_path):
        path = plot_table(table, tmp_path / "charts" / "f1.png")
        assert path.exists() and path.stat().st_size > 0

    def test_unknown_metric(self, table, tmp_path):
        with pytest.raises(ParameterError):
            plot_table(table, tmp_path / "x.png", metric="precision")
