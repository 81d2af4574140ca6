"""
Result Reports
--------------
- Renders a ResultTable as a text comparison table ("m.mm ± s.ss" per cell,
  methods × {Accuracy, Macro F1, AUC-ROC} per dataset), CSV or JSON.
- Rebuilds a ResultTable from the per-cell metrics.json files of a run.
- Optional bar chart of one metric per method (matplotlib).

Run:
    metagcn report --in runs/haberman --format text
Output:
    <out>/table.txt, <out>/table.csv, <out>/table.json
"""

from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from src.gcn_engine.exceptions import DataError, ParameterError
from src.models.experiment import CellResult, CellStatus, MethodSummary, MetricSummary, ResultTable
from src.utils.logger import logger

# =========================================================
# 🧩 Constants
# =========================================================
REPORT_FORMATS = ("text", "csv", "json")
METRIC_COLUMNS = [("accuracy", "Accuracy"), ("macro_f1", "Macro F1"), ("auc_roc", "AUC-ROC")]
CELL_WIDTH = 13
METHOD_WIDTH = 14


def format_summary(summary: Optional[MetricSummary]) -> str:
    """'0.74 ± 0.17' (two decimals each)."""
    if summary is None:
        return "n/a"
    return f"{summary.mean:.2f} ± {summary.std:.2f}"


def _row_cells(row: Optional[MethodSummary]) -> List[str]:
    if row is None:
        return ["n/a"] * len(METRIC_COLUMNS)
    if row.status is not CellStatus.OK:
        return [row.status.value] * len(METRIC_COLUMNS)
    return [format_summary(getattr(row, key)) for key, _ in METRIC_COLUMNS]


# =========================================================
# 📝 Renderers
# =========================================================
def render_text(table: ResultTable) -> str:
    datasets = table.datasets
    block = CELL_WIDTH * len(METRIC_COLUMNS)
    lines = [
        "Method".ljust(METHOD_WIDTH) + "".join(f"| {name}".ljust(block + 2) for name in datasets).rstrip(),
        "".ljust(METHOD_WIDTH) + "".join(
            "| " + "".join(label.ljust(CELL_WIDTH) for _, label in METRIC_COLUMNS) for _ in datasets
        ).rstrip(),
    ]
    lines.append("-" * len(lines[1]))
    for method in table.methods:
        label = next(r.label for r in table.rows if r.method == method)
        cells = "".join(
            "| " + "".join(c.ljust(CELL_WIDTH) for c in _row_cells(table.row(dataset, method)))
            for dataset in datasets
        )
        lines.append((label.ljust(METHOD_WIDTH) + cells).rstrip())
    return "\n".join(lines) + "\n"


def to_frame(table: ResultTable) -> pd.DataFrame:
    records = []
    for row in table.rows:
        record: Dict[str, object] = {
            "dataset": row.dataset,
            "method": row.method,
            "label": row.label,
            "status": row.status.value,
            "n_ok": row.n_ok,
            "n_failed": row.n_failed,
            "n_skipped": row.n_skipped,
        }
        for key, _ in METRIC_COLUMNS:
            summary = getattr(row, key)
            record[f"{key}_mean"] = None if summary is None else summary.mean
            record[f"{key}_std"] = None if summary is None else summary.std
        records.append(record)
    return pd.DataFrame(records)


def render_csv(table: ResultTable) -> str:
    return to_frame(table).to_csv(index=False, float_format="%.6f", lineterminator="\n")


def render_json(table: ResultTable) -> str:
    return table.model_dump_json(indent=2) + "\n"


def parse_json(text: str) -> ResultTable:
    return ResultTable.model_validate_json(text)


def report(table: ResultTable, fmt: str = "text") -> str:
    """Serialize the table as text, csv or json."""
    if not table.rows:
        raise ParameterError("cannot report an empty result table")
    renderers = {"text": render_text, "csv": render_csv, "json": render_json}
    if fmt not in renderers:
        raise ParameterError(f"unknown report format '{fmt}', choose from {list(REPORT_FORMATS)}")
    return renderers[fmt](table)


# =========================================================
# 💾 Persistence
# =========================================================
def write_tables(table: ResultTable, out_dir: str | Path) -> List[Path]:
    """Write table.txt / table.csv / table.json under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt, suffix in (("text", "txt"), ("csv", "csv"), ("json", "json")):
        path = out_dir / f"table.{suffix}"
        path.write_text(report(table, fmt), encoding="utf-8")
        paths.append(path)
    logger.info(f"[REPORT] Tables saved to {out_dir}")
    return paths


def collect_results(results_dir: str | Path) -> ResultTable:
    """Rebuild a ResultTable from every <dataset>/<method>/seed<k>/metrics.json below results_dir."""
    results_dir = Path(results_dir)
    if not results_dir.is_dir():
        raise DataError(f"results directory not found: {results_dir}")

    cells = []
    for path in sorted(results_dir.rglob("seed*/metrics.json")):
        try:
            cells.append(CellResult.model_validate_json(path.read_text(encoding="utf-8")))
        except ValueError as exc:
            raise DataError(f"{path}: unreadable cell result ({exc})") from exc
    if not cells:
        raise DataError(f"no metrics.json files under {results_dir}")

    logger.info(f"[REPORT] Collected {len(cells)} cells from {results_dir}")
    return ResultTable.from_cells(cells)


def plot_table(table: ResultTable, path: str | Path, metric: str = "macro_f1") -> Path:
    """Grouped bar chart (one group per dataset) of `metric` mean with std error bars."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if metric not in dict(METRIC_COLUMNS):
        raise ParameterError(f"unknown metric '{metric}'")
    frame = to_frame(table).dropna(subset=[f"{metric}_mean"])
    if frame.empty:
        raise ParameterError("no populated rows to plot")

    means = frame.pivot(index="dataset", columns="label", values=f"{metric}_mean")
    stds = frame.pivot(index="dataset", columns="label", values=f"{metric}_std")
    ax = means.plot(kind="bar", yerr=stds, capsize=3, figsize=(8, 4), rot=0)
    ax.set_ylabel(dict(METRIC_COLUMNS)[metric])
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="lower right", fontsize="small")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    plt.tight_layout()
    plt.savefig(path)
    plt.close()
    logger.info(f"[REPORT] Chart saved: {path}")
    return path
