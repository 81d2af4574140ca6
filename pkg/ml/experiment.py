"""
Experiment Harness
------------------
- Loads (or generates) the dataset named in the ExperimentConfig.
- Per seed: split → standardize (train statistics) → graph → meta set.
- Per (method, seed) cell: train, select the best-validation checkpoint,
  evaluate on the test split and write the cell artifacts.
- Aggregates every cell into a ResultTable and writes the comparison tables.

Output layout:
    <out>/<dataset>/<method>/seed<k>/{trainlog.csv, splits.txt, params.bin, metrics.json}
    <out>/table.{txt,csv,json}
"""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional

from joblib import Parallel, delayed
from tqdm import tqdm

from ml.config_loader import flatten_config
from ml.report import write_tables
from src.data.datasets import TabularDataset, load_dataset, standardize
from src.data.meta_set import MetaSet, sample_meta_set
from src.data.smote import smote_oversample
from src.data.splits import SplitAssignment, split, write_split_manifest
from src.data.synthetic import make_community_dataset, make_two_moons_dataset
from src.gcn_engine.constants import EXTERNAL_METHODS
from src.gcn_engine.graph import GraphData, knn_graph, read_edge_list
from src.gcn_engine.meta_trainer import predict_probabilities, train
from src.gcn_engine.metrics import compute_metrics
from src.gcn_engine.model import save_params
from src.models.experiment import CellResult, CellStatus, ExperimentConfig, ResultTable
from src.models.training import Architecture, TrainerConfig, TrainingMode
from src.utils.logger import log_with_context, logger

# 🧩 Method → (architecture, mode, oversample)
METHOD_SETUP = {
    "mlp": (Architecture.MLP, TrainingMode.PLAIN, False),
    "gcn": (Architecture.GCN, TrainingMode.PLAIN, False),
    "gcn_weighted": (Architecture.GCN, TrainingMode.CLASS_WEIGHTED, False),
    "smote": (Architecture.GCN, TrainingMode.PLAIN, True),
    "meta_gcn": (Architecture.GCN, TrainingMode.META, False),
}


@dataclass(frozen=True)
class SeedContext:
    """Everything one seed's cells share."""
    seed: int
    dataset: TabularDataset
    graph: GraphData
    splits: SplitAssignment
    meta_set: MetaSet


# =========================================================
# 📥 Dataset & Graph
# =========================================================
def load_experiment_data(cfg: ExperimentConfig):
    """(raw dataset, fixed graph or None). A fixed graph comes from the generator or graph.edges."""
    dc = cfg.dataset
    fixed_graph: Optional[GraphData] = None
    if dc.generator == "two_moons":
        dataset = make_two_moons_dataset(dc.n_nodes, dc.minority_fraction, dc.noise, dc.seed)
    elif dc.generator == "community":
        dataset, fixed_graph = make_community_dataset(
            dc.n_nodes, dc.n_features, dc.minority_fraction, dc.p_in, dc.p_out, dc.seed
        )
    else:
        dataset = load_dataset(dc.path, dc.schema_, dc.display_name)

    dataset = replace(dataset, name=dc.display_name)
    if cfg.graph.edges:
        fixed_graph = read_edge_list(cfg.graph.edges, dataset.n_nodes)
    return dataset, fixed_graph


def prepare_seed(
    raw: TabularDataset,
    fixed_graph: Optional[GraphData],
    cfg: ExperimentConfig,
    seed: int,
) -> SeedContext:
    splits = split(raw, seed)
    dataset = standardize(raw, splits.train)
    graph = fixed_graph or knn_graph(dataset.features, cfg.graph.k, cfg.graph.metric)
    meta_set = sample_meta_set(dataset, splits, graph, cfg.meta.per_class, seed)
    return SeedContext(seed=seed, dataset=dataset, graph=graph, splits=splits, meta_set=meta_set)


# =========================================================
# 🧪 One Cell
# =========================================================
def cell_dir(out: str | Path, dataset: str, method: str, seed: int) -> Path:
    return Path(out) / dataset / method / f"seed{seed}"


def trainer_for(method: str, base: TrainerConfig, seed: int) -> TrainerConfig:
    architecture, mode, _ = METHOD_SETUP[method]
    return base.model_copy(update={"architecture": architecture, "mode": mode, "seed": base.seed + seed})


def _write_cell(result: CellResult, directory: Path) -> CellResult:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "metrics.json").write_text(result.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return result


@log_with_context("debug")
def run_cell(
    cfg: ExperimentConfig,
    context: Optional[SeedContext],
    *,
    dataset: str,
    method: str,
    seed: int,
    setup_error: Optional[str] = None,
) -> CellResult:
    """Train and evaluate one (method, seed); never raises."""
    directory = cell_dir(cfg.experiment.out, dataset, method, seed)
    base = {"dataset": dataset, "method": method, "seed": seed}

    if method in EXTERNAL_METHODS:
        result = CellResult(**base, status=CellStatus.SKIPPED, error="evaluated with external code")
        return _write_cell(result, directory)
    if setup_error is not None:
        return _write_cell(CellResult(**base, status=CellStatus.FAILED, error=setup_error), directory)

    try:
        trainer_cfg = trainer_for(method, cfg.trainer, seed)
        d, graph, train_idx = context.dataset, context.graph, context.splits.train
        if METHOD_SETUP[method][2]:
            augmented = smote_oversample(
                d, train_idx, cfg.smote.scale, cfg.smote.k, seed, graph, cfg.graph.k, cfg.graph.metric
            )
            d, graph, train_idx = augmented.dataset, augmented.graph, augmented.train_indices

        trained = train(d, graph, context.splits, context.meta_set, trainer_cfg, train_indices=train_idx)
        probs = predict_probabilities(trained.params, graph, d.features, trainer_cfg)
        test = context.splits.test
        metrics = compute_metrics(probs[test], d.labels[test], n_classes=d.class_count)

        directory.mkdir(parents=True, exist_ok=True)
        trained.log.to_csv(directory / "trainlog.csv")
        write_split_manifest(context.splits, directory / "splits.txt")
        save_params(trained.params, directory / "params.bin")
        result = CellResult(**base, status=CellStatus.OK, metrics=metrics, best_epoch=trained.best_epoch)
        logger.info(
            f"[EXPERIMENT] {dataset}/{method}/seed{seed}: acc={metrics.accuracy:.4f} "
            f"macro_f1={metrics.macro_f1:.4f} auc={metrics.auc_roc:.4f}"
        )
    except Exception as exc:
        logger.error(f"❌ [EXPERIMENT] {dataset}/{method}/seed{seed} failed: {type(exc).__name__}: {exc}")
        result = CellResult(**base, status=CellStatus.FAILED, error=f"{type(exc).__name__}: {exc}")
    return _write_cell(result, directory)


# =========================================================
# 🚀 Full Run
# =========================================================
def run_experiment(
    cfg: ExperimentConfig,
    dataset: Optional[TabularDataset] = None,
    graph: Optional[GraphData] = None,
) -> ResultTable:
    """
    Run every (method, seed) cell of the configuration.

    Args:
        cfg: validated experiment configuration.
        dataset: in-memory dataset replacing cfg.dataset (tests, notebooks).
        graph: fixed graph over `dataset` replacing k-NN construction.
    """
    if dataset is None:
        raw, fixed_graph = load_experiment_data(cfg)
    else:
        raw, fixed_graph = dataset, graph
    name = raw.name
    out = Path(cfg.experiment.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text("\n".join(flatten_config(cfg)) + "\n", encoding="utf-8")

    logger.info(
        f"[EXPERIMENT] {name}: methods={cfg.experiment.methods}, seeds={cfg.experiment.seed_list}, "
        f"jobs={cfg.experiment.n_jobs}, out={out}"
    )

    jobs = []
    for seed in cfg.experiment.seed_list:
        context, setup_error = None, None
        try:
            context = prepare_seed(raw, fixed_graph, cfg, seed)
        except Exception as exc:
            setup_error = f"{type(exc).__name__}: {exc}"
            logger.error(f"❌ [EXPERIMENT] Seed {seed} setup failed: {setup_error}")
        for method in cfg.experiment.methods:
            jobs.append(delayed(run_cell)(
                cfg, context, dataset=name, method=method, seed=seed, setup_error=setup_error
            ))

    runner = Parallel(n_jobs=cfg.experiment.n_jobs, return_as="generator")
    progress = tqdm(runner(jobs), total=len(jobs), desc=f"{name} cells", disable=len(jobs) < 2)
    cells: List[CellResult] = list(progress)

    table = ResultTable.from_cells(cells)
    write_tables(table, out)
    n_failed = sum(c.status is CellStatus.FAILED for c in cells)
    logger.info(f"[EXPERIMENT] Finished {len(cells)} cells ({n_failed} failed). Tables in {out}")
    return table


def method_means(table: ResultTable, dataset: str, metric: str) -> dict:
    """{method: mean of `metric`} for the populated rows of one dataset."""
    means = {}
    for row in table.rows:
        summary = getattr(row, metric)
        if row.dataset == dataset and summary is not None:
            means[row.method] = summary.mean
    return means


__all__ = [
    "METHOD_SETUP",
    "SeedContext",
    "load_experiment_data",
    "prepare_seed",
    "run_cell",
    "run_experiment",
    "trainer_for",
    "method_means",
]
