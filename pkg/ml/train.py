"""
Meta-GCN Command Line
---------------------
- run:       train every configured method on every seed and write the tables.
- report:    rebuild the comparison table from a results directory.
- gradcheck: finite-difference checks of the model and meta-gradients.

Run:
    metagcn run --config configs/haberman.ini --trainer.eta 0.5 --seeds 3
    metagcn report --in runs/haberman --format csv
    metagcn gradcheck --instances 20
Exit codes:
    0 success · 1 config error · 2 data error · 3 numeric failure
"""

import argparse
import sys
from typing import List, Optional

from src.config import config
from src.gcn_engine.exceptions import MetaGcnError
from src.utils.logger import logger

from ml.config_loader import load_experiment_config
from ml.report import REPORT_FORMATS, collect_results, plot_table, report

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


# =========================================================
# 🧭 Argument Parsing
# =========================================================
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metagcn",
        description="Meta-learned example re-weighting for GCNs on imbalanced node classification",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="Run an experiment config",
        description="Extra '--section.key value' flags override INI entries.",
        allow_abbrev=False,
    )
    run.add_argument("--config", required=True, help="INI experiment file")
    run.add_argument("--seeds", type=int, help="Number of seeds (experiment.n_seeds)")
    run.add_argument("--out", help="Output directory (experiment.out)")
    run.add_argument("--jobs", type=int, help="Parallel cells (experiment.n_jobs)")
    run.add_argument("--format", choices=REPORT_FORMATS, default="text", help="Table printed on stdout")

    rep = sub.add_parser("report", help="Summarize a results directory", allow_abbrev=False)
    rep.add_argument("--in", dest="results_dir", required=True, help="Results directory of a run")
    rep.add_argument("--format", choices=REPORT_FORMATS, default="text")
    rep.add_argument("--plot", help="Also save a macro-F1 bar chart to this path")

    grad = sub.add_parser("gradcheck", help="Finite-difference gradient checks", allow_abbrev=False)
    grad.add_argument("--instances", type=int, default=config.GRADCHECK_INSTANCES)
    grad.add_argument("--seed", type=int, default=0)
    return parser


# =========================================================
# 🚀 Commands
# =========================================================
def cmd_run(args: argparse.Namespace, overrides: List[str]) -> int:
    from ml.experiment import run_experiment

    extra = {}
    if args.seeds is not None:
        extra["experiment.n_seeds"] = str(args.seeds)
        extra["experiment.seeds"] = ""
    if args.out is not None:
        extra["experiment.out"] = args.out
    if args.jobs is not None:
        extra["experiment.n_jobs"] = str(args.jobs)

    cfg = load_experiment_config(args.config, overrides, extra)
    table = run_experiment(cfg)
    sys.stdout.write(report(table, args.format))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    table = collect_results(args.results_dir)
    sys.stdout.write(report(table, args.format))
    if args.plot:
        plot_table(table, args.plot)
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    from src.gcn_engine.gradcheck import run_gradcheck

    result = run_gradcheck(instances=args.instances, seed=args.seed)
    for case in result.cases:
        status = "ok" if case.passed else "FAIL"
        sys.stdout.write(
            f"{case.check:<14} instance={case.instance:<3} N={case.n_nodes:<2} F={case.n_features} "
            f"error_ratio={case.max_error:.3e} {status}\n"
        )
    if not result.passed:
        logger.error(f"❌ [GRADCHECK] {len(result.failures)} check(s) failed")
        return EXIT_NUMERIC
    logger.info("✅ [GRADCHECK] All gradient checks passed")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, unknown = parser.parse_known_args(argv)
    if unknown and args.command != "run":
        parser.error(f"unrecognized arguments: {' '.join(unknown)}")

    try:
        if args.command == "run":
            return cmd_run(args, unknown)
        if args.command == "report":
            return cmd_report(args)
        return cmd_gradcheck(args)
    except MetaGcnError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
