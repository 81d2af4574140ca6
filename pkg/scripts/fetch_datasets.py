"""
Download the Haberman and Pima diabetes files into $METAGCN_DATA_DIR (default: data/).

Run:
    python scripts/fetch_datasets.py [--force] [--data-dir data]
"""

import argparse
import sys

from src.data.fetch import fetch_all
from src.gcn_engine.exceptions import DataError
from src.utils.logger import logger

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Fetch the UCI benchmark datasets")
    parser.add_argument("--data-dir", default=None, help="Target directory")
    parser.add_argument("--force", action="store_true", help="Overwrite existing files")
    args = parser.parse_args()

    try:
        for path in fetch_all(args.data_dir, args.force):
            print(path)
    except DataError as exc:
        logger.error(f"❌ {exc}")
        sys.exit(exc.exit_code)
