"""
Dataset Download
----------------
Fetches the two UCI benchmark files into the data directory.

- Skips files that already exist unless `force=True`.
- Checks the column count of the first row before writing.
"""

from pathlib import Path
from typing import Dict, List, Optional

import requests

from src.config import config
from src.gcn_engine.exceptions import DataError
from src.utils.logger import logger

DATASET_URLS: Dict[str, str] = {
    "haberman.data": "https://archive.ics.uci.edu/ml/machine-learning-databases/haberman/haberman.data",
    "pima-indians-diabetes.data.csv": (
        "https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.data.csv"
    ),
}
EXPECTED_COLUMNS = {"haberman.data": 4, "pima-indians-diabetes.data.csv": 9}


def _check_payload(filename: str, text: str) -> None:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise DataError(f"{filename}: empty download")
    width = len(rows[-1].split(","))
    if width != EXPECTED_COLUMNS[filename]:
        raise DataError(f"{filename}: expected {EXPECTED_COLUMNS[filename]} columns, got {width}")


def fetch_dataset(filename: str, data_dir: Optional[str | Path] = None, force: bool = False, timeout: int = 30) -> Path:
    """Download one file from DATASET_URLS; returns its local path."""
    if filename not in DATASET_URLS:
        raise DataError(f"unknown dataset file '{filename}', choose from {list(DATASET_URLS)}")
    target = Path(data_dir or config.DATA_DIR) / filename
    if target.exists() and not force:
        logger.info(f"[DATA] {target} already present, skipping")
        return target

    try:
        response = requests.get(DATASET_URLS[filename], timeout=timeout)
        response.raise_for_status()
    except requests.RequestException as exc:
        raise DataError(f"download of {filename} failed: {exc}") from exc

    _check_payload(filename, response.text)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(response.text, encoding="utf-8")
    logger.info(f"✅ [DATA] Saved {target}")
    return target


def fetch_all(data_dir: Optional[str | Path] = None, force: bool = False) -> List[Path]:
    return [fetch_dataset(name, data_dir, force) for name in DATASET_URLS]
