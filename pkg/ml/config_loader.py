"""
Experiment Config Loader
------------------------
- Reads an INI file with [dataset], [graph], [trainer], [meta], [smote] and
  [experiment] sections into flat `section.key` pairs.
- Overlays command-line flags of the same dotted name (`--trainer.eta 0.5`
  or `--trainer.eta=0.5`).
- Validates the result with the pydantic ExperimentConfig.

Usage:
    cfg = load_experiment_config("configs/haberman.ini", ["--trainer.epochs", "50"])
"""

import configparser
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from src.config import config
from src.gcn_engine.exceptions import ConfigError
from src.models.experiment import ExperimentConfig
from src.utils.logger import logger


# =========================================================
# 📄 INI → flat pairs
# =========================================================
def read_ini(path: str | Path) -> Dict[str, str]:
    """Return {'section.key': 'raw value'} for every entry of the file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")

    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    return {
        f"{section}.{key}": value
        for section in parser.sections()
        for key, value in parser.items(section)
    }


def parse_overrides(tokens: Sequence[str]) -> Dict[str, str]:
    """'--section.key value' / '--section.key=value' tokens → {'section.key': 'value'}."""
    overrides: Dict[str, str] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or "." not in token.split("=", 1)[0]:
            raise ConfigError(f"unrecognized argument '{token}' (expected --section.key value)")
        if "=" in token:
            key, value = token[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for '{token}'")
            key, value = token[2:], tokens[i + 1]
            i += 2
        overrides[key] = value
    return overrides


def _nest(flat: Dict[str, str]) -> Dict[str, Dict[str, str]]:
    nested: Dict[str, Dict[str, str]] = {}
    for dotted, value in flat.items():
        section, _, key = dotted.partition(".")
        if not section or not key:
            raise ConfigError(f"config key '{dotted}' must look like section.key")
        nested.setdefault(section, {})[key] = value
    return nested


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(p) for p in error["loc"])
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


# =========================================================
# ✅ Validation
# =========================================================
def build_experiment_config(flat: Dict[str, str]) -> ExperimentConfig:
    """Validate flat pairs; process-level defaults fill experiment.out / experiment.n_jobs."""
    values = {"experiment.out": config.OUTPUT_DIR, "experiment.n_jobs": str(config.N_JOBS), **flat}
    try:
        return ExperimentConfig.model_validate(_nest(values))
    except ValidationError as exc:
        raise ConfigError(f"invalid experiment config: {_format_validation_error(exc)}") from exc


def load_experiment_config(
    path: str | Path,
    override_tokens: Optional[Sequence[str]] = None,
    extra: Optional[Dict[str, str]] = None,
) -> ExperimentConfig:
    """
    Load, overlay and validate an experiment config.

    Args:
        path: INI file.
        override_tokens: raw '--section.key value' command-line tokens.
        extra: already-parsed overrides (e.g. from --seeds/--out/--jobs), applied last.
    """
    flat = read_ini(path)
    overrides: Dict[str, str] = {**parse_overrides(override_tokens or []), **(extra or {})}
    flat.update(overrides)
    if overrides:
        logger.info(f"[EXPERIMENT] Config overrides: {overrides}")
    return build_experiment_config(flat)


def flatten_config(cfg: ExperimentConfig) -> List[str]:
    """'section.key = value' lines, used to record the effective config next to results."""
    lines = []
    for section, values in cfg.model_dump(mode="json", by_alias=True).items():
        for key, value in values.items():
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            lines.append(f"{section}.{key} = {'' if value is None else value}")
    return lines
