"""
Configuration management for the Meta-GCN experiment toolkit.
-------------------------------------------------------------
- Loads environment variables from `.env` (for local) or the runtime environment.
- Centralized access for logging, data/output locations and parallelism.
- Experiment hyperparameters live in the INI files under `configs/`
  (see `ml/config_loader.py`); this object only holds process-level settings.
"""

import os
import json
from typing import Optional
from dotenv import load_dotenv

# Load .env only in local/dev mode
if os.getenv("ENV", "local") == "local":
    load_dotenv()


class Config:
    """Central configuration object for process-level environment variables."""

    # =========================================================
    # 🧩 Helper
    # =========================================================
    @staticmethod
    def _from_env(key: str, default: Optional[str] = None, cast=None):
        """Load environment variable with optional casting."""
        value = os.getenv(key, default)
        if cast and value is not None:
            try:
                return cast(value)
            except ValueError:
                return default
        return value

    # =========================================================
    # 📁 DATA & ARTIFACTS
    # =========================================================
    DATA_DIR: str = _from_env.__func__("METAGCN_DATA_DIR", "data")
    OUTPUT_DIR: str = _from_env.__func__("METAGCN_OUTPUT_DIR", "runs")

    # =========================================================
    # ⚙️ EXECUTION SETTINGS
    # =========================================================
    N_JOBS: int = _from_env.__func__("METAGCN_N_JOBS", 1, int)
    GRADCHECK_INSTANCES: int = _from_env.__func__("METAGCN_GRADCHECK_INSTANCES", 20, int)

    # =========================================================
    # 🚀 APP SETTINGS
    # =========================================================
    DEBUG: bool = _from_env.__func__("DEBUG", "False", lambda v: v.lower() == "true")
    LOG_LEVEL: str = _from_env.__func__("LOG_LEVEL", "INFO").upper()
    LOG_FORMAT: str = _from_env.__func__("LOG_FORMAT", "text").lower()  # text/json
    LOG_FILE: Optional[str] = _from_env.__func__("LOG_FILE")
    ENV: str = _from_env.__func__("ENV", "local")  # local/ci

    # =========================================================
    # ✅ Computed Properties
    # =========================================================
    @property
    def haberman_path(self) -> str:
        """Default location of the UCI Haberman survival file."""
        return os.path.join(self.DATA_DIR, "haberman.data")

    @property
    def diabetes_path(self) -> str:
        """Default location of the Pima Indians diabetes file."""
        return os.path.join(self.DATA_DIR, "pima-indians-diabetes.data.csv")

    @property
    def is_json_logging(self) -> bool:
        return self.LOG_FORMAT == "json"

    # =========================================================
    # 📋 Config Summary
    # =========================================================
    def print_summary(self) -> None:
        """Pretty-print configuration summary (safe for logs)."""
        summary = {
            "ENV": self.ENV,
            "DEBUG": self.DEBUG,
            "LOG_LEVEL": self.LOG_LEVEL,
            "LOG_FORMAT": self.LOG_FORMAT,
            "LOG_FILE": self.LOG_FILE,
            "DATA_DIR": self.DATA_DIR,
            "OUTPUT_DIR": self.OUTPUT_DIR,
            "N_JOBS": self.N_JOBS,
            "GRADCHECK_INSTANCES": self.GRADCHECK_INSTANCES,
        }

        print("\n🔧 Active Configuration:")
        print(json.dumps(summary, indent=4))


# =========================================================
# Instantiate Global Config
# =========================================================
config = Config()

if __name__ == "__main__":
    config.print_summary()
