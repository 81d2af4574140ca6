import logging
import json
import sys
import functools
from datetime import datetime
from logging.handlers import RotatingFileHandler
from src.config import config

# =========================================================
# 🧱 Global Logger Setup
# =========================================================
logger = logging.getLogger("meta_gcn")
logger.setLevel(getattr(logging, config.LOG_LEVEL.upper(), logging.INFO))
logger.propagate = False

# Avoid duplicate handlers if reimported
if logger.hasHandlers():
    logger.handlers.clear()

CONTEXT_FIELDS = ("dataset", "method", "seed")


# =========================================================
# 🧩 Formatters
# =========================================================
class JSONFormatter(logging.Formatter):
    """JSON format for structured logs (one object per line)."""
    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            "timestamp": datetime.utcnow().isoformat(),
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        for field in CONTEXT_FIELDS:
            if hasattr(record, field):
                log_entry[field] = getattr(record, field)
        return json.dumps(log_entry)


class ColoredFormatter(logging.Formatter):
    """Simple color-coded output for interactive runs."""
    COLORS = {"DEBUG": "\033[36m", "INFO": "\033[32m", "WARNING": "\033[33m", "ERROR": "\033[31m", "END": "\033[0m"}

    def format(self, record):
        color = self.COLORS.get(record.levelname, "")
        msg = super().format(record)
        return f"{color}{msg}{self.COLORS['END']}"


# =========================================================
# 🖥️ Console Handler (always active, stderr keeps reports clean on stdout)
# =========================================================
console_handler = logging.StreamHandler(sys.stderr)
console_handler.setLevel(logging.DEBUG if config.DEBUG else logging.INFO)
console_handler.setFormatter(
    JSONFormatter()
    if config.is_json_logging else ColoredFormatter("%(asctime)s - %(levelname)s - %(message)s")
)
logger.addHandler(console_handler)

# =========================================================
# 📁 File Handler (Rotating)
# =========================================================
if config.LOG_FILE:
    file_handler = RotatingFileHandler(config.LOG_FILE, maxBytes=5 * 1024 * 1024, backupCount=5)
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(JSONFormatter())
    logger.addHandler(file_handler)
    logger.info(f"File logging active: {config.LOG_FILE}")


# =========================================================
# 🧩 Context-Aware Logging Decorator
# =========================================================
def log_with_context(level: str = "info"):
    """
    Decorator that logs a call together with its run context.
    Context keys (dataset, method, seed) are picked from keyword arguments.
    Usage:
        @log_with_context("info")
        def run_cell(*, dataset, method, seed): ...
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            context = {k: kwargs[k] for k in CONTEXT_FIELDS if k in kwargs}
            logger_method = getattr(logger, level, logger.info)
            logger_method(f"Executing {func.__name__} {context}", extra=context)
            return func(*args, **kwargs)
        return wrapper
    return decorator
