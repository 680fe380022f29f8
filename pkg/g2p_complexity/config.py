# g2p_complexity/config.py
from __future__ import annotations
import logging
import os

from dotenv import load_dotenv

load_dotenv()

# Central place for environment variables and defaults
OUTPUT_ROOT = os.environ.get("G2P_OUTPUT_ROOT", "./out")
DATA_DIR = os.environ.get("G2P_DATA_DIR", "./data")
LOG_LEVEL = os.environ.get("G2P_LOG_LEVEL", "INFO")

# Sampling protocol: 10k records per language, 8k/1k/1k
SAMPLE_SIZE = 10_000
SPLIT_SIZES = (8_000, 1_000, 1_000)

# Longest source/target sequence the model accepts (tokens)
MAX_SEQ_LEN = 64

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def output_root() -> str:
    """Re-read the override so tests and the CLI can change it at runtime."""
    return os.environ.get("G2P_OUTPUT_ROOT", OUTPUT_ROOT)


def setup_logging(level: str | int | None = None) -> None:
    level = level if level is not None else LOG_LEVEL
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    root = logging.getLogger()
    if not any(getattr(h, "_g2p", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._g2p = True
        root.addHandler(handler)
    root.setLevel(level)
