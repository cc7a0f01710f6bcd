"""Utility functions for lmcf-lab."""

import hashlib
import logging
import math
from pathlib import Path

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"


def get_config_dir():
    """Directory holding settings and the log: ~/.lmcf."""
    return Path.home() / ".lmcf"


def get_config_file():
    """Path of the YAML settings file."""
    return get_config_dir() / "config.yaml"


def get_log_file():
    """Path of the run log."""
    return get_config_dir() / "lmcf.log"


def _handler(handler, level, fmt, datefmt=None):
    handler.setLevel(getattr(logging, str(level).upper(), logging.DEBUG))
    handler.setFormatter(logging.Formatter(fmt, datefmt=datefmt))
    return handler


def setup_logging(level=None):
    """Set up logging to file and console.

    Args:
        level: Optional level name for the file handler (default: DEBUG)

    Returns:
        logging.Logger: The package logger
    """
    logger = logging.getLogger("lmcf_lab")
    logger.setLevel(logging.DEBUG)

    file_handlers = [h for h in logger.handlers if isinstance(h, logging.FileHandler)]
    if file_handlers:
        if level is not None:
            for handler in file_handlers:
                handler.setLevel(getattr(logging, str(level).upper(), logging.DEBUG))
        return logger

    get_log_file().parent.mkdir(parents=True, exist_ok=True)
    to_file = _handler(logging.FileHandler(get_log_file()), level or "DEBUG", LOG_FORMAT, LOG_DATEFMT)
    # stderr only sees failures; progress goes through print
    to_console = _handler(logging.StreamHandler(), "ERROR", "%(message)s")
    for handler in (to_file, to_console):
        logger.addHandler(handler)

    return logger


def format_float(value):
    """Format a float with shortest round-trip precision.

    Args:
        value: Number to format

    Returns:
        str: ``repr`` of the float, or ``inf``/``-inf``/``nan``
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def json_number(value):
    """Convert a float to something ``json`` can emit without NaN tokens.

    Infinite values become the strings ``"inf"``/``"-inf"``.
    """
    value = float(value)
    if math.isinf(value) or math.isnan(value):
        return format_float(value)
    return value


def sha256_file(path):
    """Compute the hex sha256 digest of a file.

    Args:
        path: File to hash

    Returns:
        str: Hex digest
    """
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()

