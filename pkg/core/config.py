# core/config.py
"""
Process-wide settings read from the environment.

Settings follow the same pattern as the rest of the codebase: a module-level
constant read once with os.getenv and a small accessor for values that need
validation.
"""
import logging
import os

logger = logging.getLogger("pivq.config")

# Caps the number of joblib workers used for batch quantization and probing
PIVQ_THREADS = os.getenv("PIVQ_THREADS", "1")
LOG_LEVEL = os.getenv("PIVQ_LOG_LEVEL", "WARNING").upper()


def worker_count() -> int:
    """
    Number of workers for data-parallel sections.

    Reads PIVQ_THREADS at call time so tests can patch the environment.
    Invalid or non-positive values fall back to 1.

    Returns:
        Positive worker count
    """
    raw = os.getenv("PIVQ_THREADS", PIVQ_THREADS)
    try:
        value = int(raw)
    except (TypeError, ValueError):
        logger.warning("Ignoring invalid PIVQ_THREADS=%r, using 1 worker", raw)
        return 1
    return max(1, value)
