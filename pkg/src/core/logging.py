import logging
import sys

from src.core.config import settings

def setup_logging() -> logging.Logger:
    """Setup centralized logger for the toolkit."""
    logger = logging.getLogger("hsrecon")
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))

    # Format: Timestamp, Level, Module, Function, Line Number, Message
    formatter = logging.Formatter(
        "%(asctime)s - %(levelname)s - %(name)s.%(funcName)s:%(lineno)d - %(message)s"
    )

    stream_handler = logging.StreamHandler(sys.stdout)
    stream_handler.setFormatter(formatter)

    if not logger.handlers:
        logger.addHandler(stream_handler)

    return logger

def set_level(level: str) -> None:
    """Adjust the shared logger level at runtime (CLI --log-level)."""
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))

logger = setup_logging()
