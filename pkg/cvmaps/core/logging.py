import logging

from cvmaps.core.config import settings


def setup_logging(level: str = None) -> None:
    """Configure the root logger once for CLI runs"""
    level_name = (level or settings.LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=settings.LOG_FORMAT,
        force=True,
    )
    logging.getLogger(__name__).debug(f"Logging configured at {level_name}")
