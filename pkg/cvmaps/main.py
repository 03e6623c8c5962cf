import argparse
import logging
from typing import List, Optional

from cvmaps.cli import COMMANDS
from cvmaps.core.config import settings
from cvmaps.core.exceptions import EXIT_CONFIG_ERROR
from cvmaps.core.logging import setup_logging

logger = logging.getLogger(__name__)


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvmaps",
        description="Discretized two-mode squeezed vacuum: cut maps, entanglement measures and covariances",
    )
    parser.add_argument("--version", action="version", version=f"{settings.PROJECT_NAME} {settings.VERSION}")
    parser.add_argument("--log-level", default=None, help=f"logging level (default {settings.LOG_LEVEL})")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for register in COMMANDS:
        register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors, which is also the config-error code
        return EXIT_CONFIG_ERROR if e.code else 0
    setup_logging(args.log_level)
    logger.debug(f"Running {args.command}")
    return args.handler(args)
