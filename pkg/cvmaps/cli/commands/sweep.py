import argparse
import logging

from cvmaps.cli.deps import add_common_arguments, get_config, get_output_dir
from cvmaps.core.exceptions import EXIT_FAILURE, EXIT_OK, CvMapsError
from cvmaps.services.sweep_service import sweep_service

logger = logging.getLogger(__name__)


def handle_sweep(args: argparse.Namespace) -> int:
    """Entropy and negativity time sweep written as CSV tables."""
    try:
        config = get_config(args)
        result = sweep_service.run(config, get_output_dir(args, config))
        for path in result.files:
            print(path)
        return EXIT_OK
    except CvMapsError as e:
        logger.error(e.detail)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Sweep failed: {e}")
        return EXIT_FAILURE


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="time sweep of entropies and log negativity")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle_sweep)
