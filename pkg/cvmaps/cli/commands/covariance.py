import argparse
import logging

from cvmaps.cli.deps import add_common_arguments, get_config, get_output_dir
from cvmaps.core.exceptions import EXIT_FAILURE, EXIT_OK, CvMapsError
from cvmaps.services.covariance_service import covariance_service

logger = logging.getLogger(__name__)


def handle_covariance(args: argparse.Namespace) -> int:
    try:
        config = get_config(args)
        result = covariance_service.run(config, get_output_dir(args, config))
        if not result.oracle_converged:
            logger.warning("Covariance oracle did not converge at every time; analytic columns may be inaccurate")
        for path in result.files:
            print(path)
        return EXIT_OK
    except CvMapsError as e:
        logger.error(e.detail)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Covariance sweep failed: {e}")
        return EXIT_FAILURE


def register(subparsers) -> None:
    parser = subparsers.add_parser("covariance", help="finite-difference covariance sweep against the quadrature oracle")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle_covariance)
