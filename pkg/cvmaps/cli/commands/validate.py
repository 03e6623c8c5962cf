import argparse
import logging

from cvmaps.cli.deps import add_common_arguments, get_config
from cvmaps.core.exceptions import EXIT_FAILURE, EXIT_OK, CvMapsError
from cvmaps.services.validation_service import validation_service

logger = logging.getLogger(__name__)


def handle_validate(args: argparse.Namespace) -> int:
    try:
        config = get_config(args)
        report = validation_service.run(config)
        for check in report.failures:
            print(f"FAIL {check.module}: {check.property}: observed {check.observed}, expected {check.expected}")
        passed = sum(check.passed for check in report.checks)
        print(f"{passed}/{len(report.checks)} checks passed")
        return EXIT_OK if report.passed else EXIT_FAILURE
    except CvMapsError as e:
        logger.error(e.detail)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Validation failed: {e}")
        return EXIT_FAILURE


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="run the invariant and acceptance suite")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle_validate)
