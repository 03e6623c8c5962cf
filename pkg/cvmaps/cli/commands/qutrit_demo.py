import argparse
import logging
from pathlib import Path

from cvmaps.cli.deps import add_common_arguments
from cvmaps.core.exceptions import EXIT_FAILURE, EXIT_OK, CvMapsError
from cvmaps.services.demo_service import demo_service

logger = logging.getLogger(__name__)


def handle_qutrit_demo(args: argparse.Namespace) -> int:
    """Print the qutrit-to-qubit cuts; with --out also write them to qutrit_demo.txt."""
    try:
        report = demo_service.run_qutrit_demo()
        text = demo_service.format_report(report)
        print(text)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "qutrit_demo.txt").write_text(text + "\n", encoding="utf-8")
        if not report.passed:
            logger.error("Some qutrit cuts differ from their closed forms")
            return EXIT_FAILURE
        return EXIT_OK
    except CvMapsError as e:
        logger.error(e.detail)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Qutrit demo failed: {e}")
        return EXIT_FAILURE


def register(subparsers) -> None:
    parser = subparsers.add_parser("qutrit-demo", help="cut sample qutrits down to qubits")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle_qutrit_demo)
