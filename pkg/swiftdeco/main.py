"""Command-line entry point"""

import logging
from typing import Optional, Sequence

from swiftdeco.commands.router import build_parser
from swiftdeco.core.exceptions import EXIT_RUNTIME, AppException
from swiftdeco.core.logging import configure_logging

logger = logging.getLogger(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run the subcommand and map errors to exit codes.

    Application errors exit with their own code (2 parse, 3 tolerance or
    regime, 4 runtime); anything else is a runtime error.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        return args.handler(args)
    except AppException as exc:
        logger.error("%s: %s", exc.error_type, exc.message)
        if exc.details:
            logger.debug("Details: %s", exc.details)
        return exc.exit_code
    except Exception as exc:
        logger.exception("Unhandled exception: %s", exc)
        return EXIT_RUNTIME
