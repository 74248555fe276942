"""Logging setup"""

import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> None:
    """Configure the root logger once for CLI runs."""
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, force=True)
    logging.captureWarnings(True)
