"""Subcommand aggregator"""

import argparse

from swiftdeco.commands import (decoherence_rate, evolve, moments, rates, sde,
                                verify)
from swiftdeco.config import LOG_LEVELS, get_settings

COMMANDS = (moments, rates, decoherence_rate, evolve, sde, verify)


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one subparser per command module."""
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="swiftdeco",
        description="Transport and decoherence kinetics of a fast particle in a gas",
    )
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=settings.log_level,
        help="Logging level",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser
