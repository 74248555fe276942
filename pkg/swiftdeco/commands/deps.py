"""Shared command dependencies (scenario, output location, seeds)"""

import argparse
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from swiftdeco.config import get_settings
from swiftdeco.schemas.bath import TransportCoefficients
from swiftdeco.schemas.scenario import Scenario
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.services.output_service import SUMMARY_FILENAME, OutputService
from swiftdeco.services.scenario_service import ScenarioService

OUTPUT_FORMATS = ("csv",)


def output_options() -> argparse.ArgumentParser:
    """Flags shared by every subcommand that writes files."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--out-dir", type=Path, default=None, help="Output directory")
    parser.add_argument(
        "--format", choices=OUTPUT_FORMATS, default="csv", help="Output format"
    )
    return parser


def scenario_options() -> argparse.ArgumentParser:
    """Scenario argument plus the seed and thread overrides."""
    parser = argparse.ArgumentParser(add_help=False, parents=[output_options()])
    parser.add_argument(
        "scenario", help="Scenario file, or the name of a bundled scenario"
    )
    parser.add_argument("--seed", type=int, default=None, help="Master random seed")
    parser.add_argument(
        "--threads", type=int, default=None, help="Worker and partition count"
    )
    return parser


def get_scenario(args: argparse.Namespace) -> Scenario:
    """Load the scenario named on the command line."""
    return ScenarioService.load_scenario(args.scenario)


def get_model(scenario: Scenario) -> BaseCrossSectionModel:
    return ScenarioService.model(scenario)


def get_coefficients(
    scenario: Scenario, model: BaseCrossSectionModel
) -> TransportCoefficients:
    return ScenarioService.coefficients(scenario, model)


def get_seed(args: argparse.Namespace, scenario: Optional[Scenario] = None) -> int:
    """--seed, else the scenario seed, else the configured default."""
    if getattr(args, "seed", None) is not None:
        return args.seed
    if scenario is not None:
        return scenario.run.seed
    return get_settings().default_seed


def get_threads(args: argparse.Namespace) -> int:
    threads = getattr(args, "threads", None)
    return get_settings().threads if threads is None else threads


def get_out_dir(args: argparse.Namespace, scenario: Optional[Scenario] = None) -> Path:
    """--out-dir, else the scenario's output.dir, else the configured directory."""
    if args.out_dir is not None:
        return Path(args.out_dir)
    if scenario is not None and scenario.output.dir:
        return Path(scenario.output.dir)
    return Path(get_settings().out_dir)


def write_outputs(
    args: argparse.Namespace,
    command: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    preamble: dict[str, str],
    headline: dict[str, Any],
    warnings: Sequence[str],
    scenario: Optional[Scenario] = None,
) -> tuple[Path, Path]:
    """
    Write <prefix><command>.csv and <prefix><command>_summary.txt.

    Args:
        args: Parsed command-line arguments
        command: Subcommand name, used in the file names
        header: CSV column names
        rows: CSV rows
        preamble: `# key = value` lines of the CSV
        headline: Summary values
        warnings: Validity warnings for the summary
        scenario: Scenario, for its output directory and prefix

    Returns:
        (CSV path, summary path)
    """
    out_dir = get_out_dir(args, scenario)
    prefix = scenario.output.prefix if scenario is not None else ""
    stem = command.replace("-", "_")
    csv_path = OutputService.write_csv(
        OutputService.output_path(out_dir, prefix, f"{stem}.csv"),
        header,
        rows,
        preamble,
    )
    summary_path = OutputService.write_summary(
        OutputService.output_path(out_dir, prefix, f"{stem}_{SUMMARY_FILENAME}"),
        f"swiftdeco {command}",
        headline,
        warnings,
    )
    return csv_path, summary_path
