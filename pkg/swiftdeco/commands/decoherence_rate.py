"""Decoherence rate command"""

import argparse
import logging

import numpy as np

from swiftdeco.commands import deps
from swiftdeco.core.exceptions import EXIT_OK, ParameterError
from swiftdeco.services.decoherence_service import DecoherenceService
from swiftdeco.services.output_service import OutputService
from swiftdeco.services.scenario_service import ScenarioService
from swiftdeco.utils.numeric_utils import relative_error

logger = logging.getLogger(__name__)

NAME = "decoherence-rate"
HEADER = ["s_norm", "direction_id", "reF", "imF", "Wtot"]
# direction_id 0 is along k0, 1 is transverse to it
DIRECTION_IDS = (0, 1)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=[deps.scenario_options()],
        help="Complex decoherence rate F(s) along and across k0",
    )
    parser.add_argument("--points", type=int, default=48, help="Separations per direction")
    parser.add_argument(
        "--s-min", type=float, default=1e-2, help="Smallest |s|, in units of 1/|k0|"
    )
    parser.add_argument(
        "--s-max", type=float, default=1e2, help="Largest |s|, in units of 1/|k0|"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """
    F(s) on a log grid of separations, in the longitudinal and one transverse direction.

    The summary compares the window average of Re F over the last decade
    with W_tot.
    """
    if args.points < 2 or not 0 < args.s_min < args.s_max:
        raise ParameterError("Need points >= 2 and 0 < s-min < s-max")
    scenario = deps.get_scenario(args)
    model = deps.get_model(scenario)
    coefficients = deps.get_coefficients(scenario, model)
    particle, bath = scenario.particle, scenario.bath
    d = scenario.dimension
    scale = 1.0 / particle.k0_norm
    w_tot = DecoherenceService.total_collision_rate(model, particle, bath)
    directions = np.eye(d)[: len(DIRECTION_IDS)]
    directions[0] = particle.k0 / particle.k0_norm

    s_values = np.geomspace(args.s_min, args.s_max, args.points) * scale
    rows = []
    for direction_id, direction in zip(DIRECTION_IDS, directions):
        for s_norm in s_values:
            rate = DecoherenceService.decoherence_rate(
                model, particle, bath, s_norm * direction
            )
            rows.append([s_norm, direction_id, rate.re, rate.im, w_tot])
    logger.info("Evaluated F(s) at %d separations", len(rows))

    headline, warnings = OutputService.summarize(scenario, model, coefficients)
    for direction_id, direction in zip(DIRECTION_IDS, directions):
        window = DecoherenceService.window_average(
            model, particle, bath, direction, 0.1 * s_values[-1], s_values[-1]
        )
        headline[f"saturation_window_mean_{direction_id}"] = window
        headline[f"saturation_deviation_{direction_id}"] = relative_error(window, w_tot)
    deps.write_outputs(
        args,
        NAME,
        HEADER,
        rows,
        ScenarioService.preamble(scenario, coefficients),
        headline,
        warnings,
        scenario,
    )
    return EXIT_OK
