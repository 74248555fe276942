"""Cross-section moments command"""

import argparse
import logging

import numpy as np

from swiftdeco.commands import deps
from swiftdeco.core.exceptions import EXIT_OK, ParameterError
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_section_service import CrossSectionService
from swiftdeco.services.output_service import OutputService
from swiftdeco.services.scenario_service import ScenarioService

logger = logging.getLogger(__name__)

NAME = "moments"
HEADER = [
    "k_over_k0",
    "k",
    "sigma",
    "sigma_tr",
    "sigma_qpar",
    "sigma_qperp",
    "quad_identity_residual",
    "order",
]


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=[deps.scenario_options()],
        help="Angular moments of the cross section over a wavenumber grid",
    )
    parser.add_argument("--points", type=int, default=25, help="Number of wavenumbers")
    parser.add_argument(
        "--k-min", type=float, default=0.1, help="Smallest k, in units of k0"
    )
    parser.add_argument(
        "--k-max", type=float, default=2.0, help="Largest k, in units of k0"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """
    Tabulate sigma, sigma_tr, sigma_qpar and sigma_qperp.

    k0 here is the frozen-bath relative wavenumber (m_B/M)|k_S0|, the value
    the regime diagnostics use. The summary repeats the moments at k0.

    Args:
        args: Parsed arguments

    Returns:
        Exit code
    """
    if args.points < 1 or not 0 < args.k_min <= args.k_max:
        raise ParameterError("Need points >= 1 and 0 < k-min <= k-max")
    scenario = deps.get_scenario(args)
    model = deps.get_model(scenario)
    coefficients = deps.get_coefficients(scenario, model)
    pair = BathService.kinematics(scenario.particle, scenario.bath)
    k_ref = pair.mass_B / pair.total_mass * scenario.particle.k0_norm

    fractions = np.geomspace(args.k_min, args.k_max, args.points)
    rows = []
    for fraction in fractions:
        m = CrossSectionService.moments(model, fraction * k_ref)
        residual = abs(0.5 * (m.sigma_qpar + m.sigma_qperp) - m.sigma_tr) / m.sigma_tr
        rows.append(
            [
                fraction,
                m.k,
                m.sigma_total,
                m.sigma_tr,
                m.sigma_qpar,
                m.sigma_qperp,
                residual,
                m.order,
            ]
        )
    logger.info("Tabulated moments at %d wavenumbers", len(rows))

    headline, warnings = OutputService.summarize(scenario, model, coefficients)
    at_k0 = CrossSectionService.moments(model, k_ref)
    headline.update(
        {
            "k_rel": k_ref,
            "sigma": at_k0.sigma_total,
            "sigma_tr": at_k0.sigma_tr,
            "sigma_qpar": at_k0.sigma_qpar,
            "sigma_qperp": at_k0.sigma_qperp,
            "max_quad_identity_residual": max(row[6] for row in rows),
        }
    )
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
