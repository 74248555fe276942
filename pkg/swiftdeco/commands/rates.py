"""Collisional rates and transport coefficients command"""

import argparse

import numpy as np

from swiftdeco.commands import deps
from swiftdeco.core.constants import (HBAR, K_BOLTZMANN, MOMENT_QPAR,
                                      MOMENT_QPERP, MOMENT_TOTAL, MOMENT_TR)
from swiftdeco.core.exceptions import EXIT_OK, ParameterError
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.output_service import OutputService
from swiftdeco.services.scenario_service import ScenarioService
from swiftdeco.utils.numeric_utils import relative_error

NAME = "rates"
HEADER = [
    "k_over_k0",
    "k",
    "alpha_total",
    "alpha_tr",
    "alpha_qpar",
    "alpha_qperp",
    "eta",
    "zeta",
    "gamma",
    "xi",
]


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=[deps.scenario_options()],
        help="Bath-averaged rates and transport coefficients versus |k_S|",
    )
    parser.add_argument("--points", type=int, default=11, help="Number of wavenumbers")
    parser.add_argument(
        "--k-min", type=float, default=0.1, help="Smallest |k_S|, in units of |k0|"
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """
    Tabulate alpha_mu and eta, zeta, gamma, xi along the initial direction.

    The summary reports the coefficients at k0 (calibrated when the scenario
    asks for it), the zeta and fluctuation-dissipation identity residuals and
    the discrepancy between factorised and exact Kramers-Moyal moments.
    """
    if args.points < 1 or not 0 < args.k_min <= 1:
        raise ParameterError("Need points >= 1 and 0 < k-min <= 1")
    scenario = deps.get_scenario(args)
    model = deps.get_model(scenario)
    coefficients = deps.get_coefficients(scenario, model)
    particle, bath = scenario.particle, scenario.bath
    d = scenario.dimension

    fractions = np.linspace(args.k_min, 1.0, args.points)
    table = BathService.rate_table(model, particle, bath, fractions * particle.k0_norm)
    rows = []
    for i, fraction in enumerate(fractions):
        local = BathService.transport_from_alpha_tr(table[MOMENT_TR][i], particle, bath)
        rows.append(
            [
                fraction,
                fraction * particle.k0_norm,
                table[MOMENT_TOTAL][i],
                table[MOMENT_TR][i],
                table[MOMENT_QPAR][i],
                table[MOMENT_QPERP][i],
                local.eta,
                local.zeta,
                local.gamma,
                local.xi,
            ]
        )

    headline, warnings = OutputService.summarize(scenario, model, coefficients)
    headline["zeta_identity_residual"] = relative_error(
        coefficients.eta + (d - 1) * coefficients.gamma, coefficients.zeta
    )
    if coefficients.eta > 0 and not bath.is_frozen:
        headline["fluctuation_dissipation_residual"] = relative_error(
            coefficients.xi / coefficients.eta,
            particle.mass_S * K_BOLTZMANN * bath.temperature / HBAR**2,
        )
    report = BathService.factorization_discrepancy(model, particle, bath, particle.k0)
    headline["drift_factorization_discrepancy"] = report.drift_discrepancy
    headline["diffusion_factorization_discrepancy"] = report.diffusion_discrepancy
    headline["thermal_variance"] = coefficients.thermal_variance
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
