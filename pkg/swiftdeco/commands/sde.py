"""Ensemble (stochastic) evolution command"""

import argparse
import logging

import numpy as np

from swiftdeco.commands import deps
from swiftdeco.commands.evolve import (HEADER as EVOLVE_HEADER,
                                       time_axis, trajectory_columns,
                                       trajectory_headline)
from swiftdeco.core.constants import SCHEME_ANALYTIC, SCHEME_FULL_A2
from swiftdeco.core.exceptions import EXIT_OK, ParameterError
from swiftdeco.services.kinetics_service import KineticsService
from swiftdeco.services.output_service import OutputService
from swiftdeco.services.scenario_service import ScenarioService
from swiftdeco.services.sde_service import SdeService
from swiftdeco.utils.numeric_utils import relative_error

logger = logging.getLogger(__name__)

NAME = "sde"
HEADER = EVOLVE_HEADER + [
    "stderr_Kpar2",
    "stderr_Kperp2",
    "stderr_traveled_over_range",
]
# eta t beyond which the ensemble is compared with the equilibrium law
EQUILIBRIUM_ETA_T = 10.0


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=[deps.scenario_options()],
        help="Monte-Carlo ensemble of the momentum Fokker-Planck equation",
    )
    parser.add_argument(
        "-N", "--walkers", type=int, default=None, help="Ensemble size"
    )
    parser.add_argument("--dt", type=float, default=None, help="Step, in units of 1/eta")
    parser.add_argument("--t-end", type=float, default=None, help="Final eta t")
    parser.add_argument(
        "--scheme",
        choices=(SCHEME_ANALYTIC, SCHEME_FULL_A2),
        default=None,
        help="Scalar-coefficient step or full diffusion tensor",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """
    Ensemble moments with standard errors at the scenario checkpoints.

    Checkpoints are the run block's `checkpoints` or its log grid. The
    summary adds the largest deviation from the closed-form moments in
    standard errors and, after eta t >= 10 in a thermal bath, the
    equilibrium diagnostics.
    """
    scenario = deps.get_scenario(args)
    model = deps.get_model(scenario)
    coefficients = deps.get_coefficients(scenario, model)
    particle, bath = scenario.particle, scenario.bath
    run_spec = scenario.run
    walkers = run_spec.walkers if args.walkers is None else args.walkers
    scheme = args.scheme or run_spec.scheme
    dt_units = args.dt if args.dt is not None else run_spec.dt
    if walkers < 2:
        raise ParameterError("Need at least 2 walkers for standard errors")
    if dt_units is not None and not dt_units > 0:
        raise ParameterError("dt must be positive")
    if run_spec.checkpoints is not None:
        eta_t = np.asarray(run_spec.checkpoints, dtype=float)
        if args.t_end is not None:
            eta_t = np.append(eta_t[eta_t < args.t_end], args.t_end)
    else:
        eta_t = time_axis(scenario, args.t_end)
    seed = deps.get_seed(args, scenario)
    threads = deps.get_threads(args)

    trajectory, final = SdeService.simulate(
        particle,
        bath,
        model,
        eta_t,
        walkers,
        dt=None if dt_units is None else dt_units / coefficients.eta,
        seed=seed,
        scheme=scheme,
        threads=threads,
        coefficients=coefficients,
    )
    l_thermal = KineticsService.thermal_coherence_length(particle.mass_S, bath.temperature)
    range_ = KineticsService.range(particle.speed, coefficients.zeta)
    columns = trajectory_columns(trajectory, l_thermal, range_)
    columns["stderr_Kpar2"] = trajectory.stderr["Kpar2"]
    columns["stderr_Kperp2"] = trajectory.stderr["Kperp2"]
    columns["stderr_traveled_over_range"] = trajectory.stderr["traveled"] / range_

    headline, warnings = OutputService.summarize(scenario, model, coefficients)
    headline.update(
        {"walkers": walkers, "seed": seed, "threads": threads, "scheme": scheme}
    )
    headline.update(trajectory_headline(columns))
    # Reference carries the rotational feed-through 2 gamma K^2 into Kpar2
    exact = KineticsService.fokker_planck_variance_split(
        particle.k0_norm**2,
        coefficients.eta,
        coefficients.zeta,
        coefficients.gamma,
        coefficients.xi,
        particle.d,
        trajectory.t,
    )
    for key in ("Kpar2", "Kperp2"):
        se = np.maximum(trajectory.stderr[key], np.finfo(float).tiny)
        z = np.abs(getattr(trajectory, key) - getattr(exact, key)) / se
        headline[f"max_z_{key}"] = float(np.max(z))
    if trajectory.eta_t[-1] >= EQUILIBRIUM_ETA_T and not bath.is_frozen:
        report = SdeService.equilibrium_check(final, particle, bath)
        headline["equilibrium_variance_error"] = relative_error(
            report.variance_ratio, np.ones_like(report.variance_ratio)
        )
        headline["equilibrium_ks_distance"] = float(np.max(report.ks_distance))
        headline["equilibrium_isotropy_ratio"] = report.isotropy_ratio
    if trajectory.km_regime_violated:
        logger.warning("Ensemble run outside the Kramers-Moyal regime")

    preamble = ScenarioService.preamble(scenario, coefficients)
    preamble.update(
        {
            "run.walkers": str(walkers),
            "run.seed": str(seed),
            "run.threads": str(threads),
            "run.scheme": scheme,
        }
    )
    deps.write_outputs(
        args,
        NAME,
        HEADER,
        zip(*(columns[key] for key in HEADER)),
        preamble,
        headline,
        warnings,
        scenario,
    )
    return EXIT_OK
