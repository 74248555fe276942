"""Closed-form moment evolution command"""

import argparse

import numpy as np

from swiftdeco.commands import deps
from swiftdeco.core.constants import MODE_CONSTANT, MODE_ENERGY_UPDATING
from swiftdeco.core.exceptions import EXIT_OK
from swiftdeco.schemas.kinetics import MomentTrajectory
from swiftdeco.schemas.scenario import Scenario
from swiftdeco.services.kinetics_service import KineticsService
from swiftdeco.services.output_service import OutputService
from swiftdeco.services.scenario_service import ScenarioService

NAME = "evolve"
HEADER = [
    "eta_t",
    "Kpar2",
    "Kperp2",
    "lpar_over_lT",
    "lperp_over_lT",
    "traveled_over_range",
]
# Points used for the short-time slope
_SLOPE_POINTS = 5


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        NAME,
        parents=[deps.scenario_options()],
        help="Analytic moment and coherence-length trajectories",
    )
    parser.add_argument(
        "--mode",
        choices=(MODE_CONSTANT, MODE_ENERGY_UPDATING),
        default=None,
        help="Coefficients frozen at k0 or re-evaluated along the trajectory",
    )
    parser.add_argument("--t-end", type=float, default=None, help="Final eta t")
    parser.set_defaults(handler=run)


def time_axis(scenario: Scenario, t_end=None) -> np.ndarray:
    """Log grid in eta t from the run block."""
    run = scenario.run
    return KineticsService.time_grid(
        run.t_start, run.t_end if t_end is None else t_end, run.n_times
    )


def trajectory_columns(
    trajectory: MomentTrajectory, l_thermal: float, range_: float
) -> dict[str, np.ndarray]:
    """The evolve CSV columns of a trajectory."""
    lengths = KineticsService.coherence_series(trajectory, l_thermal)
    return {
        "eta_t": trajectory.eta_t,
        "Kpar2": trajectory.Kpar2,
        "Kperp2": trajectory.Kperp2,
        "lpar_over_lT": lengths["lpar_over_lT"],
        "lperp_over_lT": lengths["lperp_over_lT"],
        "traveled_over_range": trajectory.traveled / range_,
    }


def trajectory_headline(columns: dict[str, np.ndarray]) -> dict[str, float]:
    """Minima, endpoints and short-time slopes of the coherence lengths."""
    eta_t = columns["eta_t"]
    out = {}
    for key in ("lpar_over_lT", "lperp_over_lT"):
        values = columns[key]
        out[f"min_{key}"] = float(np.min(values))
        out[f"final_{key}"] = float(values[-1])
        head = values[:_SLOPE_POINTS]
        if values.size > _SLOPE_POINTS and np.all(np.isfinite(head)) and np.all(head > 0):
            slopes = KineticsService.log_log_slope(eta_t[:_SLOPE_POINTS], head)
            out[f"short_time_slope_{key}"] = float(np.mean(slopes))
    out["final_traveled_over_range"] = float(columns["traveled_over_range"][-1])
    return out


def run(args: argparse.Namespace) -> int:
    """
    Kpar2, Kperp2, l/l_T and traveled distance on the scenario's time grid.

    Returns:
        Exit code
    """
    scenario = deps.get_scenario(args)
    model = deps.get_model(scenario)
    coefficients = deps.get_coefficients(scenario, model)
    particle, bath = scenario.particle, scenario.bath
    mode = args.mode or scenario.run.mode

    trajectory = KineticsService.evolve(
        particle,
        bath,
        model,
        eta_t=time_axis(scenario, args.t_end),
        mode=mode,
        coefficients=coefficients,
    )
    l_thermal = KineticsService.thermal_coherence_length(particle.mass_S, bath.temperature)
    range_ = KineticsService.range(particle.speed, coefficients.zeta)
    columns = trajectory_columns(trajectory, l_thermal, range_)

    headline, warnings = OutputService.summarize(scenario, model, coefficients)
    headline["mode"] = mode
    headline.update(trajectory_headline(columns))
    preamble = ScenarioService.preamble(scenario, coefficients)
    preamble["run.mode"] = mode
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
