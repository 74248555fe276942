"""CSV and summary writers"""

import csv
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

from swiftdeco.config import get_settings
from swiftdeco.core.constants import CSV_FLOAT_FORMAT, K_BOLTZMANN
from swiftdeco.schemas.bath import TransportCoefficients
from swiftdeco.schemas.scenario import Scenario
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.services.decoherence_service import DecoherenceService
from swiftdeco.services.kinetics_service import KineticsService

logger = logging.getLogger(__name__)

SUMMARY_FILENAME = "summary.txt"


def format_value(value: Any) -> str:
    """Floats in fixed scientific notation, everything else as text."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return CSV_FLOAT_FORMAT.format(value)
    return str(value)


class OutputService:
    """Service for self-describing output files"""

    @staticmethod
    def output_path(out_dir: Union[str, Path], prefix: str, name: str) -> Path:
        """out_dir/<prefix><name>, creating the directory."""
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        return directory / f"{prefix}{name}"

    @staticmethod
    def write_csv(
        path: Union[str, Path],
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        preamble: Mapping[str, str],
    ) -> Path:
        """
        Write a CSV file with a `# key = value` preamble.

        Args:
            path: Output file
            header: Column names, in output order
            rows: Row values, same length as the header
            preamble: Resolved scenario and run parameters

        Returns:
            The written path
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            for key, value in preamble.items():
                handle.write(f"# {key} = {value}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(
                        f"Row has {len(row)} values for {len(header)} columns"
                    )
                writer.writerow([format_value(value) for value in row])
        logger.info("Wrote %s", path)
        return path

    @staticmethod
    def read_csv(path: Union[str, Path]) -> tuple[dict[str, str], list[str], np.ndarray]:
        """Preamble, header and numeric body of a file written by write_csv."""
        preamble: dict[str, str] = {}
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        body_start = 0
        for body_start, line in enumerate(lines):
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition("=")
            preamble[key.strip()] = value.strip()
        header = lines[body_start].split(",")
        rows = [
            [float(x) for x in line.split(",")] for line in lines[body_start + 1 :] if line
        ]
        return preamble, header, np.array(rows).reshape(len(rows), len(header))

    @staticmethod
    def summarize(
        scenario: Scenario,
        model: BaseCrossSectionModel,
        coefficients: TransportCoefficients,
    ) -> tuple[dict[str, Any], list[str]]:
        """
        Headline numbers and validity warnings shared by every subcommand.

        Reports the short-time coherence ratio, l_T, the range v0/zeta, the
        total collision rate and the regime diagnostics k0 l_scat and
        sigma_tr/sigma.

        Args:
            scenario: Resolved scenario
            model: Cross-section model of the scenario
            coefficients: Transport coefficients at k0 (calibrated if asked)

        Returns:
            (ordered headline values, warning messages)
        """
        particle, bath = scenario.particle, scenario.bath
        d = scenario.dimension
        v0 = particle.speed
        vrms = math.sqrt(d * K_BOLTZMANN * bath.temperature / bath.mass_B)
        ratio = (
            KineticsService.short_time_coherence_ratio(v0, vrms, d)
            if vrms > 0
            else math.inf
        )
        diagnostics = BathService.regime_diagnostics(model, particle, bath)
        headline: dict[str, Any] = {
            "scenario": scenario.name,
            "coherence_ratio_short_time": ratio,
            "l_thermal": KineticsService.thermal_coherence_length(
                particle.mass_S, bath.temperature
            ),
            "range": KineticsService.range(v0, coefficients.zeta),
            "W_tot": DecoherenceService.total_collision_rate(model, particle, bath),
            "alpha_tr": coefficients.alpha_tr,
            "eta": coefficients.eta,
            "zeta": coefficients.zeta,
            "gamma": coefficients.gamma,
            "xi": coefficients.xi,
            "k0_l_scat": diagnostics.k_l_scat,
            "sigma_tr_over_sigma": diagnostics.transfer_ratio,
            "mass_ratio": diagnostics.mass_ratio,
            "weak_scattering_ok": diagnostics.weak_scattering_ok,
            "kramers_moyal_ok": diagnostics.kramers_moyal_ok,
        }
        settings = get_settings()
        warnings = []
        if not diagnostics.weak_scattering_ok:
            warnings.append(
                f"weak-scattering condition violated: k0 l_scat = "
                f"{diagnostics.k_l_scat:.3g} <= {settings.weak_scattering_threshold:g}"
            )
        if not diagnostics.kramers_moyal_ok:
            warnings.append(
                f"Kramers-Moyal truncation outside its regime: sigma_tr/sigma = "
                f"{diagnostics.transfer_ratio:.3g}, m_S/m_B = {diagnostics.mass_ratio:.3g}"
            )
        return headline, warnings

    @staticmethod
    def write_summary(
        path: Union[str, Path],
        title: str,
        headline: Mapping[str, Any],
        warnings: Sequence[str] = (),
    ) -> Path:
        """Plain-text summary: headline numbers then validity warnings."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        width = max((len(key) for key in headline), default=0)
        lines = [title, "=" * len(title)]
        lines += [f"{key.ljust(width)} : {format_value(value)}" for key, value in headline.items()]
        if warnings:
            lines.append("")
            lines += [f"WARNING: {message}" for message in warnings]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info("Wrote %s", path)
        return path
