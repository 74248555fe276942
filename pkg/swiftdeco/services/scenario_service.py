"""Scenario files: `key = value` lines grouped under `[section]` headers

Values are `<factor>[*<factor>...] [unit]` where a factor is a number or one
of the named constants; quantities are converted to SI at load.
"""

import logging
import math
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import ValidationError

from swiftdeco.core.constants import (ATOMIC_MASS_UNIT, CSV_FLOAT_FORMAT,
                                      ELECTRON_MASS, ELECTRON_VOLT,
                                      FINE_STRUCTURE, HBAR, K_BOLTZMANN, MEV,
                                      PROTON_MASS, SPEED_OF_LIGHT)
from swiftdeco.core.exceptions import AppException, ParseError
from swiftdeco.schemas.bath import (BathDistribution, BathSpec, ParticleSpec,
                                    TransportCoefficients)
from swiftdeco.schemas.scenario import (OutputSpec, RunSpec, Scenario,
                                        TransportCalibration)
from swiftdeco.schemas.xsection import CrossSectionSpec
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_sections import (BaseCrossSectionModel,
                                               get_cross_section_model)
from swiftdeco.services.kinetics_service import KineticsService

logger = logging.getLogger(__name__)

BUNDLED_DIR = Path(__file__).resolve().parent.parent / "scenarios"

CONSTANTS = {
    "c": SPEED_OF_LIGHT,
    "alpha": FINE_STRUCTURE,
    "m_e": ELECTRON_MASS,
    "m_p": PROTON_MASS,
    "m_u": ATOMIC_MASS_UNIT,
    "hbar": HBAR,
    "k_B": K_BOLTZMANN,
    "pi": math.pi,
}

_ENERGY_UNITS = {"J": 1.0, "eV": ELECTRON_VOLT, "keV": 1e3 * ELECTRON_VOLT, "MeV": MEV}

# Unit tables per quantity; the first entry is the SI default
UNITS: dict[str, dict[str, float]] = {
    # masses may be given as rest energies
    "mass": {
        "kg": 1.0,
        "amu": ATOMIC_MASS_UNIT,
        **{name: value / SPEED_OF_LIGHT**2 for name, value in _ENERGY_UNITS.items()},
    },
    "energy": _ENERGY_UNITS,
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9, "pm": 1e-12},
    "temperature": {"K": 1.0},
    "time": {"s": 1.0},
    "rate": {"1/s": 1.0},
    "wavenumber": {"1/m": 1.0, "1/cm": 1e2, "1/nm": 1e9},
    "velocity": {"m/s": 1.0},
    "density": {"1/m^3": 1.0, "1/cm^3": 1e6},
    "area": {"m^2": 1.0, "cm^2": 1e-4, "nm^2": 1e-18},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "stopping": {
        "J/m": 1.0,
        "eV/m": ELECTRON_VOLT,
        "MeV/cm": MEV / 1e-2,
        "keV/um": 1e3 * ELECTRON_VOLT / 1e-6,
    },
    "number": {"": 1.0},
}

# (section, key) -> quantity kind; "" is the top level
SCHEMA: dict[tuple[str, str], str] = {
    ("", "dimension"): "int",
    ("particle", "mass"): "mass",
    ("particle", "energy"): "energy",
    ("particle", "k0"): "wavenumber",
    ("particle", "velocity"): "velocity",
    ("bath", "mass"): "mass",
    ("bath", "temperature"): "temperature",
    ("bath", "vrms"): "velocity",
    ("bath", "density"): "density",
    ("bath", "frozen"): "bool",
    ("cross_section", "model"): "str",
    ("cross_section", "sigma0"): "area",
    ("cross_section", "theta0"): "angle",
    ("cross_section", "table"): "str",
    ("transport", "range"): "length",
    ("transport", "stopping_power"): "stopping",
    ("run", "t_start"): "number",
    ("run", "t_end"): "number",
    ("run", "n_times"): "int",
    ("run", "walkers"): "int",
    ("run", "dt"): "number",
    ("run", "seed"): "int",
    ("run", "checkpoints"): "list",
    ("run", "scheme"): "str",
    ("run", "mode"): "str",
    ("output", "dir"): "str",
    ("output", "prefix"): "str",
}
SECTIONS = {section for section, _ in SCHEMA}
REQUIRED = (
    ("", "dimension"),
    ("particle", "mass"),
    ("bath", "mass"),
    ("bath", "density"),
    ("cross_section", "model"),
)
# Quantities that may be zero
_NON_NEGATIVE = {("transport", "stopping_power"), ("run", "seed")}

Entry = tuple[Any, int]


def _dotted(section: str, key: str) -> str:
    return f"{section}.{key}" if section else key


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT.format(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ", ".join(_fmt(float(v)) for v in value)
    return str(value)


class ScenarioService:
    """Service for loading and resolving scenarios"""

    @staticmethod
    def parse_quantity(text: str, kind: str, key: str, line: int) -> float:
        """
        Evaluate `<factor>[*<factor>...] [unit]` in SI units.

        Args:
            text: Raw value
            kind: Quantity kind (a key of UNITS)
            key: Dotted key, for error messages
            line: Line number, for error messages

        Raises:
            ParseError: On an unknown constant or unit, or a malformed number
        """
        parts = text.split(None, 1)
        if not parts:
            raise ParseError("Missing value", key=key, line=line)
        value = 1.0
        for factor in parts[0].split("*"):
            if factor in CONSTANTS:
                value *= CONSTANTS[factor]
                continue
            try:
                value *= float(factor)
            except ValueError:
                raise ParseError(f"Malformed number '{factor}'", key=key, line=line)
        table = UNITS[kind]
        unit = parts[1].strip() if len(parts) > 1 else next(iter(table))
        if unit not in table:
            raise ParseError(
                f"Unit '{unit}' not allowed here (expected one of {', '.join(table)})",
                key=key,
                line=line,
            )
        return value * table[unit]

    @staticmethod
    def _parse_value(text: str, kind: str, key: str, line: int) -> Any:
        if kind == "str":
            return text
        if kind == "bool":
            lowered = text.lower()
            if lowered not in ("true", "false", "yes", "no", "1", "0"):
                raise ParseError(f"Expected a boolean, got '{text}'", key=key, line=line)
            return lowered in ("true", "yes", "1")
        if kind == "int":
            try:
                return int(text)
            except ValueError:
                raise ParseError(f"Expected an integer, got '{text}'", key=key, line=line)
        if kind == "list":
            return [
                ScenarioService.parse_quantity(item.strip(), "number", key, line)
                for item in text.split(",")
                if item.strip()
            ]
        return ScenarioService.parse_quantity(text, kind, key, line)

    @staticmethod
    def parse_entries(text: str) -> dict[tuple[str, str], Entry]:
        """
        Parse raw lines into typed values keyed by (section, key).

        Raises:
            ParseError: On unknown sections or keys, duplicates, bad values or
                non-positive quantities
        """
        section = ""
        entries: dict[tuple[str, str], Entry] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise ParseError("Unterminated section header", line=line_no)
                section = line[1:-1].strip()
                if section not in SECTIONS or not section:
                    raise ParseError(f"Unknown section [{section}]", key=section, line=line_no)
                continue
            if "=" not in line:
                raise ParseError("Expected 'key = value'", line=line_no)
            key, value = (part.strip() for part in line.split("=", 1))
            dotted = _dotted(section, key)
            if (section, key) not in SCHEMA:
                raise ParseError("Unknown key", key=dotted, line=line_no)
            if (section, key) in entries:
                raise ParseError("Duplicate key", key=dotted, line=line_no)
            kind = SCHEMA[(section, key)]
            parsed = ScenarioService._parse_value(value, kind, dotted, line_no)
            if kind not in ("str", "bool", "list"):
                if (section, key) in _NON_NEGATIVE:
                    if parsed < 0:
                        raise ParseError("Value must be non-negative", key=dotted, line=line_no)
                elif not parsed > 0:
                    raise ParseError("Value must be positive", key=dotted, line=line_no)
            entries[(section, key)] = (parsed, line_no)
        for required in REQUIRED:
            if required not in entries:
                raise ParseError("Missing required key", key=_dotted(*required))
        return entries

    @staticmethod
    def _exactly_one(
        entries: dict[tuple[str, str], Entry], section: str, keys: tuple[str, ...]
    ) -> tuple[str, Entry]:
        present = [key for key in keys if (section, key) in entries]
        if len(present) != 1:
            line = entries[(section, present[1])][1] if len(present) > 1 else None
            raise ParseError(
                f"Exactly one of {', '.join(keys)} must be given", key=section, line=line
            )
        return present[0], entries[(section, present[0])]

    @staticmethod
    def _build(
        entries: dict[tuple[str, str], Entry], name: str, source: Optional[Path]
    ) -> Scenario:
        def get(section: str, key: str, default: Any = None) -> Any:
            entry = entries.get((section, key))
            return entry[0] if entry is not None else default

        d = get("", "dimension")
        if d < 2:
            raise ParseError(
                "Dimension must be at least 2",
                key="dimension",
                line=entries[("", "dimension")][1],
            )
        mass_S = get("particle", "mass")
        given, (value, line) = ScenarioService._exactly_one(
            entries, "particle", ("energy", "k0", "velocity")
        )
        try:
            if given == "energy":
                energy = value
                v0 = KineticsService.velocity_from_kinetic_energy(energy, mass_S)
            elif given == "velocity":
                v0 = value
                energy = KineticsService.kinetic_energy_from_velocity(v0, mass_S)
            else:
                v0 = HBAR * value / mass_S
                energy = KineticsService.kinetic_energy_from_velocity(v0, mass_S)
        except AppException as exc:
            raise ParseError(exc.message, key=f"particle.{given}", line=line)
        k0 = np.zeros(d)
        k0[0] = mass_S * v0 / HBAR if given != "k0" else value

        mass_B = get("bath", "mass")
        frozen = bool(get("bath", "frozen", False))
        if frozen:
            temperature = 0.0
        else:
            which, (value, line) = ScenarioService._exactly_one(
                entries, "bath", ("temperature", "vrms")
            )
            temperature = (
                value if which == "temperature" else mass_B * value**2 / (d * K_BOLTZMANN)
            )

        try:
            scenario = Scenario(
                name=name,
                source=source,
                dimension=d,
                particle=ParticleSpec(mass_S=mass_S, k0=k0),
                bath=BathSpec(
                    mass_B=mass_B,
                    temperature=temperature,
                    number_density=get("bath", "density"),
                    distribution=(
                        BathDistribution.FROZEN if frozen else BathDistribution.MAXWELL_BOLTZMANN
                    ),
                ),
                cross_section=CrossSectionSpec(
                    kind=get("cross_section", "model"),
                    sigma0=get("cross_section", "sigma0"),
                    theta0=get("cross_section", "theta0"),
                    table=get("cross_section", "table"),
                ),
                transport=TransportCalibration(
                    range=get("transport", "range"),
                    stopping_power=get("transport", "stopping_power"),
                ),
                run=RunSpec(
                    **{
                        key: entry[0]
                        for (section, key), entry in entries.items()
                        if section == "run"
                    }
                ),
                output=OutputSpec(
                    **{
                        key: entry[0]
                        for (section, key), entry in entries.items()
                        if section == "output"
                    }
                ),
                kinetic_energy=energy,
            )
        except ValidationError as exc:
            error = exc.errors()[0]
            location = ".".join(str(part) for part in error["loc"])
            raise ParseError(f"Invalid scenario: {error['msg']}", key=location or None)
        if scenario.transport.range is not None and scenario.transport.stopping_power is not None:
            raise ParseError(
                "Give at most one of range and stopping_power",
                key="transport",
                line=entries[("transport", "stopping_power")][1],
            )
        return scenario.model_copy(
            update={"resolved": ScenarioService.describe(scenario)}
        )

    @staticmethod
    def parse_text(text: str, name: str = "scenario", source: Optional[Path] = None) -> Scenario:
        """Parse scenario text into a validated Scenario."""
        return ScenarioService._build(ScenarioService.parse_entries(text), name, source)

    @staticmethod
    def bundled_path(name: str) -> Path:
        """Path of a bundled scenario, with or without the .scn suffix."""
        filename = name if name.endswith(".scn") else f"{name}.scn"
        return BUNDLED_DIR / filename

    @staticmethod
    def list_bundled() -> list[str]:
        """Names of the bundled scenarios."""
        return sorted(path.stem for path in BUNDLED_DIR.glob("*.scn"))

    @staticmethod
    def load_scenario(path: Union[str, Path]) -> Scenario:
        """
        Load a scenario file; bare names fall back to the bundled scenarios.

        Args:
            path: File path or bundled scenario name

        Returns:
            Validated Scenario with the resolved quantities filled in

        Raises:
            ParseError: If the file is missing or invalid
        """
        path = Path(path)
        if not path.is_file():
            bundled = ScenarioService.bundled_path(path.name)
            if not bundled.is_file():
                raise ParseError(f"Scenario file not found: {path}")
            path = bundled
        logger.info("Loading scenario %s", path)
        return ScenarioService.parse_text(
            path.read_text(encoding="utf-8"), name=path.stem, source=path.resolve()
        )

    @staticmethod
    def model(scenario: Scenario) -> BaseCrossSectionModel:
        """Cross-section model of the scenario."""
        return get_cross_section_model(
            scenario.cross_section, scenario.dimension, scenario.base_dir
        )

    @staticmethod
    def coefficients(
        scenario: Scenario, model: Optional[BaseCrossSectionModel] = None
    ) -> TransportCoefficients:
        """
        Transport coefficients at k0, calibrated when the scenario asks for it.

        A range sets alpha_tr through v0/zeta; a stopping power sets eta from
        the initial energy and speed. Otherwise alpha_tr is the bath average
        of the model.
        """
        particle, bath = scenario.particle, scenario.bath
        calibration = scenario.transport
        if calibration.range is not None:
            alpha_tr = BathService.alpha_tr_from_range(calibration.range, particle, bath)
        elif calibration.stopping_power is not None:
            eta = BathService.eta_from_stopping(
                calibration.stopping_power, scenario.kinetic_energy, particle.speed
            )
            alpha_tr = BathService.alpha_tr_from_eta(eta, particle, bath)
        else:
            model = ScenarioService.model(scenario) if model is None else model
            return BathService.transport_coefficients(model, particle, bath)
        return BathService.transport_from_alpha_tr(alpha_tr, particle, bath)

    @staticmethod
    def describe(scenario: Scenario) -> dict[str, str]:
        """Resolved quantities of the scenario, as preamble strings."""
        particle, bath = scenario.particle, scenario.bath
        d = scenario.dimension
        pair = BathService.kinematics(particle, bath)
        v0 = particle.speed
        vrms = math.sqrt(d * K_BOLTZMANN * bath.temperature / bath.mass_B)
        values: dict[str, Any] = {
            "scenario": scenario.name,
            "dimension": d,
            "particle.mass": particle.mass_S,
            "particle.k0": particle.k0_norm,
            "particle.v0": v0,
            "particle.v0_over_c": v0 / SPEED_OF_LIGHT,
            "particle.kinetic_energy": scenario.kinetic_energy,
            "bath.mass": bath.mass_B,
            "bath.temperature": float(bath.temperature),
            "bath.vrms": vrms,
            "bath.density": bath.number_density,
            "bath.frozen": bath.is_frozen,
            "bath.k_T": math.sqrt(bath.thermal_wavenumber_sq),
            "reduced_mass": pair.reduced_mass,
            "mass_ratio": particle.mass_S / bath.mass_B,
            "velocity_ratio": v0 / vrms if vrms > 0 else math.inf,
            "cross_section.model": scenario.cross_section.kind,
        }
        for key in ("sigma0", "theta0", "table"):
            value = getattr(scenario.cross_section, key)
            if value is not None:
                values[f"cross_section.{key}"] = value
        for key, value in scenario.transport.model_dump(exclude_none=True).items():
            values[f"transport.{key}"] = value
        for key, value in scenario.run.model_dump(exclude_none=True).items():
            values[f"run.{key}"] = value
        return {key: _fmt(value) for key, value in values.items()}

    @staticmethod
    def preamble(
        scenario: Scenario, coefficients: Optional[TransportCoefficients] = None
    ) -> dict[str, str]:
        """Resolved scenario plus transport coefficients when available."""
        out = dict(scenario.resolved)
        if coefficients is not None:
            for key in ("alpha_tr", "eta", "zeta", "gamma", "xi"):
                out[f"transport.{key}"] = _fmt(float(getattr(coefficients, key)))
        return out
