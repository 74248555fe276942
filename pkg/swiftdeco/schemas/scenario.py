"""Scenario schemas"""

from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from swiftdeco.core.constants import MODE_CONSTANT, SCHEME_ANALYTIC
from swiftdeco.schemas.bath import BathSpec, ParticleSpec
from swiftdeco.schemas.xsection import CrossSectionSpec


class TransportCalibration(BaseModel):
    """Optional calibration of alpha_tr from a range or stopping power"""

    model_config = ConfigDict(frozen=True)

    range: Optional[float] = Field(default=None, gt=0)
    stopping_power: Optional[float] = Field(default=None, ge=0)


class RunSpec(BaseModel):
    """Time grid and ensemble settings; times in units of 1/eta"""

    model_config = ConfigDict(frozen=True)

    t_start: float = Field(default=1e-4, gt=0)
    t_end: float = Field(default=10.0, gt=0)
    n_times: int = Field(default=200, ge=2)
    walkers: int = Field(default=10_000, ge=1)
    dt: Optional[float] = Field(default=None, gt=0)
    seed: int = 7
    checkpoints: Optional[list[float]] = None
    scheme: str = SCHEME_ANALYTIC
    mode: str = MODE_CONSTANT

    @field_validator("checkpoints")
    @classmethod
    def validate_checkpoints(cls, v: Optional[list[float]]) -> Optional[list[float]]:
        """Checkpoints must be positive"""
        if v is not None and any(t <= 0 for t in v):
            raise ValueError("checkpoints must be positive")
        return v


class OutputSpec(BaseModel):
    """Output location"""

    model_config = ConfigDict(frozen=True)

    dir: Optional[str] = None
    prefix: str = ""


class Scenario(BaseModel):
    """Validated scenario with SI quantities"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    source: Optional[Path] = None
    dimension: int = Field(..., ge=2)
    particle: ParticleSpec
    bath: BathSpec
    cross_section: CrossSectionSpec
    transport: TransportCalibration = TransportCalibration()
    run: RunSpec = RunSpec()
    output: OutputSpec = OutputSpec()
    kinetic_energy: float = Field(..., gt=0)
    resolved: dict[str, str] = Field(default_factory=dict)

    @property
    def base_dir(self) -> Optional[Path]:
        return self.source.parent if self.source is not None else None
