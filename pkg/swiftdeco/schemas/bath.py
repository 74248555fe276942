"""Bath, particle and transport coefficient schemas"""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from swiftdeco.core.constants import HBAR, K_BOLTZMANN
from swiftdeco.schemas.common import ArrayModel, FloatArray


class BathDistribution(str, Enum):
    """Velocity distribution of the gas"""

    MAXWELL_BOLTZMANN = "maxwell_boltzmann"
    FROZEN = "frozen"


class BathSpec(BaseModel):
    """Gas parameters"""

    model_config = ConfigDict(frozen=True)

    mass_B: float = Field(..., gt=0)
    temperature: float = Field(..., ge=0)
    number_density: float = Field(..., gt=0)
    distribution: BathDistribution = BathDistribution.MAXWELL_BOLTZMANN

    @property
    def is_frozen(self) -> bool:
        return self.distribution == BathDistribution.FROZEN or self.temperature == 0

    @property
    def thermal_wavenumber_sq(self) -> float:
        """k_T^2 = m_B k_B T / hbar^2 (zero for a frozen bath)"""
        if self.is_frozen:
            return 0.0
        return self.mass_B * K_BOLTZMANN * self.temperature / HBAR**2


class ParticleSpec(ArrayModel):
    """Projectile mass and initial wavenumber"""

    mass_S: float = Field(..., gt=0)
    k0: FloatArray

    @field_validator("k0")
    @classmethod
    def validate_k0(cls, v: np.ndarray) -> np.ndarray:
        """k0 must be a finite vector of dimension >= 2"""
        if v.ndim != 1 or v.size < 2:
            raise ValueError("k0 must be a vector with at least 2 components")
        if not np.all(np.isfinite(v)):
            raise ValueError("k0 must be finite")
        return v

    @property
    def d(self) -> int:
        return int(self.k0.size)

    @property
    def k0_norm(self) -> float:
        return float(np.linalg.norm(self.k0))

    @property
    def speed(self) -> float:
        """v0 = hbar |k0| / m_S"""
        return HBAR * self.k0_norm / self.mass_S


class KinematicPair(BaseModel):
    """Two-body kinematics of projectile and gas particle"""

    model_config = ConfigDict(frozen=True)

    mass_S: float = Field(..., gt=0)
    mass_B: float = Field(..., gt=0)

    @property
    def total_mass(self) -> float:
        return self.mass_S + self.mass_B

    @property
    def reduced_mass(self) -> float:
        return self.mass_S * self.mass_B / (self.mass_S + self.mass_B)

    def relative_k(self, k_S: np.ndarray, k_B: np.ndarray) -> np.ndarray:
        """k = (m_B k_S - m_S k_B) / M (broadcasts over leading axes)"""
        return (self.mass_B * np.asarray(k_S) - self.mass_S * np.asarray(k_B)) / (
            self.total_mass
        )

    def relative_v(self, k_S: np.ndarray, k_B: np.ndarray) -> np.ndarray:
        """v = hbar k / m"""
        return HBAR * self.relative_k(k_S, k_B) / self.reduced_mass


class TransportCoefficients(BaseModel):
    """Scalar coefficients of the Fokker-Planck equation"""

    model_config = ConfigDict(frozen=True)

    d: int = Field(..., ge=2)
    alpha_tr: float = Field(..., ge=0)
    eta: float = Field(..., ge=0)
    zeta: float = Field(..., ge=0)
    gamma: float = Field(..., ge=0)
    xi: float = Field(..., ge=0)

    @property
    def thermal_variance(self) -> float:
        """xi / eta, the equilibrium per-axis variance of k"""
        return self.xi / self.eta if self.eta > 0 else 0.0


class KMMoments(ArrayModel):
    """Kramers-Moyal drift vector and diffusion tensor"""

    A1: FloatArray
    A2: FloatArray
    A1_stderr: Optional[FloatArray] = None
    A2_stderr: Optional[FloatArray] = None


class FactorizationReport(BaseModel):
    """Relative Frobenius differences, factorised vs exact moments"""

    model_config = ConfigDict(frozen=True)

    drift_discrepancy: float
    diffusion_discrepancy: float


class RegimeDiagnostics(BaseModel):
    """Validity diagnostics of the kinetic description"""

    model_config = ConfigDict(frozen=True)

    k_l_scat: float
    transfer_ratio: float
    mass_ratio: float
    weak_scattering_ok: bool
    kramers_moyal_ok: bool
