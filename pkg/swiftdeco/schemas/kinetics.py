"""Moment trajectory and coherence schemas"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from swiftdeco.schemas.common import ArrayModel, FloatArray


class VarianceSplit(ArrayModel):
    """Longitudinal, per-transverse-direction and total momentum variance"""

    d: int = Field(..., ge=2)
    Kpar2: FloatArray
    Kperp2: FloatArray
    K2: FloatArray

    @model_validator(mode="after")
    def check_decomposition(self) -> "VarianceSplit":
        """Variances are non-negative and K2 = Kpar2 + (d-1) Kperp2"""
        for name in ("Kpar2", "Kperp2", "K2"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"{name} must be non-negative")
        total = self.Kpar2 + (self.d - 1) * self.Kperp2
        if not np.allclose(total, self.K2, rtol=1e-10, atol=0.0):
            raise ValueError("K2 must equal Kpar2 + (d-1) Kperp2")
        return self


class MomentState(ArrayModel):
    """Ensemble or closed-form momentum moments at one time"""

    t: float
    mean_k: FloatArray
    mean_k2: float
    Kpar2: float
    Kperp2: float
    K2: float
    traveled: float
    mean_energy: float


class CoherenceState(BaseModel):
    """Coherence lengths derived from the momentum variances"""

    model_config = ConfigDict(frozen=True)

    l_par: float
    l_perp: float
    l_thermal: Optional[float] = None
    ratio: float
    angular_variance: Optional[float] = None
    plane_wave: bool = False

    @property
    def l_par_over_thermal(self) -> float:
        return self.l_par / self.l_thermal if self.l_thermal else math.nan

    @property
    def l_perp_over_thermal(self) -> float:
        return self.l_perp / self.l_thermal if self.l_thermal else math.nan


class WignerGaussian(ArrayModel):
    """Gaussian Wigner function in momentum space"""

    mean_k: FloatArray
    cov_K2: FloatArray

    @model_validator(mode="after")
    def check_covariance(self) -> "WignerGaussian":
        """Covariance must be symmetric positive definite and match mean_k"""
        d = self.mean_k.size
        if self.cov_K2.shape != (d, d):
            raise ValueError("cov_K2 must be d x d")
        if not np.allclose(self.cov_K2, self.cov_K2.T):
            raise ValueError("cov_K2 must be symmetric")
        if np.min(np.linalg.eigvalsh(self.cov_K2)) <= 0:
            raise ValueError("cov_K2 must be positive definite")
        return self

    def density(self, k: np.ndarray) -> np.ndarray:
        """Unnormalised density at points k of shape (..., d)."""
        delta = np.asarray(k, dtype=float) - self.mean_k
        precision = np.linalg.inv(self.cov_K2)
        return np.exp(-0.5 * np.einsum("...i,ij,...j->...", delta, precision, delta))


class CoherenceMatrixResult(ArrayModel):
    """Coherence length matrix from gradient and Hessian forms"""

    matrix: FloatArray
    hessian_matrix: FloatArray
    truncation_estimate: float


class MomentTrajectory(ArrayModel):
    """Moments sampled over a time grid"""

    d: int
    t: FloatArray
    eta_t: FloatArray
    mean_k: FloatArray
    mean_k2: FloatArray
    Kpar2: FloatArray
    Kperp2: FloatArray
    K2: FloatArray
    traveled: FloatArray
    mean_energy: FloatArray
    stderr: dict[str, FloatArray] = Field(default_factory=dict)
    km_regime_violated: bool = False

    def __len__(self) -> int:
        return int(self.t.size)

    def state(self, i: int) -> MomentState:
        """Single time slice."""
        return MomentState(
            t=float(self.t[i]),
            mean_k=self.mean_k[i],
            mean_k2=float(self.mean_k2[i]),
            Kpar2=float(self.Kpar2[i]),
            Kperp2=float(self.Kperp2[i]),
            K2=float(self.K2[i]),
            traveled=float(self.traveled[i]),
            mean_energy=float(self.mean_energy[i]),
        )
