"""Cross-section schemas"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from swiftdeco.core.constants import (MODEL_GAUSSIAN_FORWARD, MODEL_ISOTROPIC,
                                      MODEL_TABULATED)


class CrossSectionSpec(BaseModel):
    """Scenario description of a cross-section model"""

    model_config = ConfigDict(frozen=True)

    kind: str
    sigma0: Optional[float] = Field(default=None, gt=0)
    theta0: Optional[float] = Field(default=None, gt=0)
    table: Optional[str] = None

    @model_validator(mode="after")
    def check_parameters(self) -> "CrossSectionSpec":
        """Each model kind needs its own parameters"""
        if self.kind in (MODEL_ISOTROPIC, MODEL_GAUSSIAN_FORWARD) and self.sigma0 is None:
            raise ValueError(f"{self.kind} model requires sigma0")
        if self.kind == MODEL_GAUSSIAN_FORWARD and self.theta0 is None:
            raise ValueError("gaussian_forward model requires theta0")
        if self.kind == MODEL_TABULATED and not self.table:
            raise ValueError("tabulated model requires table")
        return self


class CrossSectionMoments(BaseModel):
    """Angular moments of dsigma/dOmega at one wavenumber"""

    model_config = ConfigDict(frozen=True)

    k: float
    sigma_total: float
    sigma_tr: float
    sigma_qpar: float
    sigma_qperp: float
    order: int

    def get(self, kind: str) -> float:
        """Moment by kind name (total, tr, qpar, qperp)."""
        return {
            "total": self.sigma_total,
            "tr": self.sigma_tr,
            "qpar": self.sigma_qpar,
            "qperp": self.sigma_qperp,
        }[kind]


class ForwardMomentEstimates(BaseModel):
    """Small-angle estimates of the quadratic moments"""

    model_config = ConfigDict(frozen=True)

    sigma_qpar_approx: float
    sigma_qperp_approx: float
    kurtosis: float
    theta2: float
    theta4: float


class TransferIntegralReport(BaseModel):
    """Residuals of the exact transferred-momentum integrals"""

    model_config = ConfigDict(frozen=True)

    vector_residual: float
    scalar_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.vector_residual, self.scalar_residual)
