"""Ensemble solver schemas"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from swiftdeco.core.constants import SCHEME_ANALYTIC
from swiftdeco.schemas.common import ArrayModel, FloatArray


class Ensemble(ArrayModel):
    """N walkers in momentum and position"""

    k: FloatArray
    r: FloatArray
    t: float = 0.0
    seed: Optional[int] = None
    scheme: str = SCHEME_ANALYTIC

    @property
    def size(self) -> int:
        return int(self.k.shape[0])

    @property
    def d(self) -> int:
        return int(self.k.shape[1])


class SdeStepSpec(BaseModel):
    """Time step and constant transport coefficients"""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(..., gt=0)
    eta: float = Field(..., ge=0)
    zeta: float = Field(..., ge=0)
    gamma: float = Field(..., ge=0)
    xi: float = Field(..., ge=0)
    mass_S: float = Field(..., gt=0)


class RateTable(ArrayModel):
    """Collisional rates tabulated on |k_S|, linearly interpolated"""

    k_grid: FloatArray
    rates: dict[str, FloatArray]

    @classmethod
    def constant(cls, rates: dict[str, float]) -> "RateTable":
        """Table returning the same rates at every wavenumber."""
        return cls(k_grid=[0.0], rates={kind: [value] for kind, value in rates.items()})

    def at(self, k_norm: np.ndarray) -> dict[str, np.ndarray]:
        """Rates at each wavenumber norm (clamped to the table range)."""
        return {
            kind: np.interp(k_norm, self.k_grid, values)
            for kind, values in self.rates.items()
        }


class EquilibriumReport(ArrayModel):
    """Equilibrium diagnostics of a long ensemble run"""

    axis_variance: FloatArray
    axis_variance_stderr: FloatArray
    expected_variance: float
    variance_ratio: FloatArray
    mean_z_score: float
    ks_distance: FloatArray
    isotropy_ratio: float
