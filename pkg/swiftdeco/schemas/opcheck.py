"""Operator check schemas"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from swiftdeco.schemas.common import ArrayModel


class MomentumGrid(ArrayModel):
    """Uniform cubic grid [-L, L]^d with n nodes per axis"""

    d: int = Field(..., ge=2)
    n: int = Field(..., ge=5)
    half_width: float = Field(..., gt=0)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    def coordinates(self) -> list[np.ndarray]:
        """Dense coordinate arrays, one per axis."""
        return np.meshgrid(*([self.axis] * self.d), indexing="ij")

    def refined(self) -> "MomentumGrid":
        """Same box with half the spacing."""
        return MomentumGrid(d=self.d, n=2 * self.n - 1, half_width=self.half_width)


class OperatorCheckResult(BaseModel):
    """Residual of one identity on a grid pair"""

    model_config = ConfigDict(frozen=True)

    name: str
    d: int
    residual_coarse: float
    residual_fine: float
    ratio: float
    expected: str = "0"
    passed: bool
