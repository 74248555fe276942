"""Isotropic cross section"""

import numpy as np

from swiftdeco.core.constants import MODEL_ISOTROPIC
from swiftdeco.services.cross_sections.base import BaseCrossSectionModel
from swiftdeco.services.geometry_service import GeometryService


class IsotropicCrossSection(BaseCrossSectionModel):
    """dsigma/dOmega = sigma0 / S_d"""

    kind = MODEL_ISOTROPIC

    def __init__(self, sigma0: float, d: int):
        super().__init__(d)
        self.sigma0 = float(sigma0)
        self._value = self.sigma0 / GeometryService.surface_area(self.d)

    @property
    def k_independent(self) -> bool:
        return True

    def evaluate(self, k: np.ndarray, theta: np.ndarray) -> np.ndarray:
        shape = np.broadcast(np.asarray(k), np.asarray(theta)).shape
        return np.full(shape, self._value)

    def describe(self) -> dict[str, str]:
        return {"model": self.kind, "sigma0": repr(self.sigma0)}
