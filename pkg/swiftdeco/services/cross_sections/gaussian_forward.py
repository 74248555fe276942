"""Forward-peaked Gaussian cross section"""

import numpy as np
from scipy import integrate

from swiftdeco.core.constants import MODEL_GAUSSIAN_FORWARD
from swiftdeco.services.cross_sections.base import BaseCrossSectionModel
from swiftdeco.services.geometry_service import GeometryService


class GaussianForwardCrossSection(BaseCrossSectionModel):
    """
    dsigma/dOmega proportional to exp(-theta^2 / 2 theta0^2).

    Normalised so that the total cross section equals sigma0 in dimension d.
    """

    kind = MODEL_GAUSSIAN_FORWARD

    def __init__(self, sigma0: float, theta0: float, d: int):
        super().__init__(d)
        self.sigma0 = float(sigma0)
        self.theta0 = float(theta0)
        self._amplitude = self.sigma0 / self._shape_integral()

    def _shape_integral(self) -> float:
        """Sphere integral of the unnormalised shape."""
        d, theta0 = self.d, self.theta0

        def integrand(theta: float) -> float:
            return np.sin(theta) ** (d - 2) * np.exp(-0.5 * (theta / theta0) ** 2)

        points = [p for p in (theta0, 5.0 * theta0) if p < np.pi]
        value, _ = integrate.quad(
            integrand, 0.0, np.pi, points=points or None, limit=500,
            epsabs=0.0, epsrel=1e-13,
        )
        return GeometryService.surface_area(d - 1) * value

    @property
    def k_independent(self) -> bool:
        return True

    def evaluate(self, k: np.ndarray, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        shape = np.broadcast(np.asarray(k), theta).shape
        return np.broadcast_to(
            self._amplitude * np.exp(-0.5 * (theta / self.theta0) ** 2), shape
        )

    def describe(self) -> dict[str, str]:
        return {
            "model": self.kind,
            "sigma0": repr(self.sigma0),
            "theta0": repr(self.theta0),
        }
