"""Angular quadrature schemas"""

import numpy as np
from pydantic import Field

from swiftdeco.schemas.common import ArrayModel, FloatArray


class AngularQuadrature(ArrayModel):
    """
    Polar-angle rule on the d-sphere.

    `weights` carry the measure (sin theta)^(d-2) d theta, so that
    the integral of g(theta) over the sphere is S_{d-1} * sum(weights * g).
    The complements of cos(theta) are stored separately to keep forward
    peaks free of cancellation.
    """

    d: int = Field(..., ge=2)
    order: int = Field(..., ge=2)
    theta: FloatArray
    cos_theta: FloatArray
    one_minus_cos: FloatArray
    sin_sq: FloatArray
    weights: FloatArray
    transverse_area: float = Field(..., gt=0)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Sphere integral of values sampled at the nodes (last axis)."""
        return self.transverse_area * np.dot(values, self.weights)
