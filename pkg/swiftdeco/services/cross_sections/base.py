"""Base cross-section model interface"""

from abc import ABC, abstractmethod

import numpy as np

from swiftdeco.core.exceptions import ModelInvalidError
from swiftdeco.schemas.geometry import AngularQuadrature


class BaseCrossSectionModel(ABC):
    """Differential cross section dsigma/dOmega(k, theta), azimuthally symmetric"""

    kind: str = "base"

    def __init__(self, d: int):
        self.d = int(d)

    @property
    def k_independent(self) -> bool:
        """True if dsigma/dOmega does not depend on k."""
        return False

    @abstractmethod
    def evaluate(self, k: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """
        Evaluate dsigma/dOmega.

        Args:
            k: Relative wavenumber(s) (1/m), broadcastable against theta
            theta: Scattering angle(s) in [0, pi]

        Returns:
            dsigma/dOmega in m^(d-1)/sr
        """
        pass

    def evaluate_at_nodes(self, k: np.ndarray, quad: AngularQuadrature) -> np.ndarray:
        """Values at the quadrature nodes, shape k.shape + (order,)."""
        k = np.asarray(k, dtype=float)
        values = self.evaluate(k[..., None], quad.theta)
        return self.check_values(values)

    @staticmethod
    def check_values(values: np.ndarray) -> np.ndarray:
        """Reject negative or non-finite samples."""
        if not np.all(np.isfinite(values)):
            raise ModelInvalidError("Cross section produced non-finite values")
        if np.any(values < 0):
            raise ModelInvalidError(
                "Cross section produced negative values",
                details={"min": float(np.min(values))},
            )
        return values

    def describe(self) -> dict[str, str]:
        """Parameters for output preambles."""
        return {"model": self.kind}
