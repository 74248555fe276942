"""Hypersphere measure, polar quadrature and isotropic sampling"""

from functools import lru_cache

import numpy as np
from scipy import special

from swiftdeco.core.exceptions import DomainError, ParameterError
from swiftdeco.schemas.geometry import AngularQuadrature

# Below this argument the transverse-sphere average uses its Taylor series
_SMALL_Z = 1e-6
# Below this argument 1 - average is summed from its series
_SERIES_Z = 1e-2


@lru_cache(maxsize=64)
def _cached_quadrature(d: int, order: int) -> AngularQuadrature:
    a = 0.5 * (d - 3)
    x, w = special.roots_jacobi(order, a, a)
    one_minus_cos = 1.0 - x
    arrays = {
        "theta": 2.0 * np.arcsin(np.sqrt(np.clip(0.5 * one_minus_cos, 0.0, 1.0))),
        "cos_theta": x,
        "one_minus_cos": one_minus_cos,
        "sin_sq": one_minus_cos * (1.0 + x),
        "weights": w,
    }
    for value in arrays.values():
        value.setflags(write=False)
    return AngularQuadrature(
        d=d,
        order=order,
        transverse_area=GeometryService.surface_area(d - 1),
        **arrays,
    )


class GeometryService:
    """Service for dimension-generic geometry"""

    @staticmethod
    def surface_area(d: int) -> float:
        """
        Surface area of the unit sphere embedded in d dimensions.

        Args:
            d: Dimension (>= 1)

        Returns:
            2 pi^(d/2) / Gamma(d/2)

        Raises:
            DomainError: If d < 1
        """
        if d < 1:
            raise DomainError(f"Dimension must be >= 1, got {d}")
        return float(2.0 * np.pi ** (0.5 * d) / special.gamma(0.5 * d))

    @staticmethod
    def polar_quadrature(d: int, order: int) -> AngularQuadrature:
        """
        Gauss rule in cos(theta) for the d-sphere measure.

        The Jacobi weight (1 - x^2)^((d-3)/2) is the polar part of the sphere
        measure, so the rule is exact for polynomials in cos(theta) up to
        degree 2*order - 1 in every dimension.

        Args:
            d: Dimension (>= 2)
            order: Number of nodes (>= 2)

        Returns:
            Cached AngularQuadrature

        Raises:
            ParameterError: If d < 2 or order < 2
        """
        if d < 2:
            raise ParameterError(f"Dimension must be >= 2, got {d}")
        if order < 2:
            raise ParameterError(f"Quadrature order must be >= 2, got {order}")
        return _cached_quadrature(int(d), int(order))

    @staticmethod
    def sample_isotropic(d: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform unit vector on the d-sphere."""
        return GeometryService.sample_isotropic_batch(d, 1, rng)[0]

    @staticmethod
    def sample_isotropic_batch(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
        """n uniform unit vectors, shape (n, d)."""
        g = rng.standard_normal((n, d))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    @staticmethod
    def _tangent_unit(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Uniform unit vectors orthogonal to each row of v."""
        v_hat = v / np.linalg.norm(v, axis=1, keepdims=True)
        g = rng.standard_normal(v.shape)
        g -= np.sum(g * v_hat, axis=1, keepdims=True) * v_hat
        norm = np.linalg.norm(g, axis=1, keepdims=True)
        return g / norm

    @staticmethod
    def rotate_in_random_tangent_plane(
        v: np.ndarray, angle: float, rng: np.random.Generator
    ) -> np.ndarray:
        """
        Rotate v by a fixed angle towards a uniformly random tangent direction.

        Args:
            v: Nonzero vector
            angle: Rotation angle (rad)
            rng: Random stream

        Returns:
            Vector of the same norm at angle `angle` from v

        Raises:
            DomainError: If v is the zero vector
        """
        v = np.asarray(v, dtype=float)
        if not np.linalg.norm(v) > 0:
            raise DomainError("Cannot rotate the zero vector")
        return GeometryService.rotate_batch(v[None, :], np.array([angle]), rng)[0]

    @staticmethod
    def rotate_batch(
        K: np.ndarray, angles: np.ndarray, rng: np.random.Generator
    ) -> np.ndarray:
        """Rotate each row of K by its angle in a random tangent direction."""
        norm = np.linalg.norm(K, axis=1, keepdims=True)
        if np.any(norm == 0):
            raise DomainError("Cannot rotate the zero vector")
        e_perp = GeometryService._tangent_unit(K, rng)
        angles = np.asarray(angles, dtype=float)[:, None]
        return np.cos(angles) * K + np.sin(angles) * norm * e_perp

    @staticmethod
    def rotate_by_tangent(K: np.ndarray, G: np.ndarray) -> np.ndarray:
        """
        Rotate each row of K by the tangent part of G.

        The rotation angle is the norm of the component of G orthogonal to K
        and the rotation is towards that component; norms are preserved.
        """
        norm = np.linalg.norm(K, axis=1, keepdims=True)
        k_hat = K / norm
        g_perp = G - np.sum(G * k_hat, axis=1, keepdims=True) * k_hat
        angle = np.linalg.norm(g_perp, axis=1, keepdims=True)
        safe = np.where(angle > 0, angle, 1.0)
        return np.cos(angle) * K + np.sin(angle) * norm * (g_perp / safe)

    @staticmethod
    def orthonormal_complement(omega0: np.ndarray) -> np.ndarray:
        """Rows spanning the plane orthogonal to omega0, shape (d-1, d)."""
        omega0 = np.asarray(omega0, dtype=float)
        _, _, vt = np.linalg.svd(omega0[None, :] / np.linalg.norm(omega0))
        return vt[1:]

    @staticmethod
    def transverse_average_directions(d: int) -> np.ndarray:
        """
        Cross-polytope directions of the transverse (d-1)-sphere.

        Their plain average reproduces the first and second moments of the
        uniform transverse distribution exactly.
        """
        eye = np.eye(d - 1)
        return np.concatenate([eye, -eye])

    @staticmethod
    def sphere_average_factor(d: int, z: np.ndarray) -> np.ndarray:
        """
        Average of exp(i z Omega_perp . e) over the transverse (d-1)-sphere.

        Equals Gamma(nu+1) (2/z)^nu J_nu(z) with nu = (d-3)/2: cos z for d=2,
        J_0(z) for d=3.
        """
        z = np.abs(np.asarray(z, dtype=float))
        if d == 2:
            return np.cos(z)
        nu = 0.5 * (d - 3)
        out = np.empty_like(z)
        small = z < _SMALL_Z
        out[small] = 1.0 - z[small] ** 2 / (4.0 * (nu + 1.0))
        zl = z[~small]
        out[~small] = special.gamma(nu + 1.0) * (2.0 / zl) ** nu * special.jv(nu, zl)
        return out

    @staticmethod
    def sphere_average_complement(d: int, z: np.ndarray) -> np.ndarray:
        """1 - sphere_average_factor(d, z) without cancellation at small z."""
        z = np.abs(np.asarray(z, dtype=float))
        if d == 2:
            return 2.0 * np.sin(0.5 * z) ** 2
        nu = 0.5 * (d - 3)
        out = np.empty_like(z)
        small = z < _SERIES_Z
        x = 0.25 * z[small] ** 2
        # 1 - Lambda = x/(nu+1) - x^2/(2 (nu+1)(nu+2)) + x^3/(6 (nu+1)(nu+2)(nu+3))
        out[small] = (x / (nu + 1.0)) * (
            1.0 - x / (2.0 * (nu + 2.0)) * (1.0 - x / (3.0 * (nu + 3.0)))
        )
        out[~small] = 1.0 - GeometryService.sphere_average_factor(d, z[~small])
        return out
