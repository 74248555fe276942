"""Position-space decoherence rate F(s)"""

import logging
import math
from typing import Callable

import numpy as np

from swiftdeco.config import get_settings
from swiftdeco.core.constants import HBAR, MOMENT_TOTAL
from swiftdeco.core.exceptions import DomainError, ToleranceError
from swiftdeco.schemas.bath import BathSpec, ParticleSpec
from swiftdeco.schemas.decoherence import DecoherenceRate
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_section_service import CrossSectionService
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.services.geometry_service import GeometryService

logger = logging.getLogger(__name__)

# Upper bound on bath-nodes x angular-nodes evaluated at once
_BLOCK_SIZE = 2_000_000


def _next_power_of_two(n: float) -> int:
    return 1 << max(1, math.ceil(math.log2(max(n, 2.0))))


class DecoherenceService:
    """Service for the complex decoherence rate"""

    @staticmethod
    def _rate_at_order(
        model: BaseCrossSectionModel,
        nodes_k: np.ndarray,
        flux_weights: np.ndarray,
        s: np.ndarray,
        order: int,
    ) -> complex:
        """Nested bath and angular quadrature of n v dsigma (1 - exp(i q.s))."""
        d = s.size
        quad = GeometryService.polar_quadrature(d, order)
        s_norm2 = float(np.dot(s, s))
        total = 0.0 + 0.0j
        block = max(1, _BLOCK_SIZE // order)
        for start in range(0, nodes_k.shape[0], block):
            k_vec = nodes_k[start : start + block]
            w = flux_weights[start : start + block]
            k = np.linalg.norm(k_vec, axis=1)
            moving = k > 0
            if not np.any(moving):
                continue
            k_vec, w, k = k_vec[moving], w[moving], k[moving]
            s_par = (k_vec @ s) / k
            rho = np.sqrt(np.maximum(s_norm2 - s_par**2, 0.0))
            values = model.evaluate_at_nodes(k, quad)
            # q.s = -k (1 - cos) s_par + k sin (Omega_perp . s_perp)
            phase = -k[:, None] * quad.one_minus_cos[None, :] * s_par[:, None]
            z = k[:, None] * np.sqrt(quad.sin_sq)[None, :] * rho[:, None]
            lam = GeometryService.sphere_average_factor(d, z)
            one_minus_lam = GeometryService.sphere_average_complement(d, z)
            re = np.maximum(
                2.0 * np.sin(0.5 * phase) ** 2 + np.cos(phase) * one_minus_lam, 0.0
            )
            im = -np.sin(phase) * lam
            kernel = values * quad.weights[None, :]
            total += quad.transverse_area * (
                np.dot(w, np.sum(kernel * re, axis=1))
                + 1j * np.dot(w, np.sum(kernel * im, axis=1))
            )
        return total

    @staticmethod
    def required_order(
        model: BaseCrossSectionModel, k_max: float, s_norm: float
    ) -> int:
        """Angular order resolving both the cross section and the phase k|s|."""
        settings = get_settings()
        _, base = CrossSectionService._adaptive_raw_moments(model, np.asarray(k_max))
        return max(
            base,
            _next_power_of_two(settings.decoherence_order_factor * k_max * s_norm),
        )

    @staticmethod
    def decoherence_rate(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        s: np.ndarray,
    ) -> DecoherenceRate:
        """
        Complex decoherence rate at separation s.

        The transverse azimuth is integrated in closed form, the polar angle
        with an order of at least 4 k|s|.

        Args:
            model: Cross-section model
            particle: Projectile (k0 fixes the relative wavenumbers)
            bath: Gas
            s: Separation vector (m)

        Returns:
            DecoherenceRate

        Raises:
            ToleranceError: If the required order exceeds the configured cap
        """
        s = np.asarray(s, dtype=float)
        if not np.any(s):
            return DecoherenceRate(re=0.0, im=0.0, s=s, order=0)
        settings = get_settings()
        pair = BathService.kinematics(particle, bath)
        nodes, weights = BathService.bath_nodes(bath, particle.d)
        k_vec = pair.relative_k(particle.k0, nodes)
        k_norm = np.linalg.norm(k_vec, axis=1)
        if not np.any(k_norm):
            return DecoherenceRate(re=0.0, im=0.0, s=s, order=0)
        flux_weights = weights * bath.number_density * HBAR * k_norm / pair.reduced_mass
        s_norm = float(np.linalg.norm(s))
        order = DecoherenceService.required_order(model, float(k_norm.max()), s_norm)
        cap = settings.decoherence_max_order
        if order > cap:
            at_cap = DecoherenceService._rate_at_order(
                model, k_vec, flux_weights, s, cap
            )
            at_half = DecoherenceService._rate_at_order(
                model, k_vec, flux_weights, s, cap // 2
            )
            residual = abs(at_cap - at_half) / max(abs(at_cap), np.finfo(float).tiny)
            raise ToleranceError(
                f"Decoherence quadrature needs order {order} > cap {cap}",
                residual=residual,
            )
        value = DecoherenceService._rate_at_order(
            model, k_vec, flux_weights, s, order
        )
        return DecoherenceRate(
            re=max(value.real, 0.0), im=value.imag, s=s, order=order
        )

    @staticmethod
    def total_collision_rate(
        model: BaseCrossSectionModel, particle: ParticleSpec, bath: BathSpec
    ) -> float:
        """Saturation value W_tot = <n v sigma>_B at k0."""
        return BathService.collisional_rate(
            MOMENT_TOTAL, model, particle, bath, particle.k0
        )

    @staticmethod
    def offdiagonal_decay(
        rho0: Callable[[np.ndarray], complex],
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        s: np.ndarray,
        t,
    ):
        """
        rho(s, t) = exp(-F(s) t) rho(s, 0).

        Args:
            rho0: Initial off-diagonal element as a function of s
            t: Time or array of times (s)

        Raises:
            DomainError: If any t < 0
        """
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0):
            raise DomainError("Time must be non-negative")
        rate = DecoherenceService.decoherence_rate(model, particle, bath, s)
        decay = np.exp(-rate.value * t_arr) * rho0(np.asarray(s, dtype=float))
        return complex(decay) if decay.ndim == 0 else decay

    @staticmethod
    def quadratic_coefficients(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        h: float,
    ) -> np.ndarray:
        """
        Matrix B with Re F(s) ~ s^T B s / 2 from second differences at step h.

        Compares directly with the Kramers-Moyal diffusion tensor.
        """
        d = particle.d
        eye = np.eye(d)

        def re_f(s: np.ndarray) -> float:
            return DecoherenceService.decoherence_rate(model, particle, bath, s).re

        diag = np.array([re_f(h * eye[i]) for i in range(d)])
        out = np.diag(2.0 * diag / h**2)
        for i in range(d):
            for j in range(i + 1, d):
                pair_value = re_f(h * (eye[i] + eye[j]))
                out[i, j] = out[j, i] = (pair_value - diag[i] - diag[j]) / h**2
        return out

    @staticmethod
    def window_average(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        direction: np.ndarray,
        s_min: float,
        s_max: float,
        points: int = 64,
    ) -> float:
        """Mean of Re F over |s| in [s_min, s_max] along a direction."""
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        radii = np.linspace(s_min, s_max, points)
        values = [
            DecoherenceService.decoherence_rate(model, particle, bath, r * direction).re
            for r in radii
        ]
        return float(np.mean(values))
