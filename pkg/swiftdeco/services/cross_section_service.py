"""Angular moments of differential cross sections"""

import logging
from typing import Optional

import numpy as np
from scipy import integrate

from swiftdeco.config import get_settings
from swiftdeco.core.constants import HBAR
from swiftdeco.core.exceptions import DomainError, RegimeError
from swiftdeco.schemas.bath import KinematicPair
from swiftdeco.schemas.geometry import AngularQuadrature
from swiftdeco.schemas.xsection import (CrossSectionMoments,
                                        ForwardMomentEstimates,
                                        TransferIntegralReport)
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.services.geometry_service import GeometryService

logger = logging.getLogger(__name__)

# Columns of the raw moment table
_TOTAL, _TR, _QPAR, _QPERP, _THETA2, _THETA4 = range(6)

# Nodes of the inverse-CDF table used to sample scattering angles
_SAMPLING_NODES = 8193
# Wavenumber bins used when sampling k-dependent models
_SAMPLING_K_BINS = 64


class CrossSectionService:
    """Service for cross-section moment calculations"""

    @staticmethod
    def _check_k(k: np.ndarray) -> None:
        if not np.all(np.asarray(k) > 0):
            raise DomainError("Wavenumber must be positive")

    @staticmethod
    def _raw_moments(
        model: BaseCrossSectionModel, k: np.ndarray, quad: AngularQuadrature
    ) -> np.ndarray:
        """All angular moments on one node set, shape k.shape + (6,)."""
        values = model.evaluate_at_nodes(k, quad)
        theta2 = quad.theta**2
        kernels = np.stack(
            [
                np.ones_like(quad.theta),
                quad.one_minus_cos,
                quad.one_minus_cos**2,
                quad.sin_sq,
                theta2,
                theta2**2,
            ]
        )
        return quad.transverse_area * np.einsum(
            "...n,mn->...m", values * quad.weights, kernels
        )

    @staticmethod
    def _adaptive_raw_moments(
        model: BaseCrossSectionModel, k: np.ndarray
    ) -> tuple[np.ndarray, int]:
        """Double the order until all moments agree to the configured tolerance."""
        settings = get_settings()
        order = settings.quadrature_order
        quad = GeometryService.polar_quadrature(model.d, order)
        previous = CrossSectionService._raw_moments(model, k, quad)
        while order < settings.quadrature_max_order:
            order *= 2
            quad = GeometryService.polar_quadrature(model.d, order)
            current = CrossSectionService._raw_moments(model, k, quad)
            # angle moments are diagnostics and do not gate convergence
            cur, prev = current[..., :_THETA2], previous[..., :_THETA2]
            scale = np.maximum(np.abs(cur), np.finfo(float).tiny)
            if np.all(np.abs(cur - prev) <= settings.quadrature_rtol * scale):
                return current, order
            previous = current
        logger.warning(
            "Angular quadrature not converged at order %d for %s model",
            order,
            model.kind,
        )
        return previous, order

    @staticmethod
    def _raw(
        model: BaseCrossSectionModel,
        k: float,
        quad: Optional[AngularQuadrature],
    ) -> tuple[np.ndarray, int]:
        CrossSectionService._check_k(k)
        k_arr = np.asarray(float(k))
        if quad is not None:
            return CrossSectionService._raw_moments(model, k_arr, quad), quad.order
        return CrossSectionService._adaptive_raw_moments(model, k_arr)

    @staticmethod
    def moments(
        model: BaseCrossSectionModel,
        k: float,
        quad: Optional[AngularQuadrature] = None,
    ) -> CrossSectionMoments:
        """
        Total, transfer and quadratic moments of dsigma/dOmega at k.

        All four share one node set, so (qpar + qperp)/2 = tr holds to rounding.

        Args:
            model: Cross-section model
            k: Relative wavenumber (1/m)
            quad: Fixed quadrature; adaptive order doubling if omitted

        Returns:
            CrossSectionMoments

        Raises:
            DomainError: If k <= 0
            ModelInvalidError: If the model returns a negative sample
        """
        raw, order = CrossSectionService._raw(model, k, quad)
        return CrossSectionMoments(
            k=float(k),
            sigma_total=float(raw[_TOTAL]),
            sigma_tr=float(min(raw[_TR], raw[_TOTAL])),
            sigma_qpar=float(raw[_QPAR]),
            sigma_qperp=float(raw[_QPERP]),
            order=order,
        )

    @staticmethod
    def sigma_total(model, k: float, quad: Optional[AngularQuadrature] = None) -> float:
        """Total cross section."""
        return CrossSectionService.moments(model, k, quad).sigma_total

    @staticmethod
    def sigma_tr(model, k: float, quad: Optional[AngularQuadrature] = None) -> float:
        """Momentum-transfer cross section, integral of (1 - cos theta)."""
        return CrossSectionService.moments(model, k, quad).sigma_tr

    @staticmethod
    def sigma_qpar(model, k: float, quad: Optional[AngularQuadrature] = None) -> float:
        """Longitudinal quadratic moment, integral of (1 - cos theta)^2."""
        return CrossSectionService.moments(model, k, quad).sigma_qpar

    @staticmethod
    def sigma_qperp(model, k: float, quad: Optional[AngularQuadrature] = None) -> float:
        """Transverse quadratic moment, integral of sin^2 theta."""
        return CrossSectionService.moments(model, k, quad).sigma_qperp

    @staticmethod
    def moments_batch(
        model: BaseCrossSectionModel,
        ks: np.ndarray,
        quad: Optional[AngularQuadrature] = None,
    ) -> dict[str, np.ndarray]:
        """
        Moments at many wavenumbers.

        Args:
            model: Cross-section model
            ks: Array of relative wavenumbers (1/m)
            quad: Fixed quadrature; otherwise the order converged at the
                smallest and largest k is used for all

        Returns:
            Dictionary of arrays keyed total, tr, qpar, qperp
        """
        ks = np.asarray(ks, dtype=float)
        CrossSectionService._check_k(ks)
        if model.k_independent:
            raw, _ = CrossSectionService._raw(model, float(ks.flat[0]), quad)
            raw = np.broadcast_to(raw, ks.shape + raw.shape)
        else:
            if quad is None:
                orders = [
                    CrossSectionService._adaptive_raw_moments(model, np.asarray(k))[1]
                    for k in (float(ks.min()), float(ks.max()))
                ]
                quad = GeometryService.polar_quadrature(model.d, max(orders))
            raw = CrossSectionService._raw_moments(model, ks, quad)
        return {
            "total": raw[..., _TOTAL],
            "tr": np.minimum(raw[..., _TR], raw[..., _TOTAL]),
            "qpar": raw[..., _QPAR],
            "qperp": raw[..., _QPERP],
        }

    @staticmethod
    def angular_moments(
        model: BaseCrossSectionModel,
        k: float,
        quad: Optional[AngularQuadrature] = None,
    ) -> tuple[float, float]:
        """<theta^2> and <theta^4> weighted by dsigma/dOmega."""
        raw, _ = CrossSectionService._raw(model, k, quad)
        return float(raw[_THETA2] / raw[_TOTAL]), float(raw[_THETA4] / raw[_TOTAL])

    @staticmethod
    def forward_moment_estimates(
        model: BaseCrossSectionModel,
        k: float,
        quad: Optional[AngularQuadrature] = None,
    ) -> ForwardMomentEstimates:
        """
        Small-angle estimates kappa sigma_tr^2 / sigma and 2 sigma_tr.

        Raises:
            RegimeError: If sigma_tr / sigma exceeds the forward-peak threshold
        """
        raw, _ = CrossSectionService._raw(model, k, quad)
        sigma, sigma_tr = raw[_TOTAL], raw[_TR]
        threshold = get_settings().forward_peak_threshold
        if not sigma_tr < threshold * sigma:
            raise RegimeError(
                f"Model is not forward peaked: sigma_tr/sigma = {sigma_tr / sigma:.3g}"
                f" >= {threshold}"
            )
        theta2 = raw[_THETA2] / sigma
        theta4 = raw[_THETA4] / sigma
        kurtosis = theta4 / theta2**2
        return ForwardMomentEstimates(
            sigma_qpar_approx=float(kurtosis * sigma_tr**2 / sigma),
            sigma_qperp_approx=float(2.0 * sigma_tr),
            kurtosis=float(kurtosis),
            theta2=float(theta2),
            theta4=float(theta4),
        )

    @staticmethod
    def transfer_integral_checks(
        model: BaseCrossSectionModel,
        k: float,
        quad: Optional[AngularQuadrature] = None,
    ) -> TransferIntegralReport:
        """
        Check the integrals of q and q^2 against -k sigma_tr Omega0 and 2 k^2 sigma_tr.

        The full d-dimensional vector q = k(Omega - Omega0) is integrated with
        Omega0 off the coordinate axes, polar nodes times transverse
        cross-polytope directions.
        """
        CrossSectionService._check_k(k)
        d = model.d
        if quad is None:
            _, order = CrossSectionService._adaptive_raw_moments(model, np.asarray(k))
            quad = GeometryService.polar_quadrature(d, order)
        sigma_tr = CrossSectionService.moments(model, k, quad).sigma_tr

        omega0 = np.ones(d) / np.sqrt(d)
        basis = GeometryService.orthonormal_complement(omega0)
        directions = GeometryService.transverse_average_directions(d) @ basis
        node_weight = (
            quad.transverse_area
            * quad.weights
            * model.evaluate_at_nodes(np.asarray(k), quad)
            / directions.shape[0]
        )
        sin_theta = np.sqrt(quad.sin_sq)
        # q[i, j] = k * ((cos - 1) Omega0 + sin e_j)
        q = k * (
            -quad.one_minus_cos[:, None, None] * omega0[None, None, :]
            + sin_theta[:, None, None] * directions[None, :, :]
        )
        vector = np.einsum("i,ijd->d", node_weight, q)
        scalar = float(np.einsum("i,ij->", node_weight, np.sum(q * q, axis=-1)))

        scale = k * sigma_tr
        if scale == 0:
            return TransferIntegralReport(
                vector_residual=float(np.linalg.norm(vector)),
                scalar_residual=abs(scalar),
            )
        return TransferIntegralReport(
            vector_residual=float(np.linalg.norm(vector + scale * omega0) / scale),
            scalar_residual=abs(scalar - 2.0 * k * scale) / (2.0 * k * scale),
        )

    @staticmethod
    def _theta_cdf(
        model: BaseCrossSectionModel, k: np.ndarray, theta: np.ndarray
    ) -> np.ndarray:
        """Normalised CDF of theta under sin^(d-2) dsigma/dOmega, one row per k."""
        density = np.sin(theta) ** (model.d - 2) * model.evaluate(k[:, None], theta)
        cdf = integrate.cumulative_trapezoid(density, theta, axis=-1, initial=0.0)
        return cdf / cdf[:, -1:]

    @staticmethod
    def sample_scattering_angles(
        model: BaseCrossSectionModel,
        k: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """
        Draw one scattering angle per wavenumber from dsigma/dOmega.

        k-dependent models are sampled at the centre of quantile bins of k.
        """
        k = np.atleast_1d(np.asarray(k, dtype=float))
        theta_grid = np.linspace(0.0, np.pi, _SAMPLING_NODES)
        u = rng.random(k.size)
        if model.k_independent or np.all(k == k[0]):
            cdf = CrossSectionService._theta_cdf(model, k[:1], theta_grid)[0]
            return np.interp(u, cdf, theta_grid)
        edges = np.quantile(k, np.linspace(0.0, 1.0, _SAMPLING_K_BINS + 1))
        bins = np.clip(np.searchsorted(edges, k, side="right") - 1, 0, _SAMPLING_K_BINS - 1)
        centres = 0.5 * (edges[:-1] + edges[1:])
        cdfs = CrossSectionService._theta_cdf(model, centres, theta_grid)
        theta = np.empty_like(k)
        for b in np.unique(bins):
            mask = bins == b
            theta[mask] = np.interp(u[mask], cdfs[b], theta_grid)
        return theta

    @staticmethod
    def sample_scattering_directions(
        model: BaseCrossSectionModel,
        k: np.ndarray,
        omega0: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """
        Outgoing directions for incoming unit vectors omega0 (rows).

        Args:
            model: Cross-section model
            k: Relative wavenumber per row
            omega0: Incoming unit directions, shape (n, d)
            rng: Random stream

        Returns:
            Outgoing unit directions, shape (n, d)
        """
        omega0 = np.atleast_2d(omega0)
        theta = CrossSectionService.sample_scattering_angles(
            model, np.broadcast_to(k, omega0.shape[:1]), rng
        )[:, None]
        e_perp = GeometryService._tangent_unit(omega0, rng)
        return np.cos(theta) * omega0 + np.sin(theta) * e_perp

    @staticmethod
    def energy_transfer(
        model: BaseCrossSectionModel,
        kinematics: KinematicPair,
        k_S: np.ndarray,
        k_B: np.ndarray,
    ) -> np.ndarray:
        """
        Mean projectile energy change per unit incident flux (J m^(d-1)).

        Uses the exact transfer integrals: -(hbar^2 sigma_tr / M^2)
        (m_B k_S^2 - m_S k_B^2 + (m_B - m_S) k_S . k_B), one value per k_B row.
        """
        k_S = np.asarray(k_S, dtype=float)
        k_B = np.atleast_2d(k_B)
        k_rel = np.linalg.norm(kinematics.relative_k(k_S, k_B), axis=-1)
        sigma_tr = CrossSectionService.moments_batch(model, k_rel)["tr"]
        m_S, m_B, M = kinematics.mass_S, kinematics.mass_B, kinematics.total_mass
        bracket = (
            m_B * np.dot(k_S, k_S)
            - m_S * np.sum(k_B * k_B, axis=-1)
            + (m_B - m_S) * (k_B @ k_S)
        )
        return -(HBAR**2) * sigma_tr * bracket / M**2
