"""Bath averages, collisional rates, Kramers-Moyal moments and transport coefficients"""

import itertools
import logging
from typing import Callable, Optional

import numpy as np

from swiftdeco.config import get_settings
from swiftdeco.core.constants import HBAR, MOMENT_KINDS, MOMENT_TR
from swiftdeco.core.exceptions import DomainError, NumericalError, ParameterError
from swiftdeco.schemas.bath import (BathSpec, FactorizationReport,
                                    KinematicPair, KMMoments, ParticleSpec,
                                    RegimeDiagnostics, TransportCoefficients)
from swiftdeco.services.cross_section_service import CrossSectionService
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.services.geometry_service import GeometryService
from swiftdeco.utils.rng_utils import make_rng

logger = logging.getLogger(__name__)

SCHEME_AUTO = "auto"
SCHEME_QUADRATURE = "quadrature"
SCHEME_MONTE_CARLO = "monte_carlo"


class BathService:
    """Service for averages over the gas velocity distribution"""

    @staticmethod
    def kinematics(particle: ParticleSpec, bath: BathSpec) -> KinematicPair:
        """Reduced and total masses of the collision pair."""
        return KinematicPair(mass_S=particle.mass_S, mass_B=bath.mass_B)

    @staticmethod
    def thermal_wavenumber_sq(bath: BathSpec) -> float:
        """k_T^2 = m_B k_B T / hbar^2."""
        return bath.thermal_wavenumber_sq

    @staticmethod
    def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Hermite nodes and weights for the standard normal density."""
        knots, weights = np.polynomial.hermite.hermgauss(n)
        return knots * np.sqrt(2.0), weights / np.sqrt(np.pi)

    @staticmethod
    def bath_nodes(
        bath: BathSpec,
        d: int,
        scheme: str = SCHEME_AUTO,
        order: Optional[int] = None,
        samples: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Bath wavenumbers k_B and their weights.

        Each component of k_B is normal with variance k_T^2. A frozen bath
        is the single point k_B = 0.

        Args:
            bath: Gas parameters
            d: Spatial dimension
            scheme: auto, quadrature or monte_carlo
            order: Gauss-Hermite order per axis
            samples: Monte-Carlo sample count
            rng: Random stream for Monte Carlo

        Returns:
            (nodes of shape (n, d), weights of shape (n,))
        """
        if bath.is_frozen:
            return np.zeros((1, d)), np.ones(1)
        settings = get_settings()
        k_T = np.sqrt(bath.thermal_wavenumber_sq)
        if scheme == SCHEME_AUTO:
            scheme = (
                SCHEME_QUADRATURE
                if d <= settings.bath_quadrature_max_dim
                else SCHEME_MONTE_CARLO
            )
        if scheme == SCHEME_QUADRATURE:
            x, w = BathService.gauss_hermite(order or settings.bath_quadrature_order)
            nodes = np.array(list(itertools.product(x, repeat=d)))
            weights = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
            return k_T * nodes, weights
        if scheme == SCHEME_MONTE_CARLO:
            n = samples or settings.bath_monte_carlo_samples
            rng = rng if rng is not None else make_rng(settings.default_seed)
            return k_T * rng.standard_normal((n, d)), np.full(n, 1.0 / n)
        raise ParameterError(f"Unknown bath averaging scheme: {scheme}")

    @staticmethod
    def _weighted_mean(values: np.ndarray, weights: np.ndarray, nodes: np.ndarray):
        values = np.asarray(values, dtype=float)
        bad = ~np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)
        if np.any(bad):
            index = int(np.argmax(bad))
            raise NumericalError(
                "Non-finite value in bath average",
                sample=nodes[index].tolist(),
            )
        return np.tensordot(weights, values, axes=(0, 0))

    @staticmethod
    def bath_average(
        f: Callable[[np.ndarray], np.ndarray],
        bath: BathSpec,
        d: int,
        scheme: str = SCHEME_AUTO,
        **kwargs,
    ):
        """
        Average of f(k_B) over the Maxwell-Boltzmann wavenumber density.

        Args:
            f: Vectorised function mapping (n, d) bath wavenumbers to n values
                (scalars, vectors or matrices)
            bath: Gas parameters
            d: Spatial dimension
            scheme: auto, quadrature or monte_carlo (extra keywords go to bath_nodes)

        Returns:
            The average, with the shape of one value of f

        Raises:
            NumericalError: If f returns a non-finite sample
        """
        nodes, weights = BathService.bath_nodes(bath, d, scheme, **kwargs)
        return BathService._weighted_mean(f(nodes), weights, nodes)

    @staticmethod
    def _collision_samples(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
        nodes: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
        """Relative k vectors, n*v and the four moments at each bath node."""
        pair = BathService.kinematics(particle, bath)
        k_rel = pair.relative_k(np.asarray(k_S, dtype=float), nodes)
        k_norm = np.linalg.norm(k_rel, axis=1)
        flux = bath.number_density * HBAR * k_norm / pair.reduced_mass
        moving = k_norm > 0
        sigmas = {kind: np.zeros_like(k_norm) for kind in MOMENT_KINDS}
        if np.any(moving):
            batch = CrossSectionService.moments_batch(model, k_norm[moving])
            for kind in MOMENT_KINDS:
                sigmas[kind][moving] = batch[kind]
        return k_rel, flux, sigmas

    @staticmethod
    def collisional_rates(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
        scheme: str = SCHEME_AUTO,
        **kwargs,
    ) -> dict[str, float]:
        """All four rates alpha_mu = <n v sigma_mu(k)>_B."""
        nodes, weights = BathService.bath_nodes(bath, particle.d, scheme, **kwargs)
        _, flux, sigmas = BathService._collision_samples(
            model, particle, bath, k_S, nodes
        )
        return {
            kind: float(BathService._weighted_mean(flux * sigmas[kind], weights, nodes))
            for kind in MOMENT_KINDS
        }

    @staticmethod
    def collisional_rate(
        mu: str,
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
        scheme: str = SCHEME_AUTO,
        **kwargs,
    ) -> float:
        """
        Collisional rate for one moment kind.

        Args:
            mu: total, tr, qpar or qperp
            model: Cross-section model
            particle: Projectile
            bath: Gas
            k_S: Projectile wavenumber

        Returns:
            alpha_mu in 1/s

        Raises:
            ParameterError: If mu is not a moment kind
        """
        if mu not in MOMENT_KINDS:
            raise ParameterError(f"Unknown moment kind: {mu}")
        return BathService.collisional_rates(
            model, particle, bath, k_S, scheme, **kwargs
        )[mu]

    @staticmethod
    def collisional_rate_with_error(
        mu: str,
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
        samples: int,
        rng: np.random.Generator,
    ) -> tuple[float, float]:
        """Monte-Carlo rate and its standard error."""
        nodes, _ = BathService.bath_nodes(
            bath, particle.d, SCHEME_MONTE_CARLO, samples=samples, rng=rng
        )
        _, flux, sigmas = BathService._collision_samples(
            model, particle, bath, k_S, nodes
        )
        values = flux * sigmas[mu]
        return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))

    @staticmethod
    def km_drift(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
    ) -> np.ndarray:
        """A1 = -(m_B/M) alpha_tr(k_S) k_S."""
        k_S = np.asarray(k_S, dtype=float)
        if not np.any(k_S) and bath.is_frozen:
            return np.zeros_like(k_S)
        pair = BathService.kinematics(particle, bath)
        alpha_tr = BathService.collisional_rate(MOMENT_TR, model, particle, bath, k_S)
        return -(pair.mass_B / pair.total_mass) * alpha_tr * k_S

    @staticmethod
    def km_diffusion(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
    ) -> np.ndarray:
        """
        Diffusion tensor of the smooth-sigma factorisation.

        A2 = alpha_qpar (m_B/M)^2 k_S k_S + alpha_qperp (m_B/M)^2
        (k_S^2 1 - k_S k_S)/(d-1) + 2 alpha_tr (m_S/M)^2 k_T^2 1
        """
        k_S = np.asarray(k_S, dtype=float)
        d = k_S.size
        if not np.any(k_S) and bath.is_frozen:
            return np.zeros((d, d))
        rates = BathService.collisional_rates(model, particle, bath, k_S)
        return BathService.diffusion_tensor(rates, particle, bath, k_S)

    @staticmethod
    def diffusion_tensor(
        rates: dict[str, float],
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
    ) -> np.ndarray:
        """Assemble A2 from given rates."""
        d = k_S.size
        pair = BathService.kinematics(particle, bath)
        b = pair.mass_B / pair.total_mass
        s = pair.mass_S / pair.total_mass
        outer = np.outer(k_S, k_S)
        eye = np.eye(d)
        return (
            rates["qpar"] * b**2 * outer
            + rates["qperp"] * b**2 * (np.dot(k_S, k_S) * eye - outer) / (d - 1)
            + 2.0 * rates["tr"] * s**2 * bath.thermal_wavenumber_sq * eye
        )

    @staticmethod
    def exact_km_moments(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
        scheme: str = SCHEME_AUTO,
        **kwargs,
    ) -> KMMoments:
        """
        Kramers-Moyal moments without factorising sigma from the bath average.

        A1 = -<n v sigma_tr k>_B,
        A2 = <n v sigma_qpar k k + n v sigma_qperp (k^2 1 - k k)/(d-1)>_B
        """
        d = particle.d
        nodes, weights = BathService.bath_nodes(bath, d, scheme, **kwargs)
        k_rel, flux, sigmas = BathService._collision_samples(
            model, particle, bath, k_S, nodes
        )
        outer = k_rel[:, :, None] * k_rel[:, None, :]
        k2 = np.sum(k_rel * k_rel, axis=1)[:, None, None]
        a1 = -BathService._weighted_mean(
            (flux * sigmas["tr"])[:, None] * k_rel, weights, nodes
        )
        a2_samples = (flux * sigmas["qpar"])[:, None, None] * outer + (
            flux * sigmas["qperp"]
        )[:, None, None] * (k2 * np.eye(d) - outer) / (d - 1)
        a2 = BathService._weighted_mean(a2_samples, weights, nodes)
        return KMMoments(A1=a1, A2=a2)

    @staticmethod
    def factorization_discrepancy(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
    ) -> FactorizationReport:
        """Relative Frobenius differences between factorised and exact moments."""
        exact = BathService.exact_km_moments(model, particle, bath, k_S)
        a1 = BathService.km_drift(model, particle, bath, k_S)
        a2 = BathService.km_diffusion(model, particle, bath, k_S)

        def rel(a: np.ndarray, b: np.ndarray) -> float:
            scale = np.linalg.norm(b)
            return float(np.linalg.norm(a - b) / scale) if scale > 0 else 0.0

        report = FactorizationReport(
            drift_discrepancy=rel(a1, exact.A1),
            diffusion_discrepancy=rel(a2, exact.A2),
        )
        logger.info(
            "Factorisation discrepancy: drift %.3e, diffusion %.3e",
            report.drift_discrepancy,
            report.diffusion_discrepancy,
        )
        return report

    @staticmethod
    def scattering_moments_monte_carlo(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
        samples: int,
        rng: np.random.Generator,
    ) -> KMMoments:
        """
        Brute-force A1 and A2 by sampling collisions.

        Each sample draws k_B from the bath and Omega from dsigma/dOmega and
        accumulates n v sigma q and n v sigma q q with q = k (Omega - Omega0).
        """
        d = particle.d
        nodes, _ = BathService.bath_nodes(
            bath, d, SCHEME_MONTE_CARLO, samples=samples, rng=rng
        )
        if bath.is_frozen:
            nodes = np.zeros((samples, d))
        k_rel, flux, sigmas = BathService._collision_samples(
            model, particle, bath, k_S, nodes
        )
        k_norm = np.linalg.norm(k_rel, axis=1, keepdims=True)
        omega0 = k_rel / k_norm
        omega = CrossSectionService.sample_scattering_directions(
            model, k_norm[:, 0], omega0, rng
        )
        q = k_norm * (omega - omega0)
        w = (flux * sigmas["total"])[:, None]
        a1_samples = w * q
        a2_samples = (w[:, :, None] * q[:, :, None] * q[:, None, :]).reshape(samples, -1)
        root_n = np.sqrt(samples)
        return KMMoments(
            A1=a1_samples.mean(axis=0),
            A2=a2_samples.mean(axis=0).reshape(d, d),
            A1_stderr=a1_samples.std(axis=0, ddof=1) / root_n,
            A2_stderr=(a2_samples.std(axis=0, ddof=1) / root_n).reshape(d, d),
        )

    @staticmethod
    def angular_tensor_check(
        d: int,
        theta: float = 0.5 * np.pi,
        samples: int = 1_000_000,
        rng: Optional[np.random.Generator] = None,
    ) -> float:
        """
        Monte-Carlo check of <Omega_perp Omega_perp> = (1 - Omega0 Omega0)/(d-1).

        The residual is scaled by sin^2(theta), the weight of the transverse
        part in the angular tensor at that scattering angle.

        Returns:
            Max absolute entry of the difference
        """
        if d < 2:
            raise ParameterError(f"Dimension must be >= 2, got {d}")
        rng = rng if rng is not None else make_rng(get_settings().default_seed)
        omega0 = np.zeros(d)
        omega0[0] = 1.0
        omega_perp = GeometryService._tangent_unit(np.tile(omega0, (samples, 1)), rng)
        average = omega_perp.T @ omega_perp / samples
        expected = (np.eye(d) - np.outer(omega0, omega0)) / (d - 1)
        return float(np.sin(theta) ** 2 * np.max(np.abs(average - expected)))

    @staticmethod
    def relative_momentum_dyadic(
        particle: ParticleSpec, bath: BathSpec, k_S: np.ndarray
    ) -> np.ndarray:
        """<k k>_B = (m_B/M)^2 k_S k_S + (m_S/M)^2 k_T^2 1."""
        k_S = np.asarray(k_S, dtype=float)
        pair = BathService.kinematics(particle, bath)
        b = pair.mass_B / pair.total_mass
        s = pair.mass_S / pair.total_mass
        return b**2 * np.outer(k_S, k_S) + s**2 * bath.thermal_wavenumber_sq * np.eye(
            k_S.size
        )

    @staticmethod
    def transport_from_alpha_tr(
        alpha_tr: float, particle: ParticleSpec, bath: BathSpec
    ) -> TransportCoefficients:
        """
        Transport coefficients for a given transfer rate.

        eta = m_S m_B/M^2 alpha_tr, gamma = m_B^2/M^2 alpha_tr/(d-1),
        xi = m_S^2/M^2 alpha_tr k_T^2, zeta = m_B/M alpha_tr
        """
        if alpha_tr < 0:
            raise ParameterError("alpha_tr must be non-negative")
        d = particle.d
        pair = BathService.kinematics(particle, bath)
        m_S, m_B, M = pair.mass_S, pair.mass_B, pair.total_mass
        return TransportCoefficients(
            d=d,
            alpha_tr=alpha_tr,
            eta=m_S * m_B / M**2 * alpha_tr,
            zeta=m_B / M * alpha_tr,
            gamma=m_B**2 / M**2 * alpha_tr / (d - 1),
            xi=m_S**2 / M**2 * alpha_tr * bath.thermal_wavenumber_sq,
        )

    @staticmethod
    def transport_coefficients(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: Optional[np.ndarray] = None,
    ) -> TransportCoefficients:
        """Transport coefficients with alpha_tr evaluated at k_S (default k0)."""
        k_S = particle.k0 if k_S is None else np.asarray(k_S, dtype=float)
        alpha_tr = BathService.collisional_rate(MOMENT_TR, model, particle, bath, k_S)
        return BathService.transport_from_alpha_tr(alpha_tr, particle, bath)

    @staticmethod
    def eta_from_stopping(stopping_power: float, mean_energy: float, mean_speed: float) -> float:
        """
        Energy friction from a stopping power, eta = sqrt(<v^2>) S / (2 <E>).

        Args:
            stopping_power: -dE/dx in J/m
            mean_energy: Mean kinetic energy in J
            mean_speed: Root-mean-square speed in m/s

        Raises:
            DomainError: If S < 0 or energy or speed is not positive
        """
        if stopping_power < 0:
            raise DomainError("Stopping power must be non-negative")
        if not mean_energy > 0 or not mean_speed > 0:
            raise DomainError("Mean energy and speed must be positive")
        return mean_speed * stopping_power / (2.0 * mean_energy)

    @staticmethod
    def alpha_tr_from_eta(eta: float, particle: ParticleSpec, bath: BathSpec) -> float:
        """Invert eta = m_S m_B/M^2 alpha_tr."""
        pair = BathService.kinematics(particle, bath)
        return eta * pair.total_mass**2 / (pair.mass_S * pair.mass_B)

    @staticmethod
    def alpha_tr_from_range(range_: float, particle: ParticleSpec, bath: BathSpec) -> float:
        """alpha_tr such that v0/zeta equals the given range."""
        if not range_ > 0:
            raise DomainError("Range must be positive")
        pair = BathService.kinematics(particle, bath)
        zeta = particle.speed / range_
        return zeta * pair.total_mass / pair.mass_B

    @staticmethod
    def energy_loss_rate(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_S: np.ndarray,
    ) -> float:
        """Mean dE/dt of the projectile, <n v dE>_B with the exact transfer integrals."""
        pair = BathService.kinematics(particle, bath)
        k_S = np.asarray(k_S, dtype=float)

        def per_node(k_B: np.ndarray) -> np.ndarray:
            k_norm = np.linalg.norm(pair.relative_k(k_S, k_B), axis=1)
            flux = bath.number_density * HBAR * k_norm / pair.reduced_mass
            return flux * CrossSectionService.energy_transfer(model, pair, k_S, k_B)

        return float(BathService.bath_average(per_node, bath, particle.d))

    @staticmethod
    def rate_table(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        k_norms: np.ndarray,
    ) -> dict[str, np.ndarray]:
        """Rates alpha_mu at |k_S| = k_norms along the initial direction."""
        direction = particle.k0 / particle.k0_norm
        table = {kind: np.empty(len(k_norms)) for kind in MOMENT_KINDS}
        for i, k in enumerate(k_norms):
            rates = BathService.collisional_rates(model, particle, bath, k * direction)
            for kind in MOMENT_KINDS:
                table[kind][i] = rates[kind]
        return table

    @staticmethod
    def regime_diagnostics(
        model: BaseCrossSectionModel, particle: ParticleSpec, bath: BathSpec
    ) -> RegimeDiagnostics:
        """
        Weak-scattering and Kramers-Moyal validity at the initial wavenumber.

        Cross sections are taken at the frozen-bath relative wavenumber
        (m_B/M) |k0|; warnings are logged for violated conditions.
        """
        settings = get_settings()
        pair = BathService.kinematics(particle, bath)
        k_rel = pair.mass_B / pair.total_mass * particle.k0_norm
        moments = CrossSectionService.moments(model, k_rel)
        k_l_scat = particle.k0_norm / (bath.number_density * moments.sigma_total)
        transfer_ratio = moments.sigma_tr / moments.sigma_total
        mass_ratio = particle.mass_S / bath.mass_B
        weak_ok = k_l_scat > settings.weak_scattering_threshold
        km_ok = (
            transfer_ratio < settings.forward_peak_threshold
            or mass_ratio > settings.km_mass_ratio_threshold
        )
        if not weak_ok:
            logger.warning(
                "Weak-scattering condition violated: k0 l_scat = %.3g <= %g",
                k_l_scat,
                settings.weak_scattering_threshold,
            )
        if not km_ok:
            logger.warning(
                "Kramers-Moyal regime violated: sigma_tr/sigma = %.3g, m_S/m_B = %.3g",
                transfer_ratio,
                mass_ratio,
            )
        return RegimeDiagnostics(
            k_l_scat=k_l_scat,
            transfer_ratio=transfer_ratio,
            mass_ratio=mass_ratio,
            weak_scattering_ok=weak_ok,
            kramers_moyal_ok=km_ok,
        )
