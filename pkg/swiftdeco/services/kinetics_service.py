"""Closed-form moment trajectories, variance split and coherence lengths"""

import logging
import math
from typing import Optional, Union

import numpy as np
from scipy import integrate

from swiftdeco.config import get_settings
from swiftdeco.core.constants import (HBAR, K_BOLTZMANN, MODE_CONSTANT,
                                      MODE_ENERGY_UPDATING, MOMENT_TR,
                                      RELATIVISTIC_THRESHOLD, SPEED_OF_LIGHT)
from swiftdeco.core.exceptions import (DomainError, GridError, NumericalError,
                                       ParameterError)
from swiftdeco.schemas.bath import (BathSpec, ParticleSpec,
                                    TransportCoefficients)
from swiftdeco.schemas.kinetics import (CoherenceMatrixResult, CoherenceState,
                                        MomentTrajectory, VarianceSplit,
                                        WignerGaussian)
from swiftdeco.schemas.opcheck import MomentumGrid
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.utils import finite_difference as fd
from swiftdeco.utils import numeric_utils

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Rate-table resolution for the energy-updating mode
_RATE_TABLE_POINTS = 33
# A Gaussian must span this many standard deviations on each side of the grid
_GRID_SIGMAS = 6.0


def _check_time(t: ArrayLike) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("Time must be non-negative")
    return t


def _scalar_or_array(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def _convolved_exp(b: float, c: float, t: np.ndarray) -> np.ndarray:
    """Integral over [0, t] of exp(-c (t - s)) exp(-b s) ds for c >= b."""
    if c == b:
        return t * np.exp(-b * t)
    return numeric_utils.exp_difference(b, c, t) / (c - b)


class KineticsService:
    """Service for the analytic moment dynamics"""

    @staticmethod
    def mean_momentum(k0: np.ndarray, zeta: float, t: ArrayLike) -> np.ndarray:
        """
        Mean wavenumber <k>(t) = k0 exp(-zeta t).

        Args:
            k0: Initial wavenumber vector (1/m)
            zeta: Momentum friction (1/s)
            t: Time or array of times (s)

        Returns:
            Array of shape t.shape + (d,)
        """
        t = _check_time(t)
        return np.exp(-zeta * t)[..., None] * np.asarray(k0, dtype=float)

    @staticmethod
    def traveled_distance(v0: float, zeta: float, t: ArrayLike) -> ArrayLike:
        """(v0/zeta)(1 - exp(-zeta t)), v0 t when zeta = 0."""
        t = _check_time(t)
        return _scalar_or_array(v0 * numeric_utils.exp_ratio(zeta, t))

    @staticmethod
    def range(v0: float, zeta: float) -> float:
        """Saturation distance v0/zeta (infinite without friction)."""
        return v0 / zeta if zeta > 0 else math.inf

    @staticmethod
    def mean_square_momentum(
        k0_norm2: float, eta: float, xi: float, d: int, t: ArrayLike
    ) -> ArrayLike:
        """
        <k^2>(t) = (k0^2 - d xi/eta) exp(-2 eta t) + d xi/eta.

        Reduces to k0^2 + 2 d xi t at eta = 0.
        """
        t = _check_time(t)
        value = k0_norm2 * np.exp(-2.0 * eta * t) + 2.0 * d * xi * (
            numeric_utils.exp_ratio(2.0 * eta, t)
        )
        return _scalar_or_array(value)

    @staticmethod
    def mean_energy(mass_S: float, mean_k2: ArrayLike) -> ArrayLike:
        """hbar^2 <k^2> / 2 m_S."""
        return HBAR**2 * np.asarray(mean_k2) / (2.0 * mass_S)

    @staticmethod
    def energy_thermalization(
        E0: float, E_B: float, eta: float, t: ArrayLike
    ) -> ArrayLike:
        """Mean energy relaxing from E0 to the bath value E_B at rate 2 eta."""
        t = _check_time(t)
        return _scalar_or_array(E_B + (E0 - E_B) * np.exp(-2.0 * eta * t))

    @staticmethod
    def variance_split(
        k0_norm2: float,
        eta: float,
        zeta: float,
        xi: float,
        d: int,
        t: ArrayLike,
    ) -> VarianceSplit:
        """
        Longitudinal and per-direction transverse momentum variance.

        Kpar2 = (xi/eta)(1 - exp(-2 eta t)),
        Kperp2 = k0^2 (exp(-2 eta t) - exp(-2 zeta t))/(d-1) + Kpar2

        Args:
            k0_norm2: |k0|^2 (1/m^2)
            eta: Energy friction (1/s)
            zeta: Momentum friction (1/s)
            xi: Thermal momentum diffusivity (1/(m^2 s))
            d: Dimension
            t: Time or array of times (s)

        Returns:
            VarianceSplit with K2 = Kpar2 + (d-1) Kperp2

        Raises:
            ParameterError: If zeta < eta
        """
        if zeta < eta:
            raise ParameterError(f"zeta ({zeta:g}) must not be below eta ({eta:g})")
        t = _check_time(t)
        kpar2 = 2.0 * xi * numeric_utils.exp_ratio(2.0 * eta, t)
        rotational = k0_norm2 * numeric_utils.exp_difference(
            2.0 * eta, 2.0 * zeta, t
        )
        kperp2 = rotational / (d - 1) + kpar2
        return VarianceSplit(d=d, Kpar2=kpar2, Kperp2=kperp2, K2=rotational + d * kpar2)

    @staticmethod
    def fokker_planck_variance_split(
        k0_norm2: float,
        eta: float,
        zeta: float,
        gamma: float,
        xi: float,
        d: int,
        t: ArrayLike,
    ) -> VarianceSplit:
        """
        Exact second moments of the Fokker-Planck dynamics.

        The longitudinal variance obeys
        dKpar2/dt = -2 (zeta + gamma) Kpar2 + 2 gamma K2 + 2 xi,
        so direction diffusion feeds part of the total variance back into the
        longitudinal axis. K2 and both limits agree with variance_split, and
        gamma = 0 reproduces it exactly.
        """
        if zeta < eta:
            raise ParameterError(f"zeta ({zeta:g}) must not be below eta ({eta:g})")
        if gamma == 0.0:
            return KineticsService.variance_split(k0_norm2, eta, zeta, xi, d, t)
        t = _check_time(t)
        c = 2.0 * (zeta + gamma)
        relax = numeric_utils.exp_ratio(c, t)
        K2 = k0_norm2 * numeric_utils.exp_difference(
            2.0 * eta, 2.0 * zeta, t
        ) + 2.0 * d * xi * numeric_utils.exp_ratio(2.0 * eta, t)
        if eta > 0:
            thermal = d * xi / eta
            feed = (
                (k0_norm2 - thermal) * _convolved_exp(2.0 * eta, c, t)
                - k0_norm2 * _convolved_exp(2.0 * zeta, c, t)
                + thermal * relax
            )
        else:
            feed = (
                k0_norm2 * relax
                + 2.0 * d * xi * (t - relax) / c
                - k0_norm2 * _convolved_exp(2.0 * zeta, c, t)
            )
        kpar2 = 2.0 * gamma * feed + 2.0 * xi * relax
        kperp2 = np.maximum(K2 - kpar2, 0.0) / (d - 1)
        return VarianceSplit(
            d=d, Kpar2=kpar2, Kperp2=kperp2, K2=kpar2 + (d - 1) * kperp2
        )

    @staticmethod
    def thermal_coherence_length(mass_S: float, temperature: float) -> float:
        """l_T = hbar / (2 sqrt(m_S k_B T)), infinite at T = 0."""
        if temperature < 0:
            raise DomainError("Temperature must be non-negative")
        if temperature == 0:
            return math.inf
        return HBAR / (2.0 * math.sqrt(mass_S * K_BOLTZMANN * temperature))

    @staticmethod
    def coherence_lengths(
        Kpar2: float,
        Kperp2: float,
        l_thermal: Optional[float] = None,
        mean_k2: Optional[float] = None,
    ) -> CoherenceState:
        """
        Longitudinal and transverse coherence lengths 1/(2 sqrt(K^2)).

        A vanishing variance is a plane wave along that axis; its length is
        reported as infinite and the state is flagged.

        Raises:
            DomainError: If a variance is negative
        """
        if Kpar2 < 0 or Kperp2 < 0:
            raise DomainError("Momentum variances must be non-negative")
        l_par = 0.5 / math.sqrt(Kpar2) if Kpar2 > 0 else math.inf
        l_perp = 0.5 / math.sqrt(Kperp2) if Kperp2 > 0 else math.inf
        if Kpar2 > 0:
            ratio = math.sqrt(Kperp2 / Kpar2)
        else:
            ratio = math.inf if Kperp2 > 0 else math.nan
        angular = (
            KineticsService.angular_variance(Kperp2, mean_k2)
            if mean_k2 is not None
            else None
        )
        return CoherenceState(
            l_par=l_par,
            l_perp=l_perp,
            l_thermal=l_thermal,
            ratio=ratio,
            angular_variance=angular,
            plane_wave=Kpar2 == 0 or Kperp2 == 0,
        )

    @staticmethod
    def short_time_coherence_ratio(v0: float, vB_rms: float, d: int) -> float:
        """l_par / l_perp at short times, sqrt(1 + d/(d-1) v0^2/<v_B^2>)."""
        if not vB_rms > 0:
            raise DomainError("Bath rms speed must be positive")
        return math.sqrt(1.0 + d / (d - 1) * (v0 / vB_rms) ** 2)

    @staticmethod
    def gamma_to_xi_ratio(k0_norm2: float, gamma: float, xi: float) -> float:
        """k0^2 gamma / xi, equal to d/(d-1) v0^2/<v_B^2>."""
        return k0_norm2 * gamma / xi if xi > 0 else math.inf

    @staticmethod
    def angular_variance(Kperp2: ArrayLike, mean_k2: ArrayLike) -> ArrayLike:
        """<theta^2> = Kperp2 / <k^2>."""
        mean_k2 = np.asarray(mean_k2, dtype=float)
        if np.any(mean_k2 <= 0):
            raise DomainError("<k^2> must be positive")
        return _scalar_or_array(np.asarray(Kperp2, dtype=float) / mean_k2)

    @staticmethod
    def perpendicular_length_from_angular_variance(
        k0_norm: float, angular_variance: float
    ) -> float:
        """Short-time l_perp = lambda_0 / (4 pi sqrt(<theta^2>))."""
        wavelength = 2.0 * math.pi / k0_norm
        return wavelength / (4.0 * math.pi * math.sqrt(angular_variance))

    @staticmethod
    def coherence_matrix_from_wigner(
        w: WignerGaussian, grid: MomentumGrid
    ) -> CoherenceMatrixResult:
        """
        Coherence length matrix of a Wigner function sampled on a grid.

        Gradient form: int grad f (x) grad f / (2 int f^2).
        Hessian form: -int f hess f / (2 int f^2).
        For a Gaussian both equal cov_K2^-1 / 4.

        Args:
            w: Gaussian Wigner function
            grid: Grid centred on w.mean_k

        Returns:
            Both matrices and the largest boundary value of f relative to
            its peak as truncation estimate
        """
        if grid.d != w.mean_k.size:
            raise GridError(
                f"Grid dimension {grid.d} does not match Wigner dimension {w.mean_k.size}"
            )
        sigma_max = math.sqrt(float(np.max(np.linalg.eigvalsh(w.cov_K2))))
        if grid.half_width < _GRID_SIGMAS * sigma_max:
            logger.warning(
                "Grid half width %.3g spans fewer than %g standard deviations",
                grid.half_width,
                _GRID_SIGMAS,
            )
        points = np.stack(grid.coordinates(), axis=-1) + w.mean_k
        f = w.density(points)
        d = grid.d
        spacing = np.full(d, grid.spacing)
        norm = 2.0 * np.sum(f * f)
        grad = fd.gradient(f, spacing)
        hess = fd.hessian(f, spacing)
        matrix = np.empty((d, d))
        hessian_matrix = np.empty((d, d))
        for i in range(d):
            for j in range(d):
                matrix[i, j] = np.sum(grad[i] * grad[j]) / norm
                hessian_matrix[i, j] = -np.sum(f * hess[i][j]) / norm
        boundary = max(
            float(np.max(np.abs(np.take(f, index, axis=axis))))
            for axis in range(d)
            for index in (0, -1)
        )
        return CoherenceMatrixResult(
            matrix=matrix,
            hessian_matrix=hessian_matrix,
            truncation_estimate=boundary / float(np.max(f)),
        )

    @staticmethod
    def velocity_from_kinetic_energy(energy: float, mass: float) -> float:
        """
        Speed from kinetic energy, relativistic above E/mc^2 = 1e-3.

        Args:
            energy: Kinetic energy (J)
            mass: Rest mass (kg)

        Raises:
            DomainError: If energy <= 0
        """
        if not energy > 0:
            raise DomainError("Kinetic energy must be positive")
        rest = mass * SPEED_OF_LIGHT**2
        if energy / rest <= RELATIVISTIC_THRESHOLD:
            return math.sqrt(2.0 * energy / mass)
        lorentz = 1.0 + energy / rest
        return SPEED_OF_LIGHT * math.sqrt(1.0 - 1.0 / lorentz**2)

    @staticmethod
    def kinetic_energy_from_velocity(velocity: float, mass: float) -> float:
        """Kinetic energy from speed, relativistic above v/c = sqrt(2e-3)."""
        if velocity < 0 or velocity >= SPEED_OF_LIGHT:
            raise DomainError("Speed must lie in [0, c)")
        beta2 = (velocity / SPEED_OF_LIGHT) ** 2
        if beta2 <= 2.0 * RELATIVISTIC_THRESHOLD:
            return 0.5 * mass * velocity**2
        return mass * SPEED_OF_LIGHT**2 * (1.0 / math.sqrt(1.0 - beta2) - 1.0)

    @staticmethod
    def time_grid(
        start: Optional[float] = None,
        end: Optional[float] = None,
        n: Optional[int] = None,
    ) -> np.ndarray:
        """Log-spaced grid in eta t, defaulting to the configured decades."""
        settings = get_settings()
        start = settings.time_grid_start if start is None else start
        end = settings.time_grid_end if end is None else end
        n = settings.time_grid_points if n is None else n
        if not 0 < start < end or n < 2:
            raise ParameterError("Time grid needs 0 < start < end and n >= 2")
        return numeric_utils.log_grid(start, end, n)

    @staticmethod
    def log_log_slope(t: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Local slopes d log y / d log t."""
        return numeric_utils.log_log_slope(np.asarray(t), np.asarray(y))

    @staticmethod
    def _constant_trajectory(
        particle: ParticleSpec,
        coefficients: TransportCoefficients,
        t: np.ndarray,
    ) -> dict[str, np.ndarray]:
        d = particle.d
        k0_norm2 = particle.k0_norm**2
        split = KineticsService.variance_split(
            k0_norm2, coefficients.eta, coefficients.zeta, coefficients.xi, d, t
        )
        mean_k2 = KineticsService.mean_square_momentum(
            k0_norm2, coefficients.eta, coefficients.xi, d, t
        )
        return {
            "mean_k": KineticsService.mean_momentum(particle.k0, coefficients.zeta, t),
            "mean_k2": np.asarray(mean_k2),
            "Kpar2": split.Kpar2,
            "Kperp2": split.Kperp2,
            "K2": split.K2,
            "traveled": np.asarray(
                KineticsService.traveled_distance(particle.speed, coefficients.zeta, t)
            ),
        }

    @staticmethod
    def _energy_updating_trajectory(
        particle: ParticleSpec,
        bath: BathSpec,
        model: BaseCrossSectionModel,
        coefficients: TransportCoefficients,
        t: np.ndarray,
    ) -> dict[str, np.ndarray]:
        """
        Moment equations with alpha_tr interpolated at the current |<k>|.

        State (scaled by k0 and the initial range): |<k>|, <k^2>, Kpar2 and
        the traveled distance.
        """
        d = particle.d
        k0 = particle.k0_norm
        k_grid = np.linspace(0.0, k0, _RATE_TABLE_POINTS)
        table = BathService.rate_table(model, particle, bath, k_grid)[MOMENT_TR]
        if table[-1] > 0:
            # keeps a range or stopping-power calibration of alpha_tr at k0
            table = table * (coefficients.alpha_tr / table[-1])
        unit = BathService.transport_from_alpha_tr(1.0, particle, bath)
        length = particle.speed / coefficients.zeta

        def rhs(_, y):
            m, s, p, _x = y
            alpha = np.interp(abs(m) * k0, k_grid, table)
            eta, zeta, xi = alpha * unit.eta, alpha * unit.zeta, alpha * unit.xi
            xi_scaled = xi / k0**2
            return [
                -zeta * m,
                -2.0 * eta * s + 2.0 * d * xi_scaled,
                -2.0 * eta * p + 2.0 * xi_scaled,
                particle.speed * m / length,
            ]

        solution = integrate.solve_ivp(
            rhs,
            (0.0, float(t[-1])),
            [1.0, 1.0, 0.0, 0.0],
            t_eval=t,
            method="LSODA",
            rtol=1e-10,
            atol=1e-14,
        )
        if not solution.success:
            raise NumericalError(f"Moment integration failed: {solution.message}")
        m, s, p, x = solution.y
        direction = particle.k0 / k0
        k2 = np.maximum(s - m**2, 0.0) * k0**2
        kpar2 = np.minimum(p * k0**2, k2)
        return {
            "mean_k": (m * k0)[:, None] * direction,
            "mean_k2": s * k0**2,
            "Kpar2": kpar2,
            "Kperp2": (k2 - kpar2) / (d - 1),
            "K2": k2,
            "traveled": x * length,
        }

    @staticmethod
    def evolve(
        particle: ParticleSpec,
        bath: BathSpec,
        model: BaseCrossSectionModel,
        eta_t: Optional[np.ndarray] = None,
        mode: str = MODE_CONSTANT,
        coefficients: Optional[TransportCoefficients] = None,
    ) -> MomentTrajectory:
        """
        Moment trajectory on a grid of eta t.

        Args:
            particle: Projectile
            bath: Gas
            model: Cross-section model
            eta_t: Times in units of 1/eta (default: configured log grid)
            mode: constant (coefficients frozen at k0) or energy_updating
            coefficients: Calibrated transport coefficients at k0 (default:
                computed from the model)

        Returns:
            MomentTrajectory

        Raises:
            ParameterError: If the mode is unknown or eta vanishes
        """
        if mode not in (MODE_CONSTANT, MODE_ENERGY_UPDATING):
            raise ParameterError(f"Unknown evolution mode: {mode}")
        if coefficients is None:
            coefficients = BathService.transport_coefficients(model, particle, bath)
        if not coefficients.eta > 0:
            raise ParameterError("Energy friction vanishes; no time scale 1/eta")
        eta_t = KineticsService.time_grid() if eta_t is None else np.asarray(eta_t)
        t = _check_time(eta_t) / coefficients.eta
        diagnostics = BathService.regime_diagnostics(model, particle, bath)
        logger.info(
            "Evolving %d times in %s mode (eta = %.4e 1/s)", t.size, mode, coefficients.eta
        )
        if mode == MODE_CONSTANT:
            values = KineticsService._constant_trajectory(particle, coefficients, t)
        else:
            values = KineticsService._energy_updating_trajectory(
                particle, bath, model, coefficients, t
            )
        return MomentTrajectory(
            d=particle.d,
            t=t,
            eta_t=eta_t,
            mean_energy=KineticsService.mean_energy(particle.mass_S, values["mean_k2"]),
            km_regime_violated=not diagnostics.kramers_moyal_ok,
            **values,
        )

    @staticmethod
    def coherence_series(
        trajectory: MomentTrajectory, l_thermal: float
    ) -> dict[str, np.ndarray]:
        """Coherence lengths over a trajectory, relative to l_T."""
        with np.errstate(divide="ignore"):
            l_par = 0.5 / np.sqrt(trajectory.Kpar2)
            l_perp = 0.5 / np.sqrt(trajectory.Kperp2)
        return {
            "lpar_over_lT": l_par / l_thermal,
            "lperp_over_lT": l_perp / l_thermal,
        }
