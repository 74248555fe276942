"""Monte-Carlo ensemble solver of the momentum Fokker-Planck equation"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy import stats

from swiftdeco.config import get_settings
from swiftdeco.core.constants import (HBAR, MOMENT_KINDS, MOMENT_QPAR,
                                      MOMENT_QPERP, MOMENT_TR, SCHEME_ANALYTIC,
                                      SCHEME_FULL_A2)
from swiftdeco.core.exceptions import (DomainError, ParameterError,
                                       StepRejectedError)
from swiftdeco.schemas.bath import (BathSpec, ParticleSpec,
                                    TransportCoefficients)
from swiftdeco.schemas.kinetics import (CoherenceState, MomentState,
                                        MomentTrajectory)
from swiftdeco.schemas.sde import (Ensemble, EquilibriumReport, RateTable,
                                   SdeStepSpec)
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_sections import BaseCrossSectionModel
from swiftdeco.services.geometry_service import GeometryService
from swiftdeco.services.kinetics_service import KineticsService
from swiftdeco.utils import numeric_utils
from swiftdeco.utils.rng_utils import split_streams

logger = logging.getLogger(__name__)

_RATE_TABLE_POINTS = 33
# Rate tables extend this many thermal widths beyond |k0|
_TABLE_THERMAL_WIDTHS = 6.0
# Fraction of the accuracy bound used for the default step
_DEFAULT_STEP_FRACTION = 0.5
_STAT_KEYS = ("mean_k", "mean_k2", "Kpar2", "Kperp2", "K2", "traveled")


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm > 0:
        return v / norm
    out = np.zeros_like(v)
    out[0] = 1.0
    return out


class SdeService:
    """Service for stochastic ensemble integration"""

    @staticmethod
    def initial_ensemble(
        particle: ParticleSpec, walkers: int, seed: Optional[int] = None
    ) -> Ensemble:
        """All walkers at k0 and the origin (momentum eigenstate)."""
        if walkers < 1:
            raise ParameterError("Ensemble needs at least one walker")
        d = particle.d
        return Ensemble(
            k=np.tile(particle.k0, (walkers, 1)),
            r=np.zeros((walkers, d)),
            seed=seed,
        )

    @staticmethod
    def step_bound(spec: SdeStepSpec, d: int, mean_k2: float) -> float:
        """
        Largest rate entering the accuracy guard dt * rate <= safety.

        The diffusive rate xi/<k^2> uses at least the thermal second moment
        d xi/eta, so a walker ensemble starting at rest is not rejected.
        """
        scale = mean_k2
        if spec.eta > 0:
            scale = max(scale, d * spec.xi / spec.eta)
        diffusive = spec.xi / scale if scale > 0 else 0.0
        return max(spec.zeta, (d - 1) * spec.gamma, diffusive)

    @staticmethod
    def max_step(coefficients: TransportCoefficients, mean_k2: float) -> float:
        """Default step: half the accuracy bound."""
        rate = SdeService.step_bound(
            SdeStepSpec(
                dt=1.0,
                eta=coefficients.eta,
                zeta=coefficients.zeta,
                gamma=coefficients.gamma,
                xi=coefficients.xi,
                mass_S=1.0,
            ),
            coefficients.d,
            mean_k2,
        )
        if not rate > 0:
            raise ParameterError("All transport coefficients vanish")
        return _DEFAULT_STEP_FRACTION * get_settings().sde_dt_safety / rate

    @staticmethod
    def step(
        ens: Ensemble, spec: SdeStepSpec, rng: np.random.Generator
    ) -> Ensemble:
        """
        Advance every walker by one step.

        Friction and isotropic diffusion use the exact Ornstein-Uhlenbeck
        transition; direction diffusion rotates k by a Gaussian tangent vector
        of per-axis variance 2 gamma dt; positions stream with the mean
        velocity over the step.

        Args:
            ens: Current ensemble
            spec: Step size and coefficients
            rng: Random stream of this partition

        Returns:
            New ensemble at t + dt

        Raises:
            StepRejectedError: If dt exceeds the accuracy bound
        """
        k = ens.k
        d = ens.d
        mean_k2 = float(np.mean(np.sum(k * k, axis=1)))
        rate = SdeService.step_bound(spec, d, mean_k2)
        safety = get_settings().sde_dt_safety
        if spec.dt * rate > safety * (1.0 + 1e-12):
            logger.warning(
                "Rejected step dt = %.3e (dt * rate = %.3e)", spec.dt, spec.dt * rate
            )
            raise StepRejectedError(
                f"Step dt = {spec.dt:.3e} s exceeds bound {safety / rate:.3e} s"
            )
        r = ens.r + (
            HBAR / spec.mass_S * numeric_utils.exp_ratio(spec.zeta, spec.dt)
        ) * k
        spread = math.sqrt(2.0 * spec.xi * numeric_utils.exp_ratio(2.0 * spec.eta, spec.dt))
        k = math.exp(-spec.eta * spec.dt) * k + spread * rng.standard_normal(k.shape)
        if spec.gamma > 0:
            tangent = math.sqrt(2.0 * spec.gamma * spec.dt) * rng.standard_normal(k.shape)
            moving = np.any(k != 0.0, axis=1)
            k[moving] = GeometryService.rotate_by_tangent(k[moving], tangent[moving])
        return Ensemble(k=k, r=r, t=ens.t + spec.dt, seed=ens.seed, scheme=ens.scheme)

    @staticmethod
    def rate_table(
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        reevaluate: bool = True,
    ) -> RateTable:
        """
        Rates on a |k| grid covering the ensemble, or fixed at k0.

        Args:
            reevaluate: Tabulate over [0, k_max]; False freezes rates at k0
        """
        if not reevaluate:
            return RateTable.constant(
                BathService.collisional_rates(model, particle, bath, particle.k0)
            )
        width = math.sqrt(
            particle.d * particle.mass_S / bath.mass_B * bath.thermal_wavenumber_sq
        )
        k_max = particle.k0_norm + _TABLE_THERMAL_WIDTHS * width
        if not k_max > 0:
            return RateTable.constant(
                BathService.collisional_rates(model, particle, bath, particle.k0)
            )
        k_grid = np.linspace(0.0, k_max, _RATE_TABLE_POINTS)
        return RateTable(
            k_grid=k_grid, rates=BathService.rate_table(model, particle, bath, k_grid)
        )

    @staticmethod
    def full_a2_step(
        ens: Ensemble,
        model: BaseCrossSectionModel,
        particle: ParticleSpec,
        bath: BathSpec,
        dt: float,
        rng: np.random.Generator,
        rates: Optional[RateTable] = None,
    ) -> Ensemble:
        """
        Euler step with the full Kramers-Moyal drift and diffusion.

        k <- k + A1 dt + xi_k with Cov(xi_k) = A2 dt, both evaluated at each
        walker's k. A2 splits into longitudinal, transverse and isotropic
        parts, so the Gaussian increment is a sum of three projections.

        Args:
            ens: Current ensemble
            model: Cross-section model (used when no table is given)
            particle: Projectile
            bath: Gas
            dt: Step (s)
            rng: Random stream
            rates: Pre-computed rate table

        Returns:
            New ensemble at t + dt

        Raises:
            StepRejectedError: If dt is not positive or exceeds the accuracy
                bound at the ensemble's mean |k|
        """
        if not dt > 0:
            raise StepRejectedError("Step must be positive")
        if rates is None:
            rates = SdeService.rate_table(model, particle, bath)
        pair = BathService.kinematics(particle, bath)
        b = pair.mass_B / pair.total_mass
        s = pair.mass_S / pair.total_mass
        k = ens.k
        d = ens.d
        k_norm = np.linalg.norm(k, axis=1)

        local = BathService.transport_from_alpha_tr(
            float(rates.at(np.mean(k_norm))[MOMENT_TR]), particle, bath
        )
        spec = SdeStepSpec(
            dt=dt,
            eta=local.eta,
            zeta=local.zeta,
            gamma=local.gamma,
            xi=local.xi,
            mass_S=particle.mass_S,
        )
        rate = SdeService.step_bound(spec, d, float(np.mean(k_norm**2)))
        safety = get_settings().sde_dt_safety
        if dt * rate > safety * (1.0 + 1e-12):
            logger.warning("Rejected full-A2 step dt = %.3e (dt * rate = %.3e)", dt, dt * rate)
            raise StepRejectedError(
                f"Step dt = {dt:.3e} s exceeds bound {safety / rate:.3e} s"
            )
        alpha = rates.at(k_norm)
        safe = np.where(k_norm > 0, k_norm, 1.0)[:, None]
        k_hat = k / safe
        a_par = b**2 * alpha[MOMENT_QPAR] * k_norm**2
        a_perp = b**2 * alpha[MOMENT_QPERP] * k_norm**2 / (d - 1)
        a_iso = 2.0 * alpha[MOMENT_TR] * s**2 * bath.thermal_wavenumber_sq
        g_par = rng.standard_normal(k.shape)
        g_perp = rng.standard_normal(k.shape)
        g_iso = rng.standard_normal(k.shape)
        par = np.sum(g_par * k_hat, axis=1, keepdims=True) * k_hat
        perp = g_perp - np.sum(g_perp * k_hat, axis=1, keepdims=True) * k_hat
        noise = (
            np.sqrt(a_par * dt)[:, None] * par
            + np.sqrt(a_perp * dt)[:, None] * perp
            + np.sqrt(a_iso * dt)[:, None] * g_iso
        )
        drift = -(b * alpha[MOMENT_TR])[:, None] * k
        r = ens.r + HBAR / particle.mass_S * dt * k
        return Ensemble(
            k=k + drift * dt + noise, r=r, t=ens.t + dt, seed=ens.seed, scheme=SCHEME_FULL_A2
        )

    @staticmethod
    def ensemble_statistics(
        K: np.ndarray,
        R: np.ndarray,
        direction: Optional[np.ndarray] = None,
        mass_S: float = 1.0,
        t: float = 0.0,
    ) -> tuple[MomentState, dict[str, np.ndarray]]:
        """
        Moment estimates with standard errors.

        Variances are resolved along `direction` (default: along <k>) and
        their standard errors use the per-walker squared deviations.

        Returns:
            (MomentState, standard errors keyed like MomentState fields)
        """
        n, d = K.shape
        root_n = math.sqrt(n)
        mean_k = K.mean(axis=0)
        e = _unit(mean_k if direction is None else np.asarray(direction, dtype=float))
        delta = K - mean_k
        sq = np.sum(K * K, axis=1)
        par = delta @ e
        dev2 = np.sum(delta * delta, axis=1)
        par2 = par * par
        perp2 = (dev2 - par2) / (d - 1)
        traveled = R @ e
        state = MomentState(
            t=t,
            mean_k=mean_k,
            mean_k2=float(sq.mean()),
            Kpar2=float(par2.mean()),
            Kperp2=float(perp2.mean()),
            K2=float(dev2.mean()),
            traveled=float(traveled.mean()),
            mean_energy=float(KineticsService.mean_energy(mass_S, sq.mean())),
        )
        stderr = {
            "mean_k": K.std(axis=0, ddof=1) / root_n,
            "mean_k2": np.asarray(sq.std(ddof=1) / root_n),
            "Kpar2": np.asarray(par2.std(ddof=1) / root_n),
            "Kperp2": np.asarray(perp2.std(ddof=1) / root_n),
            "K2": np.asarray(dev2.std(ddof=1) / root_n),
            "traveled": np.asarray(traveled.std(ddof=1) / root_n),
        }
        return state, stderr

    @staticmethod
    def _run_partition(
        ens: Ensemble,
        checkpoints: np.ndarray,
        dt: float,
        rng: np.random.Generator,
        scheme: str,
        coefficients: TransportCoefficients,
        particle: ParticleSpec,
        bath: BathSpec,
        model: Optional[BaseCrossSectionModel],
        rates: Optional[RateTable],
    ) -> tuple[list[tuple[np.ndarray, np.ndarray]], Ensemble]:
        """March one partition through all checkpoints, landing on each exactly."""
        snapshots = []
        for target in checkpoints:
            while ens.t < target * (1.0 - 1e-12):
                h = min(dt, target - ens.t)
                if scheme == SCHEME_ANALYTIC:
                    spec = SdeStepSpec(
                        dt=h,
                        eta=coefficients.eta,
                        zeta=coefficients.zeta,
                        gamma=coefficients.gamma,
                        xi=coefficients.xi,
                        mass_S=particle.mass_S,
                    )
                    ens = SdeService.step(ens, spec, rng)
                else:
                    ens = SdeService.full_a2_step(
                        ens, model, particle, bath, h, rng, rates=rates
                    )
            ens = ens.model_copy(update={"t": float(target)})
            snapshots.append((ens.k.copy(), ens.r.copy()))
        return snapshots, ens

    @staticmethod
    def simulate(
        particle: ParticleSpec,
        bath: BathSpec,
        model: Optional[BaseCrossSectionModel],
        eta_t: np.ndarray,
        walkers: int,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        scheme: str = SCHEME_ANALYTIC,
        threads: int = 1,
        coefficients: Optional[TransportCoefficients] = None,
        rates: Optional[RateTable] = None,
    ) -> tuple[MomentTrajectory, Ensemble]:
        """
        Integrate an ensemble started in the momentum eigenstate k0.

        Walkers are split into `threads` fixed partitions, each with its own
        stream spawned from `seed`; snapshots are concatenated in partition
        order, so results depend only on seed and partition count.

        Args:
            particle: Projectile
            bath: Gas
            model: Cross-section model (may be None when coefficients and,
                for full_a2, rates are given)
            eta_t: Checkpoints in units of 1/eta
            walkers: Ensemble size
            dt: Step in seconds (default: half the accuracy bound)
            seed: Master seed
            scheme: analytic or full_a2
            threads: Partition and worker count
            coefficients: Calibrated transport coefficients at k0
            rates: Rate table for full_a2

        Returns:
            (trajectory with standard errors, final ensemble)
        """
        if scheme not in (SCHEME_ANALYTIC, SCHEME_FULL_A2):
            raise ParameterError(f"Unknown ensemble scheme: {scheme}")
        if threads < 1:
            raise ParameterError("Thread count must be positive")
        if model is None and (
            coefficients is None or (scheme == SCHEME_FULL_A2 and rates is None)
        ):
            raise ParameterError("A cross-section model is needed to derive rates")
        if coefficients is None:
            coefficients = BathService.transport_coefficients(model, particle, bath)
        if not coefficients.eta > 0:
            raise ParameterError("Energy friction vanishes; no time scale 1/eta")
        eta_t = np.sort(np.asarray(eta_t, dtype=float))
        if np.any(eta_t <= 0):
            raise DomainError("Checkpoints must be positive")
        checkpoints = eta_t / coefficients.eta
        if dt is None:
            dt = SdeService.max_step(coefficients, particle.k0_norm**2)
        km_violated = False
        if scheme == SCHEME_FULL_A2:
            if rates is None:
                rates = SdeService.rate_table(model, particle, bath)
            if model is not None:
                km_violated = not BathService.regime_diagnostics(
                    model, particle, bath
                ).kramers_moyal_ok
        start = SdeService.initial_ensemble(particle, walkers, seed)
        streams = split_streams(seed, threads)
        parts = np.array_split(np.arange(walkers), threads)
        logger.info(
            "Ensemble run: %d walkers, %d partitions, dt = %.3e s, scheme %s",
            walkers,
            threads,
            dt,
            scheme,
        )

        def work(index: int):
            idx = parts[index]
            ens = Ensemble(k=start.k[idx], r=start.r[idx], seed=seed, scheme=scheme)
            return SdeService._run_partition(
                ens,
                checkpoints,
                dt,
                streams[index],
                scheme,
                coefficients,
                particle,
                bath,
                model,
                rates,
            )

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(threads)))

        direction = _unit(particle.k0)
        columns: dict[str, list] = {key: [] for key in _STAT_KEYS}
        errors: dict[str, list] = {key: [] for key in _STAT_KEYS}
        for i, t in enumerate(checkpoints):
            K = np.concatenate([snaps[i][0] for snaps, _ in results])
            R = np.concatenate([snaps[i][1] for snaps, _ in results])
            state, stderr = SdeService.ensemble_statistics(
                K, R, direction, particle.mass_S, float(t)
            )
            for key in _STAT_KEYS:
                columns[key].append(getattr(state, key))
                errors[key].append(stderr[key])
        final = Ensemble(
            k=np.concatenate([ens.k for _, ens in results]),
            r=np.concatenate([ens.r for _, ens in results]),
            t=float(checkpoints[-1]),
            seed=seed,
            scheme=scheme,
        )
        mean_k2 = np.asarray(columns["mean_k2"])
        trajectory = MomentTrajectory(
            d=particle.d,
            t=checkpoints,
            eta_t=eta_t,
            mean_energy=KineticsService.mean_energy(particle.mass_S, mean_k2),
            stderr={key: np.asarray(value) for key, value in errors.items()},
            km_regime_violated=km_violated,
            **{key: np.asarray(value) for key, value in columns.items()},
        )
        return trajectory, final

    @staticmethod
    def run(
        particle: ParticleSpec,
        bath: BathSpec,
        model: Optional[BaseCrossSectionModel],
        eta_t: np.ndarray,
        walkers: int,
        dt: Optional[float] = None,
        seed: Optional[int] = None,
        **kwargs,
    ) -> MomentTrajectory:
        """Moment trajectory of an ensemble run (see simulate)."""
        trajectory, _ = SdeService.simulate(
            particle, bath, model, eta_t, walkers, dt, seed, **kwargs
        )
        return trajectory

    @staticmethod
    def equilibrium_check(
        ens: Ensemble, particle: ParticleSpec, bath: BathSpec
    ) -> EquilibriumReport:
        """
        Compare a long-run ensemble with the Maxwell-Boltzmann momentum law.

        Args:
            ens: Ensemble after eta t >= 10
            particle: Projectile (sets the mass and the reference axis k0)
            bath: Thermal gas

        Returns:
            EquilibriumReport with per-axis variance ratios, the mean z-score,
            KS distances to the normal law and Kpar2/Kperp2

        Raises:
            DomainError: If the bath is frozen
        """
        if bath.is_frozen:
            raise DomainError("Equilibrium check needs a thermal bath")
        K = ens.k
        n = ens.size
        expected = particle.mass_S / bath.mass_B * bath.thermal_wavenumber_sq
        centred = K - K.mean(axis=0)
        variance = K.var(axis=0, ddof=1)
        variance_se = (centred**2).std(axis=0, ddof=1) / math.sqrt(n)
        mean_z = float(
            np.linalg.norm(K.mean(axis=0)) / math.sqrt(float(variance.mean()) / n)
        )
        ks = np.array(
            [
                stats.kstest(K[:, i] / math.sqrt(expected), "norm").statistic
                for i in range(ens.d)
            ]
        )
        state, _ = SdeService.ensemble_statistics(K, ens.r, _unit(particle.k0))
        return EquilibriumReport(
            axis_variance=variance,
            axis_variance_stderr=variance_se,
            expected_variance=expected,
            variance_ratio=variance / expected,
            mean_z_score=mean_z,
            ks_distance=ks,
            isotropy_ratio=state.Kpar2 / state.Kperp2,
        )

    @staticmethod
    def coherence_from_ensemble(
        K: np.ndarray,
        direction: Optional[np.ndarray] = None,
        l_thermal: Optional[float] = None,
    ) -> CoherenceState:
        """Coherence lengths from the ensemble momentum covariance."""
        state, _ = SdeService.ensemble_statistics(K, np.zeros_like(K), direction)
        return KineticsService.coherence_lengths(
            state.Kpar2, state.Kperp2, l_thermal, state.mean_k2
        )

    @staticmethod
    def rates_with_quadratic_split(
        alpha_tr: float, qpar_fraction: float
    ) -> RateTable:
        """
        Constant rates with alpha_qpar = 2 f alpha_tr and alpha_qperp = 2 (1-f) alpha_tr.

        Keeps (alpha_qpar + alpha_qperp)/2 = alpha_tr, so f = 0 is the
        limit in which the full-A2 scheme reduces to the analytic one.
        """
        if not 0.0 <= qpar_fraction <= 1.0:
            raise ParameterError("Longitudinal fraction must lie in [0, 1]")
        values = {
            MOMENT_TR: alpha_tr,
            MOMENT_QPAR: 2.0 * qpar_fraction * alpha_tr,
            MOMENT_QPERP: 2.0 * (1.0 - qpar_fraction) * alpha_tr,
        }
        return RateTable.constant(
            {kind: values.get(kind, alpha_tr) for kind in MOMENT_KINDS}
        )
