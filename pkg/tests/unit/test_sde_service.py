"""Test the stochastic ensemble solver"""

import math

import numpy as np
import pytest

from swiftdeco.core.constants import HBAR, MOMENT_QPAR, MOMENT_QPERP, MOMENT_TR
from swiftdeco.core.exceptions import (DomainError, ParameterError,
                                       StepRejectedError)
from swiftdeco.schemas.bath import TransportCoefficients
from swiftdeco.schemas.sde import Ensemble, SdeStepSpec
from swiftdeco.services.kinetics_service import KineticsService
from swiftdeco.services.scenario_service import ScenarioService
from swiftdeco.services.sde_service import SdeService


def max_z(trajectory, reference, key):
    values = getattr(trajectory, key)
    return float(np.max(np.abs(values - getattr(reference, key)) / trajectory.stderr[key]))


class TestStep:
    """Test single ensemble steps"""

    def test_initial_ensemble(self, heavy_particle_d3):
        """Test walkers start at k0 and the origin"""
        ens = SdeService.initial_ensemble(heavy_particle_d3, 10, seed=1)
        assert ens.size == 10
        assert ens.d == 3
        np.testing.assert_array_equal(ens.k, np.tile(heavy_particle_d3.k0, (10, 1)))
        np.testing.assert_array_equal(ens.r, 0.0)

    def test_empty_ensemble_rejected(self, heavy_particle_d3):
        """Test zero walkers raise ParameterError"""
        with pytest.raises(ParameterError):
            SdeService.initial_ensemble(heavy_particle_d3, 0)

    def test_step_rejected(self, rng):
        """Test dt beyond the accuracy bound raises StepRejectedError"""
        ens = Ensemble(k=np.ones((4, 3)), r=np.zeros((4, 3)))
        spec = SdeStepSpec(dt=1.0, eta=1.0, zeta=1.0, gamma=0.0, xi=0.0, mass_S=1.0)
        with pytest.raises(StepRejectedError):
            SdeService.step(ens, spec, rng)

    def test_full_a2_step_rejected(self, fig3_scenario, rng):
        """Test a full-A2 step beyond the accuracy bound raises StepRejectedError"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        particle, bath = fig3_scenario.particle, fig3_scenario.bath
        rates = SdeService.rates_with_quadratic_split(coefficients.alpha_tr, 0.0)
        ens = SdeService.initial_ensemble(particle, 8, seed=1)
        with pytest.raises(StepRejectedError):
            SdeService.full_a2_step(
                ens, None, particle, bath, 3.0 / coefficients.zeta, rng, rates=rates
            )

    def test_full_a2_step_within_bound(self, fig3_scenario, rng):
        """Test a full-A2 step at the default size is accepted"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        particle, bath = fig3_scenario.particle, fig3_scenario.bath
        rates = SdeService.rates_with_quadratic_split(coefficients.alpha_tr, 0.0)
        ens = SdeService.initial_ensemble(particle, 8, seed=1)
        dt = SdeService.max_step(coefficients, particle.k0_norm**2)
        out = SdeService.full_a2_step(ens, None, particle, bath, dt, rng, rates=rates)
        assert out.t == pytest.approx(dt)
        assert np.all(np.isfinite(out.k))

    def test_full_a2_simulate_rejects_large_dt(self, fig3_scenario):
        """Test a user step too large for the full-A2 scheme fails the run"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        rates = SdeService.rates_with_quadratic_split(coefficients.alpha_tr, 0.0)
        with pytest.raises(StepRejectedError):
            SdeService.simulate(
                fig3_scenario.particle,
                fig3_scenario.bath,
                None,
                [1.0],
                walkers=8,
                dt=3.0 / coefficients.zeta,
                scheme="full_a2",
                coefficients=coefficients,
                rates=rates,
            )

    def test_deterministic_friction(self, rng):
        """Test without noise k decays exactly and r streams with the mean velocity"""
        k0 = np.array([[2.0, 0.0, 0.0], [0.0, -1.0, 0.0]])
        ens = Ensemble(k=k0, r=np.zeros((2, 3)))
        spec = SdeStepSpec(dt=0.005, eta=1.0, zeta=1.0, gamma=0.0, xi=0.0, mass_S=1.0)
        out = SdeService.step(ens, spec, rng)
        np.testing.assert_allclose(out.k, k0 * math.exp(-0.005), rtol=1e-14)
        np.testing.assert_allclose(out.r, HBAR * (-math.expm1(-0.005)) * k0, rtol=1e-12)
        assert out.t == pytest.approx(0.005)

    def test_rotation_preserves_norm(self, rng):
        """Test direction diffusion alone keeps every |k|"""
        k0 = rng.standard_normal((200, 3))
        ens = Ensemble(k=k0, r=np.zeros((200, 3)))
        spec = SdeStepSpec(dt=1.0, eta=0.0, zeta=0.002, gamma=0.001, xi=0.0, mass_S=1.0)
        out = SdeService.step(ens, spec, rng)
        np.testing.assert_allclose(
            np.linalg.norm(out.k, axis=1), np.linalg.norm(k0, axis=1), rtol=1e-12
        )
        assert not np.allclose(out.k, k0)

    def test_max_step_needs_a_rate(self):
        """Test vanishing coefficients raise ParameterError"""
        coefficients = TransportCoefficients(d=3, alpha_tr=0.0, eta=0.0, zeta=0.0, gamma=0.0, xi=0.0)
        with pytest.raises(ParameterError):
            SdeService.max_step(coefficients, 1.0)

    def test_max_step_is_half_the_bound(self):
        """Test the default step uses half the configured safety factor"""
        coefficients = TransportCoefficients(d=3, alpha_tr=1.0, eta=1.0, zeta=2.0, gamma=0.5, xi=0.0)
        assert SdeService.max_step(coefficients, 1.0) == pytest.approx(0.5 * 0.01 / 2.0)


class TestEnsembleStatistics:
    """Test moment estimates from walker arrays"""

    def test_simple_ensemble(self):
        """Test the variance split of a four-walker ensemble"""
        K = np.array([[1.0, 0.0], [3.0, 0.0], [2.0, 1.0], [2.0, -1.0]])
        state, stderr = SdeService.ensemble_statistics(K, np.zeros_like(K), np.array([1.0, 0.0]))
        np.testing.assert_allclose(state.mean_k, [2.0, 0.0])
        assert state.mean_k2 == pytest.approx(5.0)
        assert state.Kpar2 == pytest.approx(0.5)
        assert state.Kperp2 == pytest.approx(0.5)
        assert state.K2 == pytest.approx(1.0)
        assert state.traveled == 0.0
        assert float(stderr["K2"]) == 0.0

    def test_coherence_from_ensemble(self):
        """Test lengths follow from the ensemble variances"""
        K = np.array([[1.0, 0.0], [3.0, 0.0], [2.0, 1.0], [2.0, -1.0]])
        state = SdeService.coherence_from_ensemble(K, np.array([1.0, 0.0]), l_thermal=1.0)
        assert state.l_par == pytest.approx(0.5 / math.sqrt(0.5))
        assert state.ratio == pytest.approx(1.0)
        assert state.angular_variance == pytest.approx(0.1)


class TestSimulate:
    """Test ensemble runs against the moment equations"""

    def test_reproducible(self, fig3_scenario):
        """Test equal seeds and partition counts give identical ensembles"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        kwargs = dict(walkers=200, seed=11, threads=2, coefficients=coefficients)
        particle, bath = fig3_scenario.particle, fig3_scenario.bath
        _, first = SdeService.simulate(particle, bath, None, [0.05], **kwargs)
        _, second = SdeService.simulate(particle, bath, None, [0.05], **kwargs)
        np.testing.assert_array_equal(first.k, second.k)
        np.testing.assert_array_equal(first.r, second.r)
        assert first.size == 200

    def test_matches_fokker_planck_moments(self, fig3_scenario):
        """Test Kpar2, Kperp2 and <k^2> lie within 5 standard errors of the exact moments"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        particle, bath = fig3_scenario.particle, fig3_scenario.bath
        eta_t = np.array([0.1, 1.0])
        trajectory, _ = SdeService.simulate(
            particle, bath, None, eta_t, walkers=4000, seed=5, coefficients=coefficients
        )
        t = eta_t / coefficients.eta
        exact = KineticsService.fokker_planck_variance_split(
            particle.k0_norm**2,
            coefficients.eta,
            coefficients.zeta,
            coefficients.gamma,
            coefficients.xi,
            3,
            t,
        )
        assert max_z(trajectory, exact, "Kpar2") < 5.0
        assert max_z(trajectory, exact, "Kperp2") < 5.0
        mean_k2 = KineticsService.mean_square_momentum(
            particle.k0_norm**2, coefficients.eta, coefficients.xi, 3, t
        )
        z = np.abs(trajectory.mean_k2 - mean_k2) / trajectory.stderr["mean_k2"]
        assert np.all(z < 5.0)

    def test_full_a2_reduces_to_analytic(self, fig3_scenario):
        """Test the full-A2 scheme without longitudinal diffusion matches the analytic one"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        particle, bath = fig3_scenario.particle, fig3_scenario.bath
        rates = SdeService.rates_with_quadratic_split(coefficients.alpha_tr, 0.0)
        kwargs = dict(walkers=4000, coefficients=coefficients)
        analytic, _ = SdeService.simulate(particle, bath, None, [0.5], seed=1, **kwargs)
        full, _ = SdeService.simulate(
            particle, bath, None, [0.5], seed=2, scheme="full_a2", rates=rates, **kwargs
        )
        for key in ("Kpar2", "Kperp2"):
            a, b = getattr(analytic, key), getattr(full, key)
            spread = np.hypot(analytic.stderr[key], full.stderr[key])
            assert np.all(np.abs(a - b) < 5.0 * spread)
        # Euler friction is biased at order zeta * dt
        np.testing.assert_allclose(full.mean_k2, analytic.mean_k2, rtol=1e-2)

    def test_checkpoints_must_be_positive(self, fig3_scenario):
        """Test eta t <= 0 raises DomainError"""
        coefficients = ScenarioService.coefficients(fig3_scenario)
        with pytest.raises(DomainError):
            SdeService.simulate(
                fig3_scenario.particle,
                fig3_scenario.bath,
                None,
                [0.0, 1.0],
                walkers=10,
                coefficients=coefficients,
            )

    def test_unknown_scheme(self, fig3_scenario):
        """Test an unknown scheme raises ParameterError"""
        with pytest.raises(ParameterError):
            SdeService.simulate(
                fig3_scenario.particle, fig3_scenario.bath, None, [1.0], walkers=10, scheme="milstein"
            )

    def test_model_required_without_coefficients(self, fig3_scenario):
        """Test a run without model or coefficients raises ParameterError"""
        with pytest.raises(ParameterError):
            SdeService.simulate(fig3_scenario.particle, fig3_scenario.bath, None, [1.0], walkers=10)


class TestEquilibrium:
    """Test the Maxwell-Boltzmann comparison"""

    def test_maxwellian_ensemble_passes(self, heavy_particle_d3, electron_bath, rng):
        """Test a sampled Maxwellian has unit variance ratios and small KS distance"""
        expected = heavy_particle_d3.mass_S / electron_bath.mass_B * electron_bath.thermal_wavenumber_sq
        K = math.sqrt(expected) * rng.standard_normal((50_000, 3))
        ens = Ensemble(k=K, r=np.zeros_like(K))
        report = SdeService.equilibrium_check(ens, heavy_particle_d3, electron_bath)
        assert report.expected_variance == pytest.approx(expected)
        np.testing.assert_allclose(report.variance_ratio, 1.0, atol=0.02)
        assert np.all(report.ks_distance < 0.01)
        assert report.isotropy_ratio == pytest.approx(1.0, abs=0.03)

    def test_frozen_bath_rejected(self, heavy_particle_d3, frozen_electron_bath):
        """Test a frozen bath raises DomainError"""
        ens = Ensemble(k=np.ones((5, 3)), r=np.zeros((5, 3)))
        with pytest.raises(DomainError):
            SdeService.equilibrium_check(ens, heavy_particle_d3, frozen_electron_bath)


class TestRateTables:
    """Test rate tables for the full-A2 scheme"""

    def test_quadratic_split(self):
        """Test alpha_qpar + alpha_qperp = 2 alpha_tr"""
        table = SdeService.rates_with_quadratic_split(3.0, 0.25)
        rates = table.at(np.array([0.0, 1e12]))
        np.testing.assert_allclose(rates[MOMENT_QPAR], 1.5)
        np.testing.assert_allclose(rates[MOMENT_QPERP], 4.5)
        np.testing.assert_allclose(rates[MOMENT_TR], 3.0)

    def test_quadratic_split_range(self):
        """Test a fraction outside [0, 1] raises ParameterError"""
        with pytest.raises(ParameterError):
            SdeService.rates_with_quadratic_split(1.0, 1.5)

    def test_constant_table(self, isotropic_model_d3, heavy_particle_d3, electron_bath):
        """Test reevaluate=False freezes rates at k0"""
        table = SdeService.rate_table(
            isotropic_model_d3, heavy_particle_d3, electron_bath, reevaluate=False
        )
        assert table.k_grid.size == 1

    def test_tabulated_over_ensemble_range(self, isotropic_model_d3, heavy_particle_d3, electron_bath):
        """Test the table starts at k = 0 and extends beyond |k0|"""
        table = SdeService.rate_table(isotropic_model_d3, heavy_particle_d3, electron_bath)
        assert table.k_grid[0] == 0.0
        assert table.k_grid[-1] > heavy_particle_d3.k0_norm
        assert np.all(table.rates[MOMENT_TR] > 0)
