"""Test bath averages, rates and transport coefficients"""

import logging

import numpy as np
import pytest

from swiftdeco.core.constants import ELECTRON_MASS, HBAR, K_BOLTZMANN
from swiftdeco.core.exceptions import (DomainError, NumericalError,
                                       ParameterError)
from swiftdeco.schemas.bath import BathSpec, ParticleSpec
from swiftdeco.services.bath_service import BathService
from swiftdeco.services.cross_sections import IsotropicCrossSection


class TestBathNodes:
    """Test bath quadrature and sampling"""

    def test_frozen_bath_single_node(self, frozen_electron_bath):
        """Test a frozen bath is the single point k_B = 0"""
        nodes, weights = BathService.bath_nodes(frozen_electron_bath, 3)
        np.testing.assert_array_equal(nodes, np.zeros((1, 3)))
        np.testing.assert_array_equal(weights, [1.0])

    def test_gauss_hermite_normalised(self):
        """Test weights sum to one and reproduce the unit variance"""
        x, w = BathService.gauss_hermite(12)
        assert w.sum() == pytest.approx(1.0, rel=1e-14)
        assert np.dot(w, x**2) == pytest.approx(1.0, rel=1e-13)
        assert np.dot(w, x**4) == pytest.approx(3.0, rel=1e-12)

    def test_quadrature_second_moment(self, electron_bath):
        """Test <k_B k_B> = k_T^2 1 on the product rule"""
        k_T2 = electron_bath.thermal_wavenumber_sq
        average = BathService.bath_average(
            lambda k: k[:, :, None] * k[:, None, :], electron_bath, 3, scheme="quadrature"
        )
        np.testing.assert_allclose(average, k_T2 * np.eye(3), rtol=1e-12, atol=1e-12 * k_T2)

    def test_monte_carlo_second_moment(self, electron_bath, rng):
        """Test the sampled second moment is within a few percent"""
        k_T2 = electron_bath.thermal_wavenumber_sq
        average = BathService.bath_average(
            lambda k: np.sum(k * k, axis=1),
            electron_bath,
            3,
            scheme="monte_carlo",
            samples=100_000,
            rng=rng,
        )
        assert average == pytest.approx(3.0 * k_T2, rel=0.02)

    def test_unknown_scheme(self, electron_bath):
        """Test an unknown scheme raises ParameterError"""
        with pytest.raises(ParameterError):
            BathService.bath_nodes(electron_bath, 3, scheme="sobol")

    def test_non_finite_sample(self, electron_bath):
        """Test a NaN sample raises NumericalError naming the node"""
        with pytest.raises(NumericalError) as exc_info:
            BathService.bath_average(
                lambda k: np.where(k[:, 0] > 0, np.nan, 1.0), electron_bath, 2
            )
        assert exc_info.value.sample is not None


class TestCollisionalRates:
    """Test bath-averaged collision rates"""

    def test_frozen_bath_rate(self, heavy_particle_d3, frozen_electron_bath):
        """Test alpha = n sigma0 v0 for isotropic scattering on a resting gas"""
        model = IsotropicCrossSection(1e-19, 3)
        rates = BathService.collisional_rates(model, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0)
        expected = 1e25 * 1e-19 * heavy_particle_d3.speed
        assert rates["total"] == pytest.approx(expected, rel=1e-12)
        assert rates["tr"] == pytest.approx(expected, rel=1e-12)
        assert 0.5 * (rates["qpar"] + rates["qperp"]) == pytest.approx(rates["tr"], rel=1e-12)

    def test_single_rate(self, heavy_particle_d3, electron_bath, isotropic_model_d3):
        """Test collisional_rate picks one kind"""
        rates = BathService.collisional_rates(
            isotropic_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0
        )
        rate = BathService.collisional_rate(
            "qperp", isotropic_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0
        )
        assert rate == rates["qperp"]

    def test_unknown_kind(self, heavy_particle_d3, electron_bath, isotropic_model_d3):
        """Test an unknown moment kind raises ParameterError"""
        with pytest.raises(ParameterError):
            BathService.collisional_rate(
                "quartic", isotropic_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0
            )

    def test_rate_with_error(self, heavy_particle_d3, electron_bath, isotropic_model_d3, rng):
        """Test the Monte-Carlo rate agrees with quadrature within its error"""
        exact = BathService.collisional_rate(
            "tr", isotropic_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0
        )
        value, stderr = BathService.collisional_rate_with_error(
            "tr", isotropic_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0, 20_000, rng
        )
        assert stderr > 0
        assert abs(value - exact) < 5.0 * stderr


class TestKramersMoyal:
    """Test drift and diffusion moments"""

    def test_factorised_equals_exact_on_frozen_bath(self, heavy_particle_d3, frozen_electron_bath, forward_model_d3):
        """Test factorised and exact moments coincide without bath motion"""
        exact = BathService.exact_km_moments(
            forward_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0
        )
        a1 = BathService.km_drift(forward_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0)
        a2 = BathService.km_diffusion(forward_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0)
        np.testing.assert_allclose(a1, exact.A1, rtol=1e-12, atol=1e-12 * np.abs(exact.A1).max())
        np.testing.assert_allclose(a2, exact.A2, rtol=1e-12, atol=1e-12 * np.abs(exact.A2).max())

    def test_factorization_discrepancy_frozen(self, heavy_particle_d3, frozen_electron_bath, isotropic_model_d3):
        """Test the discrepancy report is zero on a frozen bath"""
        report = BathService.factorization_discrepancy(
            isotropic_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0
        )
        assert report.drift_discrepancy < 1e-12
        assert report.diffusion_discrepancy < 1e-12

    def test_drift_opposes_motion(self, heavy_particle_d3, electron_bath, forward_model_d3):
        """Test A1 points against k_S"""
        a1 = BathService.km_drift(forward_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0)
        assert a1[0] < 0
        np.testing.assert_allclose(a1[1:], 0.0, atol=1e-12 * abs(a1[0]))

    def test_diffusion_symmetric_positive(self, heavy_particle_d3, electron_bath, forward_model_d3):
        """Test A2 is symmetric positive definite in a thermal bath"""
        a2 = BathService.km_diffusion(forward_model_d3, heavy_particle_d3, electron_bath, heavy_particle_d3.k0)
        np.testing.assert_allclose(a2, a2.T)
        assert np.all(np.linalg.eigvalsh(a2) > 0)

    def test_zero_momentum_frozen(self, heavy_particle_d3, frozen_electron_bath, isotropic_model_d3):
        """Test a particle at rest on a frozen bath has no drift or diffusion"""
        zero = np.zeros(3)
        np.testing.assert_array_equal(
            BathService.km_drift(isotropic_model_d3, heavy_particle_d3, frozen_electron_bath, zero), zero
        )
        np.testing.assert_array_equal(
            BathService.km_diffusion(isotropic_model_d3, heavy_particle_d3, frozen_electron_bath, zero),
            np.zeros((3, 3)),
        )

    def test_monte_carlo_scattering_moments(self, heavy_particle_d3, frozen_electron_bath, isotropic_model_d3, rng):
        """Test sampled collisions reproduce the drift within standard errors"""
        moments = BathService.scattering_moments_monte_carlo(
            isotropic_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0, 20_000, rng
        )
        expected = BathService.km_drift(
            isotropic_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0
        )
        assert np.all(np.abs(moments.A1 - expected) <= 5.0 * moments.A1_stderr + 1e-12 * abs(expected[0]))

    def test_angular_tensor(self, rng):
        """Test <Omega_perp Omega_perp> = (1 - Omega0 Omega0)/(d-1)"""
        assert BathService.angular_tensor_check(3, samples=200_000, rng=rng) < 0.01

    def test_relative_momentum_dyadic(self, heavy_particle_d3, electron_bath):
        """Test <k k>_B against its averaged definition"""
        pair = BathService.kinematics(heavy_particle_d3, electron_bath)
        k_S = heavy_particle_d3.k0
        average = BathService.bath_average(
            lambda k_B: np.einsum("ni,nj->nij", pair.relative_k(k_S, k_B), pair.relative_k(k_S, k_B)),
            electron_bath,
            3,
        )
        dyadic = BathService.relative_momentum_dyadic(heavy_particle_d3, electron_bath, k_S)
        np.testing.assert_allclose(average, dyadic, rtol=1e-10, atol=1e-10 * np.abs(dyadic).max())


class TestTransportCoefficients:
    """Test eta, zeta, gamma and xi"""

    def test_zeta_identity(self, heavy_particle_d3, electron_bath):
        """Test zeta = eta + (d-1) gamma"""
        c = BathService.transport_from_alpha_tr(1e7, heavy_particle_d3, electron_bath)
        assert c.zeta == pytest.approx(c.eta + 2.0 * c.gamma, rel=1e-14)

    def test_fluctuation_dissipation(self, heavy_particle_d3, electron_bath):
        """Test xi / eta = m_S k_B T / hbar^2"""
        c = BathService.transport_from_alpha_tr(1e7, heavy_particle_d3, electron_bath)
        expected = heavy_particle_d3.mass_S * K_BOLTZMANN * 300.0 / HBAR**2
        assert c.thermal_variance == pytest.approx(expected, rel=1e-12)

    def test_frozen_bath_has_no_xi(self, heavy_particle_d3, frozen_electron_bath):
        """Test xi vanishes without bath motion"""
        c = BathService.transport_from_alpha_tr(1e7, heavy_particle_d3, frozen_electron_bath)
        assert c.xi == 0.0
        assert c.eta > 0

    def test_negative_rate_rejected(self, heavy_particle_d3, electron_bath):
        """Test alpha_tr < 0 raises ParameterError"""
        with pytest.raises(ParameterError):
            BathService.transport_from_alpha_tr(-1.0, heavy_particle_d3, electron_bath)

    def test_from_model(self, heavy_particle_d3, frozen_electron_bath, isotropic_model_d3):
        """Test coefficients use alpha_tr at k0"""
        c = BathService.transport_coefficients(isotropic_model_d3, heavy_particle_d3, frozen_electron_bath)
        assert c.alpha_tr == pytest.approx(1e25 * 1e-19 * heavy_particle_d3.speed, rel=1e-12)

    def test_range_calibration(self, heavy_particle_d3, electron_bath):
        """Test alpha_tr from a range reproduces v0 / zeta"""
        alpha_tr = BathService.alpha_tr_from_range(0.035, heavy_particle_d3, electron_bath)
        c = BathService.transport_from_alpha_tr(alpha_tr, heavy_particle_d3, electron_bath)
        assert heavy_particle_d3.speed / c.zeta == pytest.approx(0.035, rel=1e-12)

    def test_range_must_be_positive(self, heavy_particle_d3, electron_bath):
        """Test a zero range raises DomainError"""
        with pytest.raises(DomainError):
            BathService.alpha_tr_from_range(0.0, heavy_particle_d3, electron_bath)

    def test_eta_inversion(self, heavy_particle_d3, electron_bath):
        """Test alpha_tr_from_eta inverts eta"""
        alpha_tr = BathService.alpha_tr_from_eta(123.0, heavy_particle_d3, electron_bath)
        c = BathService.transport_from_alpha_tr(alpha_tr, heavy_particle_d3, electron_bath)
        assert c.eta == pytest.approx(123.0, rel=1e-13)

    def test_eta_from_stopping(self):
        """Test eta = sqrt(<v^2>) S / (2 <E>)"""
        assert BathService.eta_from_stopping(2.0, 4.0, 3.0) == pytest.approx(0.75)
        with pytest.raises(DomainError):
            BathService.eta_from_stopping(-1.0, 4.0, 3.0)
        with pytest.raises(DomainError):
            BathService.eta_from_stopping(1.0, 0.0, 3.0)

    def test_energy_loss_rate_on_frozen_bath(self, heavy_particle_d3, frozen_electron_bath, isotropic_model_d3):
        """Test dE/dt = -2 eta E for a projectile on a resting gas"""
        rate = BathService.energy_loss_rate(
            isotropic_model_d3, heavy_particle_d3, frozen_electron_bath, heavy_particle_d3.k0
        )
        c = BathService.transport_coefficients(isotropic_model_d3, heavy_particle_d3, frozen_electron_bath)
        energy = HBAR**2 * heavy_particle_d3.k0_norm**2 / (2.0 * heavy_particle_d3.mass_S)
        assert rate == pytest.approx(-2.0 * c.eta * energy, rel=1e-10)

    def test_rate_table_shape(self, heavy_particle_d3, electron_bath, forward_model_d3):
        """Test rates are tabulated per wavenumber and kind"""
        table = BathService.rate_table(
            forward_model_d3, heavy_particle_d3, electron_bath, np.array([0.5e11, 1e11])
        )
        assert set(table) == {"total", "tr", "qpar", "qperp"}
        assert table["tr"].shape == (2,)
        assert table["total"][1] > table["total"][0]


class TestRegimeDiagnostics:
    """Test weak-scattering and Kramers-Moyal checks"""

    def test_heavy_particle_valid(self, heavy_particle_d3, electron_bath, isotropic_model_d3):
        """Test a heavy particle passes both conditions"""
        diagnostics = BathService.regime_diagnostics(isotropic_model_d3, heavy_particle_d3, electron_bath)
        assert diagnostics.weak_scattering_ok
        assert diagnostics.kramers_moyal_ok
        assert diagnostics.transfer_ratio == pytest.approx(1.0, rel=1e-12)

    def test_light_particle_isotropic_warns(self, electron_bath, isotropic_model_d3, caplog):
        """Test isotropic scattering of a light particle violates the KM regime"""
        particle = ParticleSpec(mass_S=2.0 * ELECTRON_MASS, k0=[1e9, 0.0, 0.0])
        with caplog.at_level(logging.WARNING):
            diagnostics = BathService.regime_diagnostics(isotropic_model_d3, particle, electron_bath)
        assert not diagnostics.kramers_moyal_ok
        assert "Kramers-Moyal" in caplog.text

    def test_dense_gas_violates_weak_scattering(self, heavy_particle_d3):
        """Test k0 l_scat <= 10 is flagged"""
        bath = BathSpec(mass_B=ELECTRON_MASS, temperature=300.0, number_density=1e30)
        model = IsotropicCrossSection(1e-15, 3)
        diagnostics = BathService.regime_diagnostics(model, heavy_particle_d3, bath)
        assert not diagnostics.weak_scattering_ok
        assert diagnostics.k_l_scat == pytest.approx(1e11 / (1e30 * 1e-15), rel=1e-10)
