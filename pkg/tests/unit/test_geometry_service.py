"""Test hypersphere geometry and angular quadrature"""

import math

import numpy as np
import pytest
from scipy import special

from swiftdeco.core.exceptions import DomainError, ParameterError
from swiftdeco.services.geometry_service import GeometryService


class TestSurfaceArea:
    """Test unit-sphere surface areas"""

    @pytest.mark.parametrize(
        "d,expected",
        [(1, 2.0), (2, 2.0 * math.pi), (3, 4.0 * math.pi), (4, 2.0 * math.pi**2)],
    )
    def test_known_values(self, d, expected):
        """Test S_d against closed forms"""
        assert GeometryService.surface_area(d) == pytest.approx(expected, rel=1e-14)

    def test_zero_dimension_rejected(self):
        """Test d < 1 raises DomainError"""
        with pytest.raises(DomainError):
            GeometryService.surface_area(0)


class TestPolarQuadrature:
    """Test the Gauss-Jacobi polar rule"""

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_integrates_constant_to_surface_area(self, d):
        """Test the rule reproduces the sphere measure"""
        quad = GeometryService.polar_quadrature(d, 16)
        total = quad.integrate(np.ones(quad.order))
        assert total == pytest.approx(GeometryService.surface_area(d), rel=1e-13)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_second_moment_of_cosine(self, d):
        """Test the sphere average of cos^2 is 1/d"""
        quad = GeometryService.polar_quadrature(d, 8)
        average = quad.integrate(quad.cos_theta**2) / GeometryService.surface_area(d)
        assert average == pytest.approx(1.0 / d, rel=1e-13)

    def test_complements_consistent(self):
        """Test stored complements match cos(theta)"""
        quad = GeometryService.polar_quadrature(3, 32)
        np.testing.assert_allclose(quad.one_minus_cos, 1.0 - quad.cos_theta, atol=1e-15)
        np.testing.assert_allclose(quad.sin_sq, np.sin(quad.theta) ** 2, atol=1e-14)

    def test_cached(self):
        """Test repeated requests return the cached rule"""
        assert GeometryService.polar_quadrature(3, 64) is GeometryService.polar_quadrature(3, 64)

    def test_invalid_arguments(self):
        """Test d < 2 or order < 2 raise ParameterError"""
        with pytest.raises(ParameterError):
            GeometryService.polar_quadrature(1, 16)
        with pytest.raises(ParameterError):
            GeometryService.polar_quadrature(3, 1)


class TestSampling:
    """Test isotropic sampling and rotations"""

    def test_isotropic_batch_unit_norm(self, rng):
        """Test samples lie on the unit sphere"""
        samples = GeometryService.sample_isotropic_batch(4, 1000, rng)
        np.testing.assert_allclose(np.linalg.norm(samples, axis=1), 1.0, rtol=1e-14)

    def test_single_isotropic_sample(self, rng):
        """Test one draw is a unit vector of the requested dimension"""
        omega = GeometryService.sample_isotropic(5, rng)
        assert omega.shape == (5,)
        assert np.linalg.norm(omega) == pytest.approx(1.0, rel=1e-14)

    def test_isotropic_second_moment(self, rng):
        """Test <Omega Omega> = 1/d"""
        samples = GeometryService.sample_isotropic_batch(3, 200_000, rng)
        second = samples.T @ samples / samples.shape[0]
        np.testing.assert_allclose(second, np.eye(3) / 3.0, atol=5e-3)

    def test_rotation_angle_and_norm(self, rng):
        """Test a rotation keeps the norm and turns by the given angle"""
        v = np.array([3.0, -1.0, 2.0])
        rotated = GeometryService.rotate_in_random_tangent_plane(v, 0.3, rng)
        assert np.linalg.norm(rotated) == pytest.approx(np.linalg.norm(v), rel=1e-14)
        cos_angle = rotated @ v / np.dot(v, v)
        assert cos_angle == pytest.approx(math.cos(0.3), rel=1e-12)

    def test_rotation_of_zero_vector(self, rng):
        """Test rotating the zero vector raises DomainError"""
        with pytest.raises(DomainError):
            GeometryService.rotate_in_random_tangent_plane(np.zeros(3), 0.1, rng)

    def test_rotate_by_tangent_ignores_parallel_part(self):
        """Test a kick along k leaves k unchanged"""
        K = np.array([[2.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
        rotated = GeometryService.rotate_by_tangent(K, 0.5 * K)
        np.testing.assert_allclose(rotated, K, atol=1e-15)

    def test_rotate_by_tangent_preserves_norm(self, rng):
        """Test tangent rotations preserve |k|"""
        K = rng.standard_normal((50, 3))
        rotated = GeometryService.rotate_by_tangent(K, 0.2 * rng.standard_normal((50, 3)))
        np.testing.assert_allclose(
            np.linalg.norm(rotated, axis=1), np.linalg.norm(K, axis=1), rtol=1e-13
        )

    def test_orthonormal_complement(self):
        """Test the complement rows are orthonormal and orthogonal to omega0"""
        omega0 = np.array([1.0, 2.0, 2.0]) / 3.0
        basis = GeometryService.orthonormal_complement(omega0)
        assert basis.shape == (2, 3)
        np.testing.assert_allclose(basis @ omega0, 0.0, atol=1e-15)
        np.testing.assert_allclose(basis @ basis.T, np.eye(2), atol=1e-15)


class TestSphereAverage:
    """Test the transverse-sphere average of exp(i z cos)"""

    def test_two_dimensions_is_cosine(self):
        """Test d = 2 reduces to cos z"""
        z = np.linspace(0.0, 20.0, 41)
        np.testing.assert_allclose(GeometryService.sphere_average_factor(2, z), np.cos(z))

    def test_three_dimensions_is_bessel(self):
        """Test d = 3 reduces to J_0(z)"""
        z = np.linspace(0.0, 30.0, 61)
        np.testing.assert_allclose(
            GeometryService.sphere_average_factor(3, z), special.j0(z), atol=1e-14
        )

    def test_complement_small_argument(self):
        """Test 1 - Lambda ~ z^2 / 4 without cancellation in d = 3"""
        z = np.array([1e-8, 1e-5, 1e-3])
        np.testing.assert_allclose(
            GeometryService.sphere_average_complement(3, z), z**2 / 4.0, rtol=1e-6
        )

    @pytest.mark.parametrize("d", [3, 4, 5])
    def test_complement_matches_factor(self, d):
        """Test the complement agrees with 1 - factor away from zero"""
        z = np.linspace(0.05, 10.0, 30)
        np.testing.assert_allclose(
            GeometryService.sphere_average_complement(d, z),
            1.0 - GeometryService.sphere_average_factor(d, z),
            atol=1e-13,
        )
