"""Test numerical helpers"""

import math

import numpy as np
import pytest

from swiftdeco.utils import finite_difference as fd
from swiftdeco.utils import numeric_utils
from swiftdeco.utils.rng_utils import make_rng, split_streams


class TestNumericUtils:
    """Test cancellation-free exponentials and grids"""

    def test_relative_error(self):
        """Test the max-norm relative error"""
        assert numeric_utils.relative_error([1.0, 2.02], [1.0, 2.0]) == pytest.approx(0.01)
        assert numeric_utils.relative_error(1e-3, 0.0) == pytest.approx(1e-3)

    def test_one_minus_exp_small_argument(self):
        """Test 1 - exp(-x) keeps full precision for tiny x"""
        assert numeric_utils.one_minus_exp(1e-12) == pytest.approx(1e-12, rel=1e-10)

    def test_exp_difference(self):
        """Test exp(-a t) - exp(-b t) for nearly equal rates"""
        value = numeric_utils.exp_difference(1.0, 1.0 + 1e-10, 2.0)
        assert value == pytest.approx(2e-10 * math.exp(-2.0), rel=1e-6)

    def test_exp_ratio_zero_rate(self):
        """Test (1 - exp(-r t)) / r tends to t"""
        np.testing.assert_array_equal(numeric_utils.exp_ratio(0.0, np.array([1.0, 2.0])), [1.0, 2.0])
        assert numeric_utils.exp_ratio(2.0, 1.0) == pytest.approx((1 - math.exp(-2.0)) / 2.0)

    def test_log_grid(self):
        """Test endpoints and log spacing"""
        grid = numeric_utils.log_grid(1e-3, 10.0, 5)
        np.testing.assert_allclose(grid, [1e-3, 1e-2, 1e-1, 1.0, 10.0])


class TestFiniteDifference:
    """Test the fourth-order stencils"""

    @staticmethod
    def errors(n):
        x = np.linspace(-8.0, 8.0, n)
        h = x[1] - x[0]
        f = np.exp(-0.5 * x**2)
        first = np.max(np.abs(fd.first_derivative(f, h, 0) + x * f))
        second = np.max(np.abs(fd.second_derivative(f, h, 0) - (x**2 - 1.0) * f))
        return first, second

    def test_fourth_order_convergence(self):
        """Test halving h reduces the error by about 16"""
        coarse = self.errors(81)
        fine = self.errors(161)
        for c, f in zip(coarse, fine):
            assert c / f > 12.0

    def test_gradient_and_hessian_of_quadratic(self):
        """Test exact derivatives of a quadratic away from the edges"""
        axis = np.linspace(-1.0, 1.0, 21)
        x, y = np.meshgrid(axis, axis, indexing="ij")
        f = x**2 + 3.0 * x * y
        h = axis[1] - axis[0]
        grad = fd.gradient(f, np.array([h, h]))
        hess = fd.hessian(f, np.array([h, h]))
        inner = (slice(4, -4), slice(4, -4))
        np.testing.assert_allclose(grad[0][inner], (2 * x + 3 * y)[inner], atol=1e-12)
        np.testing.assert_allclose(hess[0][0][inner], 2.0, atol=1e-10)
        np.testing.assert_allclose(hess[0][1][inner], 3.0, atol=1e-10)


class TestRngUtils:
    """Test seeded streams"""

    def test_same_seed_same_stream(self):
        """Test a seed reproduces its draws"""
        np.testing.assert_array_equal(make_rng(5).random(4), make_rng(5).random(4))

    def test_split_streams_independent(self):
        """Test spawned streams differ and reproduce"""
        first = [g.random(3) for g in split_streams(9, 3)]
        again = [g.random(3) for g in split_streams(9, 3)]
        for a, b in zip(first, again):
            np.testing.assert_array_equal(a, b)
        assert not np.allclose(first[0], first[1])
