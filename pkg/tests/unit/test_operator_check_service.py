"""Test the momentum-grid operator identities"""

import numpy as np
import pytest

from swiftdeco.core.exceptions import GridError, ParameterError
from swiftdeco.schemas.opcheck import MomentumGrid
from swiftdeco.services.operator_check_service import (MIN_CONVERGENCE_RATIO,
                                                       PROBE_FIELDS,
                                                       OperatorCheckService)


def probe(name):
    return next(p for p in PROBE_FIELDS if p.name == name)


class TestHarmonicEigenvalue:
    """Test l (l + d - 2)"""

    @pytest.mark.parametrize(
        "degree,d,expected", [(0, 3, 0.0), (1, 3, 2.0), (2, 3, 6.0), (1, 2, 1.0), (2, 2, 4.0), (2, 4, 8.0)]
    )
    def test_values(self, degree, d, expected):
        """Test eigenvalues of the angular-momentum square"""
        assert OperatorCheckService.harmonic_eigenvalue(degree, d) == expected


class TestGrid:
    """Test grid construction and boundary checks"""

    def test_default_grid(self):
        """Test the standard two-dimensional grid"""
        grid = OperatorCheckService.default_grid(2)
        assert grid.n == 121
        assert grid.half_width == 7.5
        assert grid.refined().spacing == pytest.approx(grid.spacing / 2)

    def test_no_default_grid(self):
        """Test an unsupported dimension raises ParameterError"""
        with pytest.raises(ParameterError):
            OperatorCheckService.default_grid(7)

    def test_field_on_boundary(self):
        """Test a field that does not decay raises GridError"""
        grid = MomentumGrid(d=2, n=21, half_width=3.0)
        with pytest.raises(GridError):
            OperatorCheckService.apply_LL(np.ones((21, 21)), grid)

    def test_shape_mismatch(self):
        """Test a field of the wrong shape raises GridError"""
        grid = MomentumGrid(d=2, n=21, half_width=3.0)
        with pytest.raises(GridError):
            OperatorCheckService.check_boundary(np.zeros((21, 20)), grid)


class TestOperators:
    """Test operator actions on the coarse two-dimensional grid"""

    @pytest.fixture
    def grid(self):
        return OperatorCheckService.default_grid(2)

    def test_radial_field_has_no_angular_momentum(self, grid):
        """Test LL annihilates a radial field"""
        f = probe("radial").build(grid.coordinates())
        assert OperatorCheckService.eigenvalue_residual(f, grid, 0.0) < 1e-2

    @pytest.mark.parametrize("name,degree", [("dipole", 1), ("quadrupole", 2)])
    def test_harmonic_eigenfunctions(self, grid, name, degree):
        """Test LL f = l^2 f for harmonics in two dimensions"""
        f = probe(name).build(grid.coordinates())
        eigenvalue = OperatorCheckService.harmonic_eigenvalue(degree, 2)
        assert OperatorCheckService.eigenvalue_residual(f, grid, eigenvalue) < 1e-2

    def test_spherical_laplacian_is_minus_LL(self, grid):
        """Test LL f + spherical Laplacian f vanishes for a generic field"""
        f = probe("offset_polynomial").build(grid.coordinates())
        assert OperatorCheckService.identity_residual(f, grid) < 1e-2

    def test_commutator_identity(self, grid):
        """Test both sides of the double commutator agree"""
        f = probe("offset_mixed").build(grid.coordinates())
        assert OperatorCheckService.commutator_identity_check(f, grid) < 1e-2


class TestRunSuite:
    """Test the convergence suite"""

    def test_two_dimensions_pass(self):
        """Test every check converges at fourth order in two dimensions"""
        results = OperatorCheckService.run_suite(2)
        assert len(results) == 2 * len(PROBE_FIELDS) + 3
        failed = [r.name for r in results if not r.passed]
        assert failed == []
        for result in results:
            assert result.residual_fine < 1e-11 or result.ratio >= MIN_CONVERGENCE_RATIO

    def test_eigenvalue_labels(self):
        """Test eigenvalue checks record their expected value"""
        results = OperatorCheckService.run_suite(2, fields=(probe("quadrupole"),))
        labels = {r.name: r.expected for r in results}
        assert labels["eigenvalue/quadrupole"] == "4"

    @pytest.mark.slow
    def test_three_dimensions_pass(self):
        """Test every check converges at fourth order in three dimensions"""
        results = OperatorCheckService.run_suite(3)
        assert all(r.passed for r in results)
