"""Grid verification of the angular-momentum operator identities

Fields live on a uniform momentum grid; all operators use fourth-order
centred differences, so residuals of exact identities shrink by 16 per
halving of the spacing.
"""

import logging
from typing import Callable, NamedTuple, Optional

import numpy as np

from swiftdeco.config import get_settings
from swiftdeco.core.exceptions import GridError, ParameterError
from swiftdeco.schemas.opcheck import MomentumGrid, OperatorCheckResult
from swiftdeco.utils import finite_difference as fd

logger = logging.getLogger(__name__)

SUITE_VERSION = 1
# Minimum residual reduction for fourth-order convergence under h -> h/2
MIN_CONVERGENCE_RATIO = 12.0
# Residuals below this are at rounding level and pass regardless of ratio
_ROUNDING_FLOOR = 1e-11
# Points within this many coarse spacings of k = 0 are excluded
_EXCLUSION_SPACINGS = 3.0

DEFAULT_HALF_WIDTH = 7.5
DEFAULT_POINTS = {2: 121, 3: 61, 4: 31}

Field = Callable[[list[np.ndarray]], np.ndarray]


class ProbeField(NamedTuple):
    """Test field, with its harmonic degree when it is an eigenfunction"""

    name: str
    build: Field
    degree: Optional[int] = None


def _k2(coords: list[np.ndarray]) -> np.ndarray:
    return sum(c * c for c in coords)


def _offset(coords: list[np.ndarray], centre: tuple[float, ...]) -> np.ndarray:
    return sum((c - x0) ** 2 for c, x0 in zip(coords, centre))


def _radial(coords):
    k2 = _k2(coords)
    return k2 * np.exp(-0.5 * k2)


def _dipole(coords):
    return coords[0] * np.exp(-0.5 * _k2(coords))


def _quadrupole(coords):
    return coords[0] * coords[1] * np.exp(-0.5 * _k2(coords))


def _offset_polynomial(coords):
    centre = (1.2, -0.8, 0.5, -0.3)[: len(coords)]
    return (1.0 + coords[0] - 0.5 * coords[1] ** 2) * np.exp(
        -_offset(coords, centre) / (2.0 * 0.8**2)
    )


def _offset_mixed(coords):
    centre = (-1.0, 1.5, 0.3, 0.6)[: len(coords)]
    return coords[0] * coords[1] * np.exp(
        -_offset(coords, centre) / (2.0 * 0.8**2)
    )


def _anisotropic(coords):
    widths = (1.0, 0.8, 0.9, 0.85)[: len(coords)]
    exponent = sum((c / w) ** 2 for c, w in zip(coords, widths))
    return (1.0 + coords[1]) * np.exp(-0.5 * exponent)


PROBE_FIELDS = (
    ProbeField("radial", _radial, 0),
    ProbeField("dipole", _dipole, 1),
    ProbeField("quadrupole", _quadrupole, 2),
    ProbeField("offset_polynomial", _offset_polynomial),
    ProbeField("offset_mixed", _offset_mixed),
    ProbeField("anisotropic", _anisotropic),
)


class OperatorCheckService:
    """Service for the momentum-grid operator checks"""

    @staticmethod
    def default_grid(d: int) -> MomentumGrid:
        """Coarse grid of the standard suite."""
        if d not in DEFAULT_POINTS:
            raise ParameterError(f"No default grid for dimension {d}")
        return MomentumGrid(d=d, n=DEFAULT_POINTS[d], half_width=DEFAULT_HALF_WIDTH)

    @staticmethod
    def check_boundary(f: np.ndarray, grid: MomentumGrid) -> None:
        """
        Raise GridError if f is not negligible on the grid faces.

        Values are compared with the peak of |f|.
        """
        if f.shape != (grid.n,) * grid.d:
            raise GridError(f"Field shape {f.shape} does not match the grid")
        peak = float(np.max(np.abs(f)))
        edge = max(
            float(np.max(np.abs(np.take(f, index, axis=axis))))
            for axis in range(grid.d)
            for index in (0, -1)
        )
        tolerance = get_settings().opcheck_boundary_tolerance
        if peak > 0 and edge > tolerance * peak:
            raise GridError(
                f"Field reaches {edge / peak:.2e} of its peak on the boundary",
                details={"tolerance": tolerance},
            )

    @staticmethod
    def _euler(f: np.ndarray, coords: list[np.ndarray], h: float) -> np.ndarray:
        """k . grad f"""
        return sum(c * fd.first_derivative(f, h, i) for i, c in enumerate(coords))

    @staticmethod
    def _laplacian(f: np.ndarray, h: float) -> np.ndarray:
        return sum(fd.second_derivative(f, h, i) for i in range(f.ndim))

    @staticmethod
    def apply_LL(f: np.ndarray, grid: MomentumGrid) -> np.ndarray:
        """
        Half the summed squared angular momenta, -k^2 lap f + (k.grad)^2 f + (d-2) k.grad f.

        Raises:
            GridError: If f does not vanish on the boundary
        """
        OperatorCheckService.check_boundary(f, grid)
        coords = grid.coordinates()
        h = grid.spacing
        ef = OperatorCheckService._euler(f, coords, h)
        eef = OperatorCheckService._euler(ef, coords, h)
        lap = OperatorCheckService._laplacian(f, h)
        return -_k2(coords) * lap + eef + (grid.d - 2) * ef

    @staticmethod
    def apply_spherical_laplacian(f: np.ndarray, grid: MomentumGrid) -> np.ndarray:
        """
        Angular part of the Laplacian, k^2 lap f - k.H.k - (d-1) k.grad f.

        This is k^2 times the full Laplacian minus its radial part.
        """
        OperatorCheckService.check_boundary(f, grid)
        coords = grid.coordinates()
        h = grid.spacing
        d = grid.d
        first = [fd.first_derivative(f, h, i) for i in range(d)]
        khk = np.zeros_like(f)
        for i in range(d):
            khk += coords[i] ** 2 * fd.second_derivative(f, h, i)
            for j in range(i + 1, d):
                khk += 2.0 * coords[i] * coords[j] * fd.first_derivative(first[i], h, j)
        ef = sum(c * g for c, g in zip(coords, first))
        lap = OperatorCheckService._laplacian(f, h)
        return _k2(coords) * lap - khk - (d - 1) * ef

    @staticmethod
    def commutator_rhs(f: np.ndarray, grid: MomentumGrid) -> np.ndarray:
        """
        Double-commutator side in the diagonal representation.

        d_i d_j [(k^2 delta_ij - k_i k_j) f] + (d-1) d_i (k_i f); equals
        -apply_LL(f) for every smooth f.
        """
        OperatorCheckService.check_boundary(f, grid)
        coords = grid.coordinates()
        h = grid.spacing
        d = grid.d
        k2 = _k2(coords)
        out = np.zeros_like(f)
        for i in range(d):
            out += fd.second_derivative((k2 - coords[i] ** 2) * f, h, i)
            out += (d - 1) * fd.first_derivative(coords[i] * f, h, i)
            for j in range(i + 1, d):
                mixed = fd.first_derivative(coords[i] * coords[j] * f, h, i)
                out -= 2.0 * fd.first_derivative(mixed, h, j)
        return out

    @staticmethod
    def _masked_max(
        residual: np.ndarray, grid: MomentumGrid, exclusion: float
    ) -> float:
        mask = _k2(grid.coordinates()) > exclusion**2
        return float(np.max(np.abs(residual[mask])))

    @staticmethod
    def identity_residual(
        f: np.ndarray, grid: MomentumGrid, exclusion: Optional[float] = None
    ) -> float:
        """max |LL f + spherical Laplacian f| / max |f| outside the origin ball."""
        exclusion = _EXCLUSION_SPACINGS * grid.spacing if exclusion is None else exclusion
        residual = OperatorCheckService.apply_LL(
            f, grid
        ) + OperatorCheckService.apply_spherical_laplacian(f, grid)
        return OperatorCheckService._masked_max(residual, grid, exclusion) / float(
            np.max(np.abs(f))
        )

    @staticmethod
    def commutator_identity_check(
        f: np.ndarray, grid: MomentumGrid, exclusion: Optional[float] = None
    ) -> float:
        """
        Max-norm difference of the two sides of the double-commutator identity.

        Args:
            f: Momentum-diagonal field on the grid
            grid: Momentum grid
            exclusion: Radius of the excluded ball around k = 0
                (default three spacings)

        Returns:
            Residual relative to max |f|

        Raises:
            GridError: If f does not vanish on the boundary
        """
        exclusion = _EXCLUSION_SPACINGS * grid.spacing if exclusion is None else exclusion
        residual = OperatorCheckService.apply_LL(
            f, grid
        ) + OperatorCheckService.commutator_rhs(f, grid)
        return OperatorCheckService._masked_max(residual, grid, exclusion) / float(
            np.max(np.abs(f))
        )

    @staticmethod
    def eigenvalue_residual(
        f: np.ndarray,
        grid: MomentumGrid,
        eigenvalue: float,
        exclusion: Optional[float] = None,
    ) -> float:
        """max |LL f - eigenvalue f| / max |f|."""
        exclusion = _EXCLUSION_SPACINGS * grid.spacing if exclusion is None else exclusion
        residual = OperatorCheckService.apply_LL(f, grid) - eigenvalue * f
        return OperatorCheckService._masked_max(residual, grid, exclusion) / float(
            np.max(np.abs(f))
        )

    @staticmethod
    def harmonic_eigenvalue(degree: int, d: int) -> float:
        """l (l + d - 2): l(l+1) in three dimensions, m^2 in two."""
        return float(degree * (degree + d - 2))

    @staticmethod
    def refinement_check(
        name: str,
        residual: Callable[[np.ndarray, MomentumGrid, float], float],
        field: Field,
        grid: MomentumGrid,
        expected: str = "0",
    ) -> OperatorCheckResult:
        """
        Residual on a grid and on its refinement, with the reduction ratio.

        Both residuals exclude the same ball (three coarse spacings).
        """
        exclusion = _EXCLUSION_SPACINGS * grid.spacing
        fine = grid.refined()
        coarse_value = residual(field(grid.coordinates()), grid, exclusion)
        fine_value = residual(field(fine.coordinates()), fine, exclusion)
        ratio = coarse_value / fine_value if fine_value > 0 else np.inf
        passed = fine_value < _ROUNDING_FLOOR or ratio >= MIN_CONVERGENCE_RATIO
        logger.info(
            "%s (d=%d): %.3e -> %.3e, ratio %.2f", name, grid.d, coarse_value, fine_value, ratio
        )
        return OperatorCheckResult(
            name=name,
            d=grid.d,
            residual_coarse=coarse_value,
            residual_fine=fine_value,
            ratio=float(ratio),
            expected=expected,
            passed=bool(passed),
        )

    @staticmethod
    def run_suite(
        d: int,
        grid: Optional[MomentumGrid] = None,
        fields: tuple[ProbeField, ...] = PROBE_FIELDS,
    ) -> list[OperatorCheckResult]:
        """
        All identity, commutator and eigenvalue checks for one dimension.

        Returns:
            One result per (field, identity)
        """
        grid = OperatorCheckService.default_grid(d) if grid is None else grid
        results = []
        for probe in fields:
            results.append(
                OperatorCheckService.refinement_check(
                    f"LL+spherical/{probe.name}",
                    OperatorCheckService.identity_residual,
                    probe.build,
                    grid,
                )
            )
            results.append(
                OperatorCheckService.refinement_check(
                    f"commutator/{probe.name}",
                    OperatorCheckService.commutator_identity_check,
                    probe.build,
                    grid,
                )
            )
            if probe.degree is not None:
                eigenvalue = OperatorCheckService.harmonic_eigenvalue(probe.degree, d)

                def residual(f, g, exclusion, value=eigenvalue):
                    return OperatorCheckService.eigenvalue_residual(f, g, value, exclusion)

                results.append(
                    OperatorCheckService.refinement_check(
                        f"eigenvalue/{probe.name}",
                        residual,
                        probe.build,
                        grid,
                        expected=f"{eigenvalue:g}",
                    )
                )
        return results
