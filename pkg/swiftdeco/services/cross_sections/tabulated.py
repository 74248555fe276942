"""Tabulated cross section loaded from CSV"""

import csv
from pathlib import Path
from typing import Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from swiftdeco.core.constants import MODEL_TABULATED
from swiftdeco.core.exceptions import ParseError
from swiftdeco.schemas.geometry import AngularQuadrature
from swiftdeco.services.cross_sections.base import BaseCrossSectionModel

TABLE_HEADER = ["k", "theta", "dsdo"]


def _padded_axis(grid: np.ndarray, values: np.ndarray, axis: int):
    """Give a single-point axis a second, identical node so linear interpolation applies."""
    if grid.size > 1:
        return grid, values
    return np.array([grid[0], grid[0] + 1.0]), np.repeat(values, 2, axis=axis)


class TabulatedCrossSection(BaseCrossSectionModel):
    """Bilinear interpolation in (k, cos theta), clamped outside the table"""

    kind = MODEL_TABULATED

    def __init__(
        self,
        k_grid: np.ndarray,
        theta_grid: np.ndarray,
        values: np.ndarray,
        d: int,
        source: str = "",
    ):
        super().__init__(d)
        k_grid = np.asarray(k_grid, dtype=float)
        theta_grid = np.asarray(theta_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (k_grid.size, theta_grid.size):
            raise ParseError("Table values do not match the (k, theta) grid")
        self.check_values(values)
        # cos(theta) ascending means theta descending
        order = np.argsort(np.cos(theta_grid))
        self.k_grid = k_grid
        self.theta_grid = theta_grid
        self.cos_grid = np.cos(theta_grid)[order]
        self.values = values[:, order]
        self.source = source
        k_nodes, padded = _padded_axis(self.k_grid, self.values, 0)
        cos_nodes, padded = _padded_axis(self.cos_grid, padded, 1)
        self._interpolator = RegularGridInterpolator(
            (k_nodes, cos_nodes), padded, method="linear"
        )

    @classmethod
    def from_csv(cls, path: Union[str, Path], d: int) -> "TabulatedCrossSection":
        """
        Load a table with header `k,theta,dsdo` on a full rectangular grid.

        Raises:
            ParseError: On a bad header, bad number or incomplete grid, naming the line
        """
        path = Path(path)
        if not path.is_file():
            raise ParseError(f"Cross-section table not found: {path}")
        entries: dict[tuple[float, float], float] = {}
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != TABLE_HEADER:
                raise ParseError(f"Expected header {','.join(TABLE_HEADER)}", line=1)
            for line_no, row in enumerate(reader, start=2):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != 3:
                    raise ParseError("Expected 3 columns", line=line_no)
                try:
                    k, theta, dsdo = (float(x) for x in row)
                except ValueError:
                    raise ParseError("Malformed number", line=line_no)
                if not k > 0:
                    raise ParseError("k must be positive", key="k", line=line_no)
                if not 0.0 <= theta <= np.pi:
                    raise ParseError("theta must lie in [0, pi]", key="theta", line=line_no)
                if not dsdo >= 0:
                    raise ParseError("dsdo must be non-negative", key="dsdo", line=line_no)
                entries[(k, theta)] = dsdo
        if not entries:
            raise ParseError("Cross-section table is empty", line=2)
        k_grid = np.array(sorted({k for k, _ in entries}))
        theta_grid = np.array(sorted({t for _, t in entries}))
        if len(entries) != k_grid.size * theta_grid.size:
            raise ParseError("Table does not cover a full (k, theta) grid")
        values = np.array([[entries[(k, t)] for t in theta_grid] for k in k_grid])
        return cls(k_grid, theta_grid, values, d, source=str(path))

    def _interpolate(self, k: np.ndarray, cos_theta: np.ndarray) -> np.ndarray:
        k, cos_theta = np.broadcast_arrays(
            np.asarray(k, dtype=float), np.asarray(cos_theta, dtype=float)
        )
        points = np.stack(
            [
                np.clip(k, self.k_grid[0], self.k_grid[-1]),
                np.clip(cos_theta, self.cos_grid[0], self.cos_grid[-1]),
            ],
            axis=-1,
        )
        return self._interpolator(points)

    def evaluate(self, k: np.ndarray, theta: np.ndarray) -> np.ndarray:
        return self._interpolate(k, np.cos(theta))

    def evaluate_at_nodes(self, k: np.ndarray, quad: AngularQuadrature) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return self.check_values(self._interpolate(k[..., None], quad.cos_theta))

    @property
    def k_independent(self) -> bool:
        return self.k_grid.size == 1

    def describe(self) -> dict[str, str]:
        return {"model": self.kind, "table": self.source}
