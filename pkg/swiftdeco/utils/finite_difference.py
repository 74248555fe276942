"""Fourth-order centered finite differences on uniform grids

Values beyond the grid are taken as zero, which is exact for fields that
decay below tolerance at the boundary.
"""

import numpy as np


def _shift(f: np.ndarray, offset: int, axis: int) -> np.ndarray:
    """f[i + offset] along axis with zero padding."""
    out = np.zeros_like(f)
    n = f.shape[axis]
    src = [slice(None)] * f.ndim
    dst = [slice(None)] * f.ndim
    if offset > 0:
        src[axis] = slice(offset, n)
        dst[axis] = slice(0, n - offset)
    else:
        src[axis] = slice(0, n + offset)
        dst[axis] = slice(-offset, n)
    out[tuple(dst)] = f[tuple(src)]
    return out


def first_derivative(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """(-f[i+2] + 8 f[i+1] - 8 f[i-1] + f[i-2]) / 12h"""
    return (
        -_shift(f, 2, axis)
        + 8.0 * _shift(f, 1, axis)
        - 8.0 * _shift(f, -1, axis)
        + _shift(f, -2, axis)
    ) / (12.0 * h)


def second_derivative(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """(-f[i+2] + 16 f[i+1] - 30 f[i] + 16 f[i-1] - f[i-2]) / 12h^2"""
    return (
        -_shift(f, 2, axis)
        + 16.0 * _shift(f, 1, axis)
        - 30.0 * f
        + 16.0 * _shift(f, -1, axis)
        - _shift(f, -2, axis)
    ) / (12.0 * h * h)


def gradient(f: np.ndarray, spacing: np.ndarray) -> list[np.ndarray]:
    """Per-axis first derivatives."""
    return [first_derivative(f, float(h), axis) for axis, h in enumerate(spacing)]


def hessian(f: np.ndarray, spacing: np.ndarray) -> list[list[np.ndarray]]:
    """Second derivatives; diagonal from the 5-point stencil, off-diagonal from D1 D1."""
    d = f.ndim
    first = gradient(f, spacing)
    out: list[list[np.ndarray]] = [[None] * d for _ in range(d)]  # type: ignore[list-item]
    for i in range(d):
        out[i][i] = second_derivative(f, float(spacing[i]), i)
        for j in range(i + 1, d):
            out[i][j] = first_derivative(first[i], float(spacing[j]), j)
            out[j][i] = out[i][j]
    return out
