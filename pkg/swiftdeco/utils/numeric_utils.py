"""Numerical helpers shared by the services"""

from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


def relative_error(value: ArrayLike, reference: ArrayLike) -> float:
    """
    Max-norm relative error of value against reference.

    Args:
        value: Computed value(s)
        reference: Reference value(s)

    Returns:
        max|value - reference| / max|reference| (absolute error if reference is 0)
    """
    value = np.asarray(value, dtype=float)
    reference = np.asarray(reference, dtype=float)
    scale = float(np.max(np.abs(reference))) if reference.size else 0.0
    diff = float(np.max(np.abs(value - reference))) if value.size else 0.0
    return diff / scale if scale > 0 else diff


def one_minus_exp(x: ArrayLike) -> ArrayLike:
    """1 - exp(-x) without cancellation for small x."""
    return -np.expm1(-np.asarray(x, dtype=float))


def exp_difference(a: float, b: float, t: ArrayLike) -> ArrayLike:
    """exp(-a t) - exp(-b t) for b >= a, accurate when b - a is small."""
    t = np.asarray(t, dtype=float)
    return np.exp(-a * t) * one_minus_exp((b - a) * t)


def exp_ratio(rate: float, t: ArrayLike) -> ArrayLike:
    """(1 - exp(-rate t)) / rate, with the t limit at rate = 0."""
    t = np.asarray(t, dtype=float)
    if rate == 0.0:
        return t
    return one_minus_exp(rate * t) / rate


def log_grid(start: float, end: float, n: int) -> np.ndarray:
    """Logarithmically spaced grid including both endpoints."""
    return np.logspace(np.log10(start), np.log10(end), n)


def log_log_slope(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Local slopes d log y / d log x between consecutive samples."""
    return np.diff(np.log(y)) / np.diff(np.log(x))
