"""Input validation helpers shared across the estimators and statistics."""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_float_vector",
    "check_alpha",
    "check_exceedance_probability",
    "check_min_size",
]


def as_float_vector(x, name: str = "x", require_finite: bool = True) -> np.ndarray:
    """Coerce array-like input to a 1-D float64 array.

    Accepts lists, tuples, 1-D arrays, and (n, 1) column vectors.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if require_finite and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_min_size(arr: np.ndarray, min_size: int, name: str = "sample") -> None:
    if arr.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} values, got {arr.size}")


def check_exceedance_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {p!r}")
    return p


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"significance level must lie in (0, 1), got {alpha!r}")
    return alpha
