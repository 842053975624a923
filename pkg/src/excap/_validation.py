"""Input validation helpers shared by the public API."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ValidationError


def as_points(X, dim=None, name="points"):
    """Coerce ``X`` to a float array of shape (n_points, n_dims).

    Scalars become a single 1-d point and flat sequences are read as 1-d
    points, so ``[0.0, 0.5, 1.0]`` means three points on the line.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    try:
        arr = check_array(arr, dtype=np.float64, ensure_2d=True, input_name=name)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if dim is not None and arr.shape[1] != dim:
        raise ValidationError(
            f"{name} have dimension {arr.shape[1]}, expected {dim}"
        )
    return arr


def as_point(x, name="point"):
    """Coerce a single point to a 1-d float array."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d coordinate vector")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite coordinates")
    return arr


def check_scalar(x, name, *, lower=None, upper=None, lower_inclusive=True,
                 upper_inclusive=True, integer=False):
    """Validate a real (or integer) scalar and return it as float/int."""
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(x, bool) or not isinstance(x, kind):
        raise ValidationError(
            f"{name} must be {'an integer' if integer else 'a real number'}, got {x!r}"
        )
    x = int(x) if integer else float(x)
    if not np.isfinite(x):
        raise ValidationError(f"{name} must be finite, got {x!r}")
    if lower is not None:
        if x < lower or (x == lower and not lower_inclusive):
            op = ">=" if lower_inclusive else ">"
            raise ValidationError(f"{name} must be {op} {lower}, got {x!r}")
    if upper is not None:
        if x > upper or (x == upper and not upper_inclusive):
            op = "<=" if upper_inclusive else "<"
            raise ValidationError(f"{name} must be {op} {upper}, got {x!r}")
    return x


def check_simplex(w, atol=1e-12, name="weights"):
    """Validate a probability vector and return it as a float array."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d array")
    if not np.all(np.isfinite(w)):
        raise ValidationError(f"{name} contain non-finite values")
    if np.any(w < 0):
        raise ValidationError(f"{name} must be nonnegative")
    total = w.sum()
    if abs(total - 1.0) > atol:
        raise ValidationError(f"{name} sum to {total!r}, expected 1")
    return w
