"""Input validation helpers shared by the public functions and estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import DataError, DegenerateSampleError


def check_sample(x, min_size=3, name="sample"):
    """Return `x` as a 1-D float64 array of strictly positive finite values.

    Parameters
    ----------
    x : array-like of shape (n,) or (n, 1)
    min_size : int
        Minimum number of observations.
    name : str
        Used in error messages.

    Returns
    -------
    numpy.ndarray of shape (n,)
    """
    arr = check_array(x, ensure_2d=False, dtype=np.float64, ensure_all_finite=True,
                      ensure_min_samples=0, input_name=name)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_size:
        raise DegenerateSampleError(
            f"{name} needs at least {min_size} observations, got {arr.shape[0]}")
    if np.any(arr <= 0):
        raise DataError(f"{name} must contain strictly positive values")
    return arr


def check_delta(delta, n):
    arr = np.asarray(delta)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise DataError(f"event indicator must have shape ({n},), got {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise DataError("event indicator must contain only 0 and 1")
    return arr.astype(np.int8)


def check_alpha(alpha):
    if not isinstance(alpha, numbers.Real) or not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
