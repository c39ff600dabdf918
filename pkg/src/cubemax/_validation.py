"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from .exceptions import CapacityError, DomainError

#: default cap on the hypercube dimension (2**26 float64 values = 512 MiB)
DEFAULT_MAX_DIM = 26


def check_dimension(n, max_dim=DEFAULT_MAX_DIM):
    """Return ``n`` as an int after checking ``0 <= n <= max_dim``."""
    if not isinstance(n, numbers.Integral) or isinstance(n, bool):
        raise TypeError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < 0:
        raise DomainError(f"dimension must be nonnegative, got {n}")
    if n > max_dim:
        raise CapacityError(
            f"dimension n={n} exceeds the configured maximum {max_dim}")
    return n


def dimension_from_length(length):
    """Infer ``n`` from an array length ``2**n``."""
    if length < 1 or length & (length - 1):
        raise ValueError(
            f"array length {length} is not a power of two")
    return length.bit_length() - 1


def check_cube_array(values, n=None, max_dim=DEFAULT_MAX_DIM, allow_exact=False):
    """Validate the values of a function on the hypercube.

    Parameters
    ----------
    values : array_like
        One-dimensional array of length ``2**n``.
    n : int, optional
        Expected dimension.  Inferred from the length when omitted.
    max_dim : int
        Capacity limit on ``n``.
    allow_exact : bool
        Keep integer and object (``Fraction``) arrays as they are instead of
        converting to float64.

    Returns
    -------
    values : ndarray
    n : int
    """
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d array, got shape {arr.shape}")
    inferred = dimension_from_length(arr.shape[0])
    if n is not None and inferred != n:
        raise ValueError(
            f"array of length {arr.shape[0]} does not match n={n}")
    check_dimension(inferred, max_dim)
    exact = allow_exact and (arr.dtype == object
                             or np.issubdtype(arr.dtype, np.integer))
    if not exact:
        arr = np.asarray(arr, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("function values must be finite")
    return arr, inferred


def check_cube_batch(X, max_dim=DEFAULT_MAX_DIM):
    """Validate a 2-d batch whose rows are functions on one hypercube."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {X.shape}")
    n = dimension_from_length(X.shape[1])
    check_dimension(n, max_dim)
    if not np.all(np.isfinite(X)):
        raise ValueError("function values must be finite")
    return X, n


def check_nonnegative(values, what="f"):
    """Raise :class:`DomainError` when any entry is negative."""
    if np.any(np.asarray(values) < 0):
        raise DomainError(
            f"{what} must be nonnegative; maximal operators of nonnegative "
            f"families satisfy |M f| <= M|f|, so pass np.abs({what}) instead")


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
