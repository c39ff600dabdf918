"""Functions on the Boolean hypercube {0,1}^n.

A function is stored as a length ``2**n`` array whose index ``x`` is the
vertex with coordinate ``i`` equal to bit ``i`` of ``x``.  Neighbours differ
by a xor with a power of two, which makes both the Walsh-Hadamard transform
and the adjacency operator simple strided butterflies.

All norms use counting measure on the vertices (no ``2**-n`` factor).
"""

import json
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._validation import (
    DEFAULT_MAX_DIM,
    check_cube_array,
    check_dimension,
    dimension_from_length,
)
from .exceptions import DomainError

__all__ = [
    "CubeFunction",
    "SpectralCoefficients",
    "SphereSumMatrix",
    "wht",
    "level_energies",
    "sphere_sums",
    "sphere_means_all",
    "lp_norm",
    "popcounts",
    "binomial_row",
    "antipode",
    "read_cube_function",
    "write_cube_function",
]

MAGIC = b"CUBEFN01"


@lru_cache(maxsize=32)
def _popcounts(n):
    idx = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc += (idx >> i) & 1
    pc.setflags(write=False)
    return pc


def popcounts(n):
    """Hamming weight of every vertex index of the ``n``-cube (read-only)."""
    return _popcounts(check_dimension(n))


@lru_cache(maxsize=256)
def _binomial_ints(n):
    return tuple(math.comb(n, k) for k in range(n + 1))


def binomial_row(n, exact=False):
    """``C(n, k)`` for ``k = 0..n`` as float64, or as Python ints if exact."""
    row = _binomial_ints(n)
    if exact:
        return list(row)
    return np.array(row, dtype=np.float64)


@dataclass(frozen=True)
class CubeFunction:
    """A real-valued function on ``{0,1}^n``.

    Attributes
    ----------
    n : int
        Dimension of the hypercube.
    values : ndarray of shape (2**n,)
        ``values[x]`` is the function value at vertex ``x``.
    """

    n: int
    values: np.ndarray

    def __post_init__(self):
        values, n = check_cube_array(self.values, self.n, allow_exact=True)
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n", n)

    @classmethod
    def from_values(cls, values, max_dim=DEFAULT_MAX_DIM):
        values, n = check_cube_array(values, max_dim=max_dim, allow_exact=True)
        return cls(n, values)

    @classmethod
    def delta(cls, n, vertex=0):
        values = np.zeros(1 << n)
        values[vertex] = 1.0
        return cls(n, values)

    @classmethod
    def constant(cls, n, c=1.0):
        return cls(n, np.full(1 << n, float(c)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.values.shape[0]

    def norm(self, p=2):
        return lp_norm(self.values, p)

    def to_json(self):
        return {"n": self.n, "values": [float(v) for v in self.values]}


@dataclass(frozen=True)
class SpectralCoefficients:
    """Coefficients of a function in the orthonormal character basis."""

    n: int
    coeffs: np.ndarray

    @property
    def levels(self):
        """Level (Hamming weight) of each frequency index."""
        return popcounts(self.n)


@dataclass(frozen=True)
class SphereSumMatrix:
    """Spherical means of one function at every vertex and every radius.

    ``s[x, k]`` is the average of the source function over the Hamming
    sphere of radius ``k`` about ``x``.  Exact mode stores ``Fraction``
    objects.
    """

    n: int
    s: np.ndarray

    def unnormalized(self):
        """Sphere sums ``s[x, k] * C(n, k)``."""
        if self.s.dtype == object:
            return self.s * np.array(binomial_row(self.n, exact=True), dtype=object)
        return self.s * binomial_row(self.n)


def _as_values(f, allow_exact=False):
    if isinstance(f, CubeFunction):
        values = f.values
        if not allow_exact and values.dtype != np.float64:
            values = values.astype(np.float64)
        return values, f.n
    return check_cube_array(f, allow_exact=allow_exact)


def wht(f, max_dim=DEFAULT_MAX_DIM):
    """Orthonormal Walsh-Hadamard transform along the last axis.

    ``coeffs[y] = sum_x f(x) (-1)**popcount(x & y) / sqrt(2**n)``.  The
    transform is its own inverse.  A 2-d input is transformed row by row and
    the result is returned as a plain array; a 1-d input or
    :class:`CubeFunction` yields :class:`SpectralCoefficients`.

    Raises
    ------
    CapacityError
        If ``n`` exceeds ``max_dim``.
    """
    if isinstance(f, CubeFunction):
        a = np.array(f.values, dtype=np.float64)
    else:
        a = np.array(f, dtype=np.float64)
    batched = a.ndim == 2
    if a.ndim not in (1, 2):
        raise ValueError(f"expected a 1-d or 2-d array, got shape {a.shape}")
    n = dimension_from_length(a.shape[-1])
    check_dimension(n, max_dim)
    lead = a.shape[:-1]
    h = 1
    while h < a.shape[-1]:
        v = a.reshape(*lead, -1, 2, h)
        lo = v[..., 0, :]
        hi = v[..., 1, :]
        tmp = lo - hi
        lo += hi
        hi[...] = tmp
        h <<= 1
    a *= 2.0 ** (-n / 2)
    if batched:
        return a
    return SpectralCoefficients(n, a)


def level_energies(f):
    """Squared norm of the projection of ``f`` onto each Fourier level.

    Entry ``x`` is ``sum_{|y| = x} coeffs[y]**2``; the entries sum to
    ``||f||_2**2``.
    """
    values, n = _as_values(f)
    coeffs = wht(values).coeffs
    return np.bincount(popcounts(n), weights=coeffs * coeffs, minlength=n + 1)


def _adjacency(v, n):
    """Apply the hypercube adjacency operator: ``(L v)(x) = sum_i v(x ^ 2**i)``."""
    out = np.zeros_like(v)
    for i in range(n):
        h = 1 << i
        out.reshape(-1, 2, h)[...] += v.reshape(-1, 2, h)[:, ::-1, :]
    return out


def _exact_dtype(values, n):
    if values.dtype == object:
        return object
    bound = int(np.max(np.abs(values))) if values.size else 0
    # A_k <= C(n, k) * max|f| and the recurrence forms n * A_k before dividing
    if bound * math.comb(n, n // 2) * (n + 1) < 2**62:
        return np.int64
    return object


def sphere_sums(f, exact=None, max_dim=DEFAULT_MAX_DIM):
    """Unnormalized sphere sums ``A[x, k] = sum_{d(x, y) = k} f(y)``.

    Uses the distance-regular recurrence
    ``(k + 1) A_{k+1} = L A_k - (n - k + 1) A_{k-1}`` with ``L`` the
    adjacency operator, at total cost ``O(n**2 2**n)``.  Integer (or
    ``Fraction``) input is summed exactly when ``exact`` is true or left
    unspecified; float input is summed in float64.
    """
    if isinstance(f, CubeFunction):
        values, n = f.values, f.n
    else:
        values, n = check_cube_array(f, max_dim=max_dim, allow_exact=True)
    check_dimension(n, max_dim)
    is_exact_input = values.dtype == object or np.issubdtype(values.dtype, np.integer)
    if exact is None:
        exact = is_exact_input
    if exact:
        if values.dtype == object and any(isinstance(v, float) for v in values):
            raise DomainError("exact sphere sums need integer or Fraction values")
        if not is_exact_input:
            if not np.all(values == np.round(values)):
                raise DomainError("exact sphere sums need integer-valued input")
            values = values.astype(np.int64)
        dtype = _exact_dtype(values, n)
    else:
        dtype = np.float64
    size = 1 << n
    out = np.empty((size, n + 1), dtype=dtype, order="F")
    prev = np.asarray(values, dtype=dtype).copy()
    out[:, 0] = prev
    if n == 0:
        return out
    cur = _adjacency(prev, n)
    out[:, 1] = cur
    for k in range(1, n):
        nxt = _adjacency(cur, n) - (n - k + 1) * prev
        if dtype == np.float64:
            nxt /= k + 1
        else:
            nxt = nxt // (k + 1) if dtype == np.int64 else nxt / (k + 1)
        out[:, k + 1] = nxt
        prev, cur = cur, nxt
    return out


def sphere_means_all(f, exact=None, max_dim=DEFAULT_MAX_DIM):
    """All spherical means of ``f`` at once.

    Returns a :class:`SphereSumMatrix` with ``s[x, k] = A[x, k] / C(n, k)``.
    In exact mode the entries are ``Fraction`` objects.
    """
    A = sphere_sums(f, exact=exact, max_dim=max_dim)
    n = A.shape[1] - 1
    if A.dtype == np.float64:
        s = A / binomial_row(n)
    else:
        binom = binomial_row(n, exact=True)
        s = np.empty(A.shape, dtype=object)
        for k in range(n + 1):
            s[:, k] = [Fraction(a, binom[k]) for a in A[:, k]]
    return SphereSumMatrix(n, s)


def antipode(f):
    """``(iota f)(x) = f(x xor 11...1)``; with this indexing a reversal."""
    values = f.values if isinstance(f, CubeFunction) else np.asarray(f)
    return values[::-1].copy()


def lp_norm(f, p=2):
    """Counting-measure ``l_p`` norm ``(sum_x |f(x)|**p)**(1/p)``.

    ``p = inf`` gives ``max_x |f(x)|``.

    Raises
    ------
    DomainError
        If ``p < 1``.
    """
    if not p >= 1:
        raise DomainError(f"p must satisfy p >= 1, got {p}")
    values, _ = _as_values(f)
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(math.sqrt(np.sum(a * a)))
    return float(np.sum(a**p) ** (1.0 / p))


def write_cube_function(path, f, fmt=None):
    """Write ``f`` as binary (``CUBEFN01`` header) or JSON.

    The format is taken from ``fmt`` or else from the file suffix
    (``.json`` selects JSON, anything else binary).
    """
    path = Path(path)
    values, n = _as_values(f)
    fmt = fmt or ("json" if path.suffix == ".json" else "binary")
    if fmt == "json":
        path.write_text(json.dumps({"n": n, "values": [float(v) for v in values]}))
    elif fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", n))
            fh.write(np.asarray(values, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_cube_function(path, max_dim=DEFAULT_MAX_DIM):
    """Read a function written by :func:`write_cube_function`."""
    raw = Path(path).read_bytes()
    if raw[:8] == MAGIC:
        if len(raw) < 12:
            raise ValueError(f"{path}: truncated header")
        (n,) = struct.unpack("<I", raw[8:12])
        check_dimension(n, max_dim)
        expected = 12 + 8 * (1 << n)
        if len(raw) != expected:
            raise ValueError(
                f"{path}: expected {expected} bytes for n={n}, got {len(raw)}")
        values = np.frombuffer(raw[12:], dtype="<f8").astype(np.float64)
        return CubeFunction(n, values)
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: neither CUBEFN01 binary nor JSON") from exc
    if not isinstance(doc, dict) or "n" not in doc or "values" not in doc:
        raise ValueError(f"{path}: JSON must have keys 'n' and 'values'")
    n = check_dimension(doc["n"], max_dim)
    return CubeFunction(n, np.asarray(doc["values"], dtype=np.float64))
