"""Radial operators on the hypercube and the families built from them.

A radial operator commutes with every hypercube automorphism, so it is a
mixture ``sum_k w[k] S_k`` of spherical means.  It is stored by its sphere
weights ``w`` and/or its spectral profile ``lam``, where ``lam[x]`` is the
eigenvalue on Fourier level ``x``; the two are related by
``lam[x] = sum_k w[k] kappa_k(x)``.
"""

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import integrate, special

from .cube import (
    CubeFunction,
    binomial_row,
    popcounts,
    sphere_means_all,
    wht,
)
from .exceptions import DimensionMismatchError, DomainError, RepresentationError
from .krawtchouk import build_table

__all__ = [
    "RadialOperator",
    "OperatorFamily",
    "spherical",
    "antipodal",
    "identity",
    "noise_t",
    "noise_p",
    "senate_discrete",
    "senate_noise_T",
    "senate_noise_P",
    "apply",
    "profile_from_weights",
    "weights_from_profile",
    "senate_noise_coeff",
    "senate_noise_P_weights",
    "P_K",
    "spherical_family",
    "truncated_spherical_family",
    "senate_family",
    "noise_t_family",
    "senate_noise_T_family",
    "senate_noise_P_family",
    "default_T_grid",
    "default_P_grid",
]

#: decimal digits used for binomial-tail sums
TAIL_DPS = 40


def profile_from_weights(w):
    """Spectral profile ``lam[x] = sum_k w[k] kappa_k(x)``."""
    w = np.asarray(w, dtype=np.float64)
    n = w.shape[0] - 1
    return w @ build_table(n).as_float()


def weights_from_profile(lam):
    """Invert :func:`profile_from_weights` using Krawtchouk orthogonality.

    ``w[k] = C(n,k) 2**-n sum_x lam[x] kappa_k(x) C(n,x)``.  Fine for small
    ``n``; cancellation grows like ``2**n`` ulps.
    """
    lam = np.asarray(lam, dtype=np.float64)
    n = lam.shape[0] - 1
    binom = binomial_row(n)
    kappa = build_table(n).as_float()
    return binom * (kappa @ (lam * binom)) / 2.0**n


@dataclass(frozen=True)
class RadialOperator:
    """A radial operator on the ``n``-cube.

    Attributes
    ----------
    n : int
    lam : ndarray of shape (n + 1,)
        Eigenvalue on each Fourier level.
    w : ndarray of shape (n + 1,) or None
        Sphere weights, when known.
    tag : dict
        Kind and parameters, e.g. ``{"kind": "noise_t", "t": 0.5}``.
    """

    n: int
    lam: np.ndarray
    w: np.ndarray = None
    tag: dict = field(default_factory=dict)

    def __post_init__(self):
        lam = np.array(self.lam, dtype=np.float64)
        if lam.shape != (self.n + 1,):
            raise ValueError(f"profile must have length n+1={self.n + 1}")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        if self.w is not None:
            w = np.array(self.w, dtype=np.float64)
            if w.shape != (self.n + 1,):
                raise ValueError(f"weights must have length n+1={self.n + 1}")
            w.setflags(write=False)
            object.__setattr__(self, "w", w)

    def sphere_weights(self):
        """Sphere weights, recovered from the profile when not stored."""
        if self.w is not None:
            return self.w
        return weights_from_profile(self.lam)

    def transform(self, f, route="auto"):
        return apply(self, f, route)

    def is_stochastic(self, atol=1e-12):
        w = self.sphere_weights()
        return bool(np.all(w >= -atol) and abs(w.sum() - 1) <= atol
                    and abs(self.lam[0] - 1) <= atol)

    def matrix(self):
        """Dense ``2**n x 2**n`` matrix; entry ``[x, y] = w[d(x,y)] / C(n, d)``."""
        if self.n > 12:
            raise ValueError("dense matrices are limited to n <= 12")
        pc = popcounts(self.n)
        idx = np.arange(1 << self.n)
        dist = pc[idx[:, None] ^ idx[None, :]]
        return (self.sphere_weights() / binomial_row(self.n))[dist]

    def __matmul__(self, other):
        if not isinstance(other, RadialOperator):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatchError("operators act on different cubes")
        return RadialOperator(self.n, self.lam * other.lam, None,
                              {"kind": "product", "factors": [self.tag, other.tag]})


def _check_k(n, k):
    if not (isinstance(k, (int, np.integer)) and 0 <= k <= n):
        raise DomainError(f"need integer 0 <= k <= n={n}, got {k!r}")


def spherical(n, k):
    """Spherical mean ``S_k``: average over the sphere of radius ``k``."""
    _check_k(n, k)
    w = np.zeros(n + 1)
    w[k] = 1.0
    return RadialOperator(n, build_table(n).as_float()[k], w,
                          {"kind": "spherical", "k": int(k)})


def identity(n):
    return spherical(n, 0)


def antipodal(n):
    """``iota = S_n``; flips every coordinate, eigenvalue ``(-1)**x``."""
    op = spherical(n, n)
    return RadialOperator(n, op.lam, op.w, {"kind": "antipodal"})


def _binom_pmf(n, p, k=None):
    k = np.arange(n + 1) if k is None else k
    if p == 0:
        return (np.asarray(k) == 0).astype(float)
    # log space: scipy's pmf overflows for subnormal p
    log_c = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return np.exp(log_c + special.xlogy(k, p) + special.xlog1py(n - k, -p))


def noise_t(n, t):
    """Noise operator ``N_t``: flip each bit with probability ``(1 - e^-t)/2``."""
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    x = np.arange(n + 1)
    if math.isinf(t):
        p, lam = 0.5, (x == 0).astype(float)
    else:
        p, lam = -math.expm1(-t) / 2, np.exp(-t * x)
    return RadialOperator(n, lam, _binom_pmf(n, p), {"kind": "noise_t", "t": float(t)})


def noise_p(n, p):
    """Noise operator parameterized by the flip probability ``p in [0, 1/2]``."""
    if not 0 <= p <= 0.5:
        raise DomainError(f"p must lie in [0, 1/2], got {p}")
    x = np.arange(n + 1)
    lam = (1.0 - 2.0 * p) ** x
    return RadialOperator(n, lam, _binom_pmf(n, p), {"kind": "noise_p", "p": float(p)})


def senate_discrete(family, k):
    """Cesaro average of members ``0..k`` of a discrete family."""
    if family.index_kind != "discrete":
        raise DomainError("senate_discrete needs a discrete family")
    if not 0 <= k < len(family.members):
        raise DomainError(f"k={k} outside the family index range")
    members = family.members[: k + 1]
    lam = np.mean([m.lam for m in members], axis=0)
    w = None
    if all(m.w is not None for m in members):
        w = np.mean([m.w for m in members], axis=0)
    return RadialOperator(family.n, lam, w,
                          {"kind": "senate", "of": family.tag, "k": int(k)})


def _weights_by_quadrature(n, T):
    # w_k = (1/T) int_0^T B(n, p(t), k) dt with p(t) = (1 - e^-t)/2
    def integrand(t, k):
        return float(_binom_pmf(n, -math.expm1(-t) / 2, k))

    return np.array([
        integrate.quad(integrand, 0.0, T, args=(k,), epsabs=1e-15, epsrel=1e-13,
                       limit=200)[0] / T
        for k in range(n + 1)])


def senate_noise_T(n, T, with_weights=False):
    """``Sen(N)_T = (1/T) int_0^T N_t dt`` by its closed-form spectrum.

    ``lam[x] = (1 - e^{-Tx}) / (Tx)`` for ``x >= 1``.  ``T = 0`` is the
    identity.  Sphere weights come from quadrature, only on request.
    """
    if not T >= 0:
        raise DomainError(f"T must be nonnegative, got {T}")
    if T == 0:
        op = identity(n)
        return RadialOperator(n, op.lam, op.w, {"kind": "senate_noise_t", "T": 0.0})
    x = np.arange(n + 1, dtype=np.float64)
    lam = np.ones(n + 1)
    tx = T * x[1:]
    lam[1:] = -np.expm1(-tx) / tx
    w = _weights_by_quadrature(n, T) if with_weights else None
    return RadialOperator(n, lam, w, {"kind": "senate_noise_t", "T": float(T)})


def senate_noise_P_weights(n, P, dps=TAIL_DPS):
    """Sphere weights of ``Sen(N~)_P`` in high precision.

    ``w[k] = (1/P) int_0^P C(n,k) p^k (1-p)^(n-k) dp
    = Pr[Binomial(n+1, P) >= k+1] / (P (n+1))``.  Returns ``mpf`` values.
    """
    with mpmath.workdps(dps):
        P = mpmath.mpf(P)
        if P == 0:
            return [mpmath.mpf(1)] + [mpmath.mpf(0)] * n
        m = n + 1
        q = 1 - P
        terms = [q**m]
        ratio = P / q if q != 0 else None
        for j in range(m):
            if ratio is None:
                terms.append(mpmath.mpf(1) if j + 1 == m else mpmath.mpf(0))
            else:
                terms.append(terms[-1] * (m - j) / (j + 1) * ratio)
        if q == 0:
            terms[0] = mpmath.mpf(0)
        tails = [mpmath.mpf(0)] * (m + 2)
        for j in range(m, -1, -1):
            tails[j] = tails[j + 1] + terms[j]
        return [tails[k + 1] / (P * m) for k in range(n + 1)]


def senate_noise_P(n, P):
    """``Sen(N~)_P = (1/P) int_0^P N~_p dp`` by its closed-form spectrum.

    ``lam[x] = (1 - (1-2P)^(x+1)) / (2P (x+1))``; ``P = 0`` is the identity.
    """
    if not 0 <= P <= 0.5:
        raise DomainError(f"P must lie in [0, 1/2], got {P}")
    if P == 0:
        op = identity(n)
        return RadialOperator(n, op.lam, op.w, {"kind": "senate_noise_p", "P": 0.0})
    x1 = np.arange(1, n + 2, dtype=np.float64)
    if P == 0.5:
        lam = 1.0 / x1
    else:
        lam = -np.expm1(x1 * math.log1p(-2.0 * P)) / (2.0 * P * x1)
    w = np.array([float(v) for v in senate_noise_P_weights(n, P)])
    return RadialOperator(n, lam, w, {"kind": "senate_noise_p", "P": float(P)})


def P_K(n, K):
    """``min((K + sqrt K)/n, 1/2)``, as an mpmath number."""
    with mpmath.workdps(TAIL_DPS):
        return min((K + mpmath.sqrt(K)) / n, mpmath.mpf(1) / 2)


def senate_noise_coeff(n, K, dps=TAIL_DPS):
    """Coefficients ``a_k``, ``k = 0..K``, of ``S_k`` in ``Sen(N~)_{P_K}``.

    ``a_k = (1/P_K) int_0^{P_K} C(n,k) p^k (1-p)^(n-k) dp``, summed as a
    binomial tail in ``dps``-digit arithmetic.  ``K = 0`` gives ``a_0 = 1``.
    Returns a float64 array.

    Raises
    ------
    DomainError
        If ``K > n/2`` or ``K < 0``.
    """
    if not 0 <= K <= n / 2:
        raise DomainError(f"need 0 <= K <= n/2, got K={K}, n={n}")
    with mpmath.workdps(dps):
        weights = senate_noise_P_weights(n, P_K(n, K), dps)
        return np.array([float(v) for v in weights[: K + 1]])


def apply(op, f, route="auto"):
    """Apply a radial operator to a function.

    Parameters
    ----------
    op : RadialOperator
    f : CubeFunction or array_like
    route : {"auto", "spectral", "direct"}
        ``spectral`` multiplies the Walsh-Hadamard coefficients by
        ``lam[level]``; ``direct`` combines all spherical means with weights
        ``w``.  ``auto`` prefers ``direct`` when weights are stored.

    Returns
    -------
    CubeFunction
    """
    if not isinstance(f, CubeFunction):
        f = CubeFunction.from_values(f)
    if f.n != op.n:
        raise DimensionMismatchError(f"operator has n={op.n}, function has n={f.n}")
    if route == "auto":
        route = "direct" if op.w is not None else "spectral"
    if route == "spectral":
        coeffs = wht(f).coeffs
        coeffs *= op.lam[popcounts(op.n)]
        return CubeFunction(op.n, wht(coeffs).coeffs)
    if route == "direct":
        if op.w is None:
            raise RepresentationError("direct route needs sphere weights")
        s = sphere_means_all(np.asarray(f.values, dtype=np.float64)).s
        return CubeFunction(op.n, s @ op.w)
    raise ValueError(f"unknown route {route!r}")


@dataclass(frozen=True)
class OperatorFamily:
    """An indexed collection of radial operators on one cube.

    Attributes
    ----------
    n : int
    members : tuple of RadialOperator
    index : ndarray
        Index value of each member (radius, time, or flip probability).
    index_kind : {"discrete", "continuous"}
    tag : dict
        Descriptor; continuous families record their sampling grid here.
    """

    n: int
    members: tuple
    index: np.ndarray
    index_kind: str = "discrete"
    tag: dict = field(default_factory=dict)

    def __post_init__(self):
        members = tuple(self.members)
        if any(m.n != self.n for m in members):
            raise DimensionMismatchError("family members must share n")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "index", np.asarray(self.index, dtype=np.float64))
        if len(self.index) != len(members):
            raise ValueError("index and members differ in length")

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def profiles(self):
        """Member profiles stacked as an ``(m, n + 1)`` array."""
        return np.array([m.lam for m in self.members])

    def weights(self):
        """Member sphere weights stacked as ``(m, n + 1)``, or None."""
        if any(m.w is None for m in self.members):
            return None
        return np.array([m.w for m in self.members])

    def is_spherical(self):
        return all(m.tag.get("kind") in ("spherical", "antipodal") for m in self.members)


def spherical_family(n):
    """``{S_0, ..., S_n}``."""
    return OperatorFamily(n, [spherical(n, k) for k in range(n + 1)],
                          np.arange(n + 1), "discrete", {"family": "S", "n": n})


def truncated_spherical_family(n):
    """``{S_0, ..., S_floor(n/2)}``."""
    half = n // 2
    return OperatorFamily(n, [spherical(n, k) for k in range(half + 1)],
                          np.arange(half + 1), "discrete", {"family": "Sbar", "n": n})


def senate_family(family):
    """``Sen(T)_k`` for every index ``k`` of a discrete family."""
    members = [senate_discrete(family, k) for k in range(len(family))]
    tag = {"family": f"Sen({family.tag.get('family', '?')})", "n": family.n}
    return OperatorFamily(family.n, members, family.index, "discrete", tag)


def default_T_grid(n, points=64):
    lo = 1.0 / max(n, 1) ** 2
    return np.geomspace(lo, 10.0 * max(n, 1), points)


def default_P_grid(n, points=64):
    return np.geomspace(1.0 / max(n, 1) ** 2 if n > 1 else 0.25, 0.5, points)


def _grid_spec(kind, grid):
    grid = np.asarray(grid, dtype=np.float64)
    return {"kind": kind, "points": int(grid.size),
            "min": float(grid.min()) if grid.size else None,
            "max": float(grid.max()) if grid.size else None}


def noise_t_family(n, grid=None):
    grid = default_T_grid(n) if grid is None else np.asarray(grid, dtype=float)
    return OperatorFamily(n, [noise_t(n, t) for t in grid], grid, "continuous",
                          {"family": "N", "n": n, "grid": _grid_spec("T", grid)})


def senate_noise_T_family(n, grid=None, points=64):
    """Sampled ``Sen(N)``; default grid is geometric over ``[1/n^2, 10 n]``."""
    grid = default_T_grid(n, points) if grid is None else np.asarray(grid, dtype=float)
    return OperatorFamily(n, [senate_noise_T(n, T) for T in grid], grid, "continuous",
                          {"family": "Sen(N)", "n": n, "grid": _grid_spec("T", grid)})


def senate_noise_P_family(n, grid=None, points=64):
    """Sampled ``Sen(N~)``; default grid is geometric over ``[1/n^2, 1/2]``."""
    grid = default_P_grid(n, points) if grid is None else np.asarray(grid, dtype=float)
    return OperatorFamily(n, [senate_noise_P(n, P) for P in grid], grid, "continuous",
                          {"family": "Sen(N~)", "n": n, "grid": _grid_spec("P", grid)})
