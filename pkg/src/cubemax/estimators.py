"""Estimator-style wrappers around the functional core.

Rows of ``X`` are functions on the hypercube (length ``2**n``).  The wrappers
only validate, dispatch and store fitted state; all numerics live in the
modules they call.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import DEFAULT_MAX_DIM, check_cube_batch
from .cube import wht
from .exceptions import DimensionMismatchError
from .games import MarkingSet, anneal_adversary, best_center, exhaustive_adversary
from .maximal import maximal_apply, norm2_ascent, norm2_exhaustive_small
from .radial import (
    noise_t_family,
    senate_family,
    senate_noise_P_family,
    senate_noise_T_family,
    spherical_family,
    truncated_spherical_family,
)

__all__ = [
    "FAMILIES",
    "make_family",
    "WalshHadamardTransformer",
    "MaximalTransformer",
    "MaximalNormEstimator",
    "MarkingAdversary",
]

FAMILIES = ("spherical", "truncated", "senate", "noise", "senate_noise_T",
            "senate_noise_P")


def make_family(name, n, grid_points=64):
    """Build a named operator family for dimension ``n``."""
    if name == "spherical":
        return spherical_family(n)
    if name == "truncated":
        return truncated_spherical_family(n)
    if name == "senate":
        return senate_family(spherical_family(n))
    if name == "noise":
        return noise_t_family(n)
    if name == "senate_noise_T":
        return senate_noise_T_family(n, points=grid_points)
    if name == "senate_noise_P":
        return senate_noise_P_family(n, points=grid_points)
    raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")


class _CubeRowsMixin:
    def _validate_rows(self, X, reset):
        X, n = check_cube_batch(X, max_dim=self.max_dim)
        if reset:
            self.n_ = n
        elif n != self.n_:
            raise DimensionMismatchError(f"fitted for n={self.n_}, got rows of n={n}")
        return X


class WalshHadamardTransformer(_CubeRowsMixin, TransformerMixin, BaseEstimator):
    """Orthonormal Walsh-Hadamard transform of each row.

    The transform is an involution, so ``inverse_transform`` is the same map.
    """

    def __init__(self, max_dim=DEFAULT_MAX_DIM):
        self.max_dim = max_dim

    def fit(self, X, y=None):
        self._validate_rows(X, reset=True)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_")
        return wht(self._validate_rows(X, reset=False), self.max_dim)

    def inverse_transform(self, X):
        return self.transform(X)


class MaximalTransformer(_CubeRowsMixin, TransformerMixin, BaseEstimator):
    """Replace each nonnegative row ``f`` by ``M f`` for a named family.

    Attributes
    ----------
    family_ : OperatorFamily
    selectors_ : ndarray of shape (n_samples, 2**n)
        Argmax member index per vertex from the last ``transform`` call.
    """

    def __init__(self, family="spherical", grid_points=64, max_dim=DEFAULT_MAX_DIM):
        self.family = family
        self.grid_points = grid_points
        self.max_dim = max_dim

    def fit(self, X, y=None):
        self._validate_rows(X, reset=True)
        self.family_ = make_family(self.family, self.n_, self.grid_points)
        return self

    def transform(self, X):
        check_is_fitted(self, "family_")
        X = self._validate_rows(X, reset=False)
        out = np.empty_like(X, dtype=np.float64)
        sel = np.empty(X.shape, dtype=np.int64)
        for i, row in enumerate(X):
            res = maximal_apply(self.family_, row)
            out[i] = res.values.values
            sel[i] = res.selector
        self.selectors_ = sel
        return out


class MaximalNormEstimator(BaseEstimator):
    """Lower bound on ``||M||_{2->2}`` for one family and dimension.

    ``fit`` runs the search; ``score(X)`` returns the largest ratio
    ``||M f|| / ||f||`` over rows of ``X`` (for comparing candidate inputs).
    """

    def __init__(self, n=4, family="spherical", method="ascent", restarts=32,
                 max_iter=500, tol=1e-10, grid_points=64, grid_resolution=12,
                 seed=0):
        self.n = n
        self.family = family
        self.method = method
        self.restarts = restarts
        self.max_iter = max_iter
        self.tol = tol
        self.grid_points = grid_points
        self.grid_resolution = grid_resolution
        self.seed = seed

    def fit(self, X=None, y=None):
        self.family_ = make_family(self.family, self.n, self.grid_points)
        if self.method == "ascent":
            est = norm2_ascent(self.family_, seed=self.seed, restarts=self.restarts,
                               max_iter=self.max_iter, tol=self.tol)
        elif self.method == "exhaustive":
            est = norm2_exhaustive_small(self.family_, self.grid_resolution)
        else:
            raise ValueError(f"method must be 'ascent' or 'exhaustive', got {self.method!r}")
        self.estimate_ = est
        self.norm_ = est.value
        self.witness_ = est.witness
        return self

    def ratios(self, X):
        check_is_fitted(self, "family_")
        X, n = check_cube_batch(X)
        if n != self.n:
            raise DimensionMismatchError(f"fitted for n={self.n}, got rows of n={n}")
        out = np.empty(X.shape[0])
        for i, row in enumerate(X):
            mf = maximal_apply(self.family_, row).values.values
            out[i] = np.linalg.norm(mf) / np.linalg.norm(row)
        return out

    def score(self, X, y=None):
        return float(self.ratios(X).max())


class MarkingAdversary(BaseEstimator):
    """Search for a size-``m`` vertex marking with a large game value.

    ``predict(X)`` evaluates the exact game value of each 0/1 row of ``X``.
    """

    def __init__(self, n=4, m=1, method="anneal", seed=0, budget=2000, chains=1):
        self.n = n
        self.m = m
        self.method = method
        self.seed = seed
        self.budget = budget
        self.chains = chains

    def fit(self, X=None, y=None):
        if self.method == "exhaustive":
            marking, value = exhaustive_adversary(self.n, self.m)
        elif self.method == "anneal":
            res = anneal_adversary(self.n, self.m, seed=self.seed, budget=self.budget,
                                   chains=self.chains)
            marking, value = res.marking, res.value
            self.trace_ = res.trace
        else:
            raise ValueError(f"method must be 'anneal' or 'exhaustive', got {self.method!r}")
        self.marking_ = marking
        self.value_ = value
        self.result_ = best_center(marking)
        return self

    def predict(self, X):
        check_is_fitted(self, "marking_")
        X = np.atleast_2d(np.asarray(X))
        return np.array([float(best_center(MarkingSet(self.n, "vertex", row)).value)
                         for row in X])
