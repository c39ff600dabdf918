"""Maximal operators and estimates of their norms.

``(M_A f)(x) = max_{A in family} (A f)(x)``.  Every family here consists of
nonnegative matrices, so ``|M f| <= M |f|`` and all routines take
nonnegative ``f``.
"""

import itertools
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from ._validation import check_dimension, check_nonnegative, check_random_state
from .cube import (
    CubeFunction,
    binomial_row,
    popcounts,
    sphere_means_all,
    sphere_sums,
    wht,
)
from .exceptions import CapacityError, DimensionMismatchError, DomainError

__all__ = [
    "MaximalResult",
    "NormEstimate",
    "maximal_apply",
    "member_actions",
    "l1_norm_check",
    "weak_l1_ratio",
    "weak_ratio_of_values",
    "norm2_ascent",
    "norm2_exhaustive_small",
    "marcinkiewicz_bound",
    "ratio",
]

# cap on the (members x vertices) block evaluated at once on the spectral route
_BLOCK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class MaximalResult:
    """Pointwise supremum of a family applied to ``f``.

    ``selector[x]`` is the smallest index of a member attaining the maximum
    at ``x``.
    """

    values: CubeFunction
    selector: np.ndarray
    family_tag: dict


@dataclass
class NormEstimate:
    """A certified lower bound on ``||M||_{2->2}`` with its witness."""

    value: float
    witness: CubeFunction
    method: str
    iterations: int
    restarts: int
    history: list = field(default_factory=list)
    seed: int = None
    family: dict = field(default_factory=dict)
    grid: dict = None

    def to_dict(self, witness_file=None):
        return {
            "family": self.family,
            "n": self.witness.n,
            "value": self.value,
            "witness_file": witness_file,
            "seed": self.seed,
            "restarts": self.restarts,
            "iterations": self.iterations,
            "grid": self.grid,
            "method": self.method,
        }


def _values(f, n=None):
    if isinstance(f, CubeFunction):
        values = np.asarray(f.values, dtype=np.float64)
        fn = f.n
    else:
        f = CubeFunction.from_values(f)
        values, fn = np.asarray(f.values, dtype=np.float64), f.n
    if n is not None and fn != n:
        raise DimensionMismatchError(f"family has n={n}, function has n={fn}")
    return values, fn


def _spherical_columns(family):
    cols = []
    for m in family.members:
        cols.append(m.tag["k"] if m.tag["kind"] == "spherical" else family.n)
    return cols


def member_actions(family, f):
    """``(2**n, m)`` array whose column ``j`` is ``A_j f``."""
    values, n = _values(f, family.n)
    if family.is_spherical():
        return sphere_means_all(values).s[:, _spherical_columns(family)]
    W = family.weights()
    if W is not None and family.index_kind == "discrete":
        return sphere_means_all(values).s @ W.T
    coeffs = wht(values).coeffs
    lam = family.profiles()[:, popcounts(n)]
    return wht(lam * coeffs[None, :]).T


def maximal_apply(family, f):
    """Apply the maximal operator of ``family`` to nonnegative ``f``.

    The spherical family (and any discrete family with sphere weights) is
    evaluated from one table of all spherical means; other families go
    through the Walsh-Hadamard transform in blocks of members.

    Raises
    ------
    DomainError
        If ``f`` has a negative entry or the family is empty.
    """
    if len(family) == 0:
        raise DomainError("maximal operator of an empty family")
    values, n = _values(f, family.n)
    check_nonnegative(values)
    size = 1 << n
    spectral = not family.is_spherical() and not (
        family.weights() is not None and family.index_kind == "discrete")
    if not spectral:
        actions = member_actions(family, values)
        selector = np.argmax(actions, axis=1)
        best = actions[np.arange(size), selector]
    else:
        coeffs = wht(values).coeffs
        levels = popcounts(n)
        profiles = family.profiles()
        block = max(1, _BLOCK_ELEMENTS // size)
        best = np.full(size, -np.inf)
        selector = np.zeros(size, dtype=np.int64)
        for start in range(0, len(family), block):
            lam = profiles[start:start + block][:, levels]
            acts = wht(lam * coeffs[None, :])
            local = np.argmax(acts, axis=0)
            vals = acts[local, np.arange(size)]
            better = vals > best
            best[better] = vals[better]
            selector[better] = local[better] + start
    return MaximalResult(CubeFunction(n, best), selector, dict(family.tag))


def ratio(family, f):
    """``||M f||_2 / ||f||_2`` for nonnegative nonzero ``f``."""
    values, _ = _values(f, family.n)
    mf = maximal_apply(family, values).values.values
    return float(np.linalg.norm(mf) / np.linalg.norm(values))


def l1_norm_check(n):
    """``||M_S delta||_1`` computed exactly; equals ``n + 1``.

    Returns a ``Fraction``.
    """
    n = check_dimension(n)
    delta = np.zeros(1 << n, dtype=np.int64)
    delta[0] = 1
    A = sphere_sums(delta, exact=True)
    binom = binomial_row(n, exact=True)
    approx = A / np.array(binom, dtype=np.float64)
    arg = np.argmax(approx, axis=1)
    rows = np.arange(1 << n)
    top = A[rows, arg]
    den = np.array(binom, dtype=object)[arg]
    # confirm the float argmax exactly: A[x,k] C(n,j) <= A[x,j] C(n,k)
    lhs = A.astype(object) * np.array(den, dtype=object)[:, None]
    rhs = np.array(top, dtype=object)[:, None] * np.array(binom, dtype=object)[None, :]
    if np.any(lhs > rhs):
        raise ArithmeticError("float argmax disagrees with exact comparison")
    counts = Counter(zip(top.tolist(), den.tolist()))
    return sum((Fraction(int(a), int(b)) * c for (a, b), c in counts.items()),
               Fraction(0))


def weak_ratio_of_values(mf, l1):
    """``sup_{lam > 0} lam #{Mf >= lam} / l1`` for sampled values ``mf``.

    Exact: with ``v`` the positive values in descending order the supremum
    is ``max_i i v_i``.
    """
    v = np.sort(np.asarray(mf, dtype=np.float64))[::-1]
    v = v[v > 0]
    if v.size == 0:
        return 0.0
    return float(np.max(np.arange(1, v.size + 1) * v) / l1)


def weak_l1_ratio(family, f):
    """Weak (1,1) ratio ``sup_lam lam #{M f >= lam} / ||f||_1``."""
    values, _ = _values(f, family.n)
    l1 = float(np.abs(values).sum())
    if l1 == 0:
        raise DomainError("weak ratio undefined for f = 0")
    mf = maximal_apply(family, values).values.values
    return weak_ratio_of_values(mf, l1)


def _adjoint_selected(family, u, selector):
    """``T^T u`` for the row-selection operator ``(T g)(x) = (A_{sel(x)} g)(x)``.

    Radial operators are symmetric, so this is ``sum_j A_j (u * [sel == j])``.
    """
    n = family.n
    used = np.unique(selector)
    rows = np.zeros((used.size, u.size))
    for r, j in enumerate(used):
        mask = selector == j
        rows[r, mask] = u[mask]
    coeffs = wht(rows)
    lam = family.profiles()[used][:, popcounts(n)]
    total = np.sum(lam * coeffs, axis=0)
    return wht(total).coeffs


def _initial(n, r, rng):
    size = 1 << n
    if r == 0:
        f = np.zeros(size)
        f[0] = 1.0
        return f
    kind = r % 3
    if kind == 1:
        return rng.random(size)
    if kind == 2:
        # a few spikes on a small background
        f = 0.01 * rng.random(size)
        f[rng.choice(size, size=max(1, size // 64), replace=False)] += 1.0
        return f
    return rng.random(size) ** rng.uniform(2.0, 12.0)


def _ascent_run(family, f, max_iter, tol):
    f = np.maximum(f, 0.0)
    f /= np.linalg.norm(f)
    res = maximal_apply(family, f)
    current = float(np.linalg.norm(res.values.values))
    history = [current]
    best_f, best = f, current
    it = 0
    for it in range(1, max_iter + 1):
        g = _adjoint_selected(family, np.asarray(res.values.values), res.selector)
        g = np.maximum(g, 0.0)
        norm = np.linalg.norm(g)
        if norm == 0:
            break
        f = g / norm
        res = maximal_apply(family, f)
        value = float(np.linalg.norm(res.values.values))
        history.append(value)
        if value > best:
            improved = value - best
            best_f, best = f, value
            if improved < tol:
                break
        else:
            break
    return best, best_f, it, history


def norm2_ascent(family, seed=0, restarts=32, max_iter=500, tol=1e-10, n_jobs=1):
    """Lower-bound ``||M_family||_{2->2}`` by alternating ascent.

    From a nonnegative start, freeze the argmax selector to get a linear
    row-selection operator ``T``, take a power step ``f <- T^T T f``,
    re-select and repeat until the ratio improves by less than ``tol``.
    Restart ``r`` draws its start from ``SeedSequence(seed).spawn``; restart 0
    starts from a point mass.  The best ratio over restarts is returned; it is
    attained by the returned witness, so it is a valid lower bound.
    """
    children = np.random.SeedSequence(seed).spawn(restarts)
    n = family.n

    def run(r):
        f0 = _initial(n, r, check_random_state(children[r]))
        return _ascent_run(family, f0, max_iter, tol)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(r) for r in range(restarts)]
    best_r = max(range(restarts), key=lambda r: (results[r][0], -r))
    _, witness, _, history = results[best_r]
    witness = CubeFunction(n, witness)
    return NormEstimate(
        value=ratio(family, witness),
        witness=witness,
        method="alternating-ascent",
        iterations=int(sum(r[2] for r in results)),
        restarts=restarts,
        history=history,
        seed=seed,
        family=dict(family.tag),
        grid=family.tag.get("grid"),
    )


def _compositions(total, parts):
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield out


def norm2_exhaustive_small(family, grid_resolution=12, polish=16):
    """Grid search plus local polish of ``||M f|| / ||f||`` for ``n <= 3``.

    The nonnegative directions are sampled as all compositions of
    ``grid_resolution`` into ``2**n`` parts; the best ``polish`` grid points
    are refined with bounded quasi-Newton and Nelder-Mead steps.

    Raises
    ------
    CapacityError
        If ``n > 3``.
    """
    n = family.n
    if n > 3:
        raise CapacityError("exhaustive norm search is limited to n <= 3")
    size = 1 << n
    mats = np.array([m.matrix() for m in family.members])
    grid = np.array(list(_compositions(grid_resolution, size)), dtype=np.float64)
    grid = grid[grid.sum(axis=1) > 0]
    acts = np.einsum("jxy,ny->njx", mats, grid)
    ratios = np.linalg.norm(acts.max(axis=1), axis=1) / np.linalg.norm(grid, axis=1)

    def neg_ratio(v):
        v = np.abs(v)
        nv = np.linalg.norm(v)
        if nv == 0:
            return 0.0
        return -np.linalg.norm((mats @ v).max(axis=0)) / nv

    best_v = grid[int(np.argmax(ratios))]
    best = float(ratios.max())
    for i in np.argsort(-ratios, kind="stable")[:polish]:
        for method in ("L-BFGS-B", "Nelder-Mead"):
            kwargs = {"bounds": [(0, None)] * size} if method == "L-BFGS-B" else {}
            res = optimize.minimize(neg_ratio, grid[i], method=method, **kwargs)
            if -res.fun > best:
                best, best_v = float(-res.fun), np.abs(res.x)
    witness = CubeFunction(n, best_v / np.linalg.norm(best_v))
    return NormEstimate(
        value=ratio(family, witness),
        witness=witness,
        method=f"grid({grid_resolution})+polish",
        iterations=int(len(grid)),
        restarts=int(polish),
        family=dict(family.tag),
        grid=family.tag.get("grid"),
    )


def marcinkiewicz_bound(p):
    """``2 (p/(p-1))**(1/p)``: the ``p -> p`` bound from weak (1,1) and (inf,inf)."""
    if not p > 1:
        raise DomainError(f"need p > 1, got {p}")
    if math.isinf(p):
        return 2.0
    return 2.0 * (p / (p - 1.0)) ** (1.0 / p)
