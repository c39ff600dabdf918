"""Krawtchouk polynomials: exact tables, identities, roots and decay constants.

The normalized polynomial is

    kappa_k(x) = sum_j (-1)**j C(x, j) C(n - x, k - j) / C(n, k),

the eigenvalue of the spherical mean ``S_k`` on Fourier level ``x``.  Tables
hold the unnormalized integers ``K_k(x) = C(n, k) kappa_k(x)``, produced by
the three-term recurrence

    (k + 1) K_{k+1}(x) = (n - 2x) K_k(x) - (n - k + 1) K_{k-1}(x),

in which every division is exact.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .exceptions import CapacityError, DomainError, NumericalResolutionError
from .reports import CheckReport

__all__ = [
    "KrawtchoukTable",
    "DecayConstants",
    "build_table",
    "krawtchouk_direct",
    "kappa_real",
    "verify_symmetries",
    "verify_orthogonality",
    "roots",
    "verify_roots",
    "decay_constants",
    "verify_case_constants",
    "binary_entropy",
    "table_rows",
]

MAX_TABLE_DIM = 128


def krawtchouk_direct(n, k, x):
    """Unnormalized ``K_k(x)`` straight from the defining alternating sum."""
    return sum((-1) ** j * math.comb(x, j) * math.comb(n - x, k - j)
               for j in range(k + 1))


@lru_cache(maxsize=512)
def _unnormalized(n):
    rows = [[1] * (n + 1)]
    if n >= 1:
        rows.append([n - 2 * x for x in range(n + 1)])
    for k in range(1, n):
        prev, cur = rows[k - 1], rows[k]
        nxt = []
        for x in range(n + 1):
            num = (n - 2 * x) * cur[x] - (n - k + 1) * prev[x]
            q, r = divmod(num, k + 1)
            if r:
                raise ArithmeticError(
                    f"inexact recurrence step at n={n}, k={k + 1}, x={x}")
            nxt.append(q)
        rows.append(nxt)
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class KrawtchoukTable:
    """Exact Krawtchouk values for one dimension ``n``.

    Attributes
    ----------
    n : int
    K : tuple of tuples of int
        ``K[k][x]``, the unnormalized values.
    """

    n: int
    K: tuple
    _float: np.ndarray = field(repr=False, compare=False, default=None)

    def kappa(self, k, x):
        """Normalized value ``kappa_k(x)`` as an exact ``Fraction``."""
        return Fraction(self.K[k][x], math.comb(self.n, k))

    def exact(self):
        """Normalized table as a list of lists of ``Fraction``."""
        n = self.n
        return [[Fraction(v, math.comb(n, k)) for v in row]
                for k, row in enumerate(self.K)]

    def as_float(self):
        """Normalized table as a read-only float64 array, ``[k, x]``."""
        if self._float is None:
            arr = np.array([[float(Fraction(v, math.comb(self.n, k))) for v in row]
                            for k, row in enumerate(self.K)], dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, "_float", arr)
        return self._float


def build_table(n):
    """Exact table of ``K_k(x)`` for ``0 <= k, x <= n``.

    Raises
    ------
    CapacityError
        If ``n`` is negative or above 128.
    """
    if not 0 <= n <= MAX_TABLE_DIM:
        raise CapacityError(f"Krawtchouk tables need 0 <= n <= {MAX_TABLE_DIM}, got {n}")
    return KrawtchoukTable(n, _unnormalized(n))


def table_rows(table):
    """Rows ``(n, k, x, num, den, float)`` for CSV dumps; fractions in lowest terms."""
    n = table.n
    for k in range(n + 1):
        for x in range(n + 1):
            q = table.kappa(k, x)
            yield n, k, x, q.numerator, q.denominator, float(q)


def kappa_real(n, k, x, prec=None):
    """Evaluate ``kappa_k(x)`` at real ``x`` by the recurrence in ``k``.

    Uses ``(n - j) kappa_{j+1} = (n - 2x) kappa_j - j kappa_{j-1}``.
    ``x`` may be an array.  With ``prec`` (decimal digits) the evaluation is
    done in mpmath at that precision and a scalar is returned.
    """
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if prec is not None:
        with mpmath.workdps(prec):
            x = mpmath.mpf(x)
            prev, cur = mpmath.mpf(1), 1 - 2 * x / n if n else mpmath.mpf(1)
            if k == 0:
                return prev
            for j in range(1, k):
                prev, cur = cur, ((n - 2 * x) * cur - j * prev) / (n - j)
            return cur
    x = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 1.0 - 2.0 * x / n
    for j in range(1, k):
        prev, cur = cur, ((n - 2.0 * x) * cur - j * prev) / (n - j)
    return cur


def verify_symmetries(table):
    """Check ``kappa_k(x) = kappa_x(k)`` and ``kappa_k(n-x) = (-1)**k kappa_k(x)``.

    Both are checked exactly on the integer table: the first as
    ``C(n, x) K_k(x) = C(n, k) K_x(k)``.
    """
    n, K = table.n, table.K
    binom = [math.comb(n, j) for j in range(n + 1)]
    violations = []
    for k in range(n + 1):
        for x in range(n + 1):
            if binom[x] * K[k][x] != binom[k] * K[x][k]:
                violations.append({"identity": "k-x", "n": n, "k": k, "x": x})
            if K[k][n - x] != (-1) ** k * K[k][x]:
                violations.append({"identity": "reflection", "n": n, "k": k, "x": x})
    return CheckReport(
        check="KRAWT-SYM",
        n_range=[n, n],
        passed=not violations,
        worst_case=violations[0] if violations else None,
        details={"violations": violations[:20], "pairs_checked": (n + 1) ** 2},
    )


def verify_orthogonality(table):
    """Exact check of ``sum_x kappa_k kappa_l C(n,x) = 2**n / C(n,k) delta_kl``.

    Multiplying through by ``C(n,k) C(n,l)`` keeps everything in integers:
    ``sum_x K_k(x) K_l(x) C(n,x) = 2**n C(n,k) delta_kl``.
    """
    n, K = table.n, table.K
    binom = [math.comb(n, j) for j in range(n + 1)]
    worst = None
    for k in range(n + 1):
        for ell in range(k, n + 1):
            lhs = sum(K[k][x] * K[ell][x] * binom[x] for x in range(n + 1))
            rhs = (1 << n) * binom[k] if k == ell else 0
            if lhs != rhs:
                slack = Fraction(lhs - rhs, binom[k] * binom[ell])
                if worst is None or abs(slack) > abs(worst["slack"]):
                    worst = {"n": n, "k": k, "x": ell, "slack": slack}
    if worst is not None:
        worst = dict(worst, slack=float(worst["slack"]))
    return CheckReport(
        check="KRAWT-ORTHO",
        n_range=[n, n],
        passed=worst is None,
        worst_case=worst or {"n": n, "k": 0, "x": 0, "slack": 0.0},
    )


def _sign_change_roots(n, k, samples_per_unit, prec=None):
    table = build_table(n)
    steps = n * samples_per_unit
    grid = np.linspace(0.0, float(n), steps + 1)
    if prec is None:
        vals = kappa_real(n, k, grid)
    else:
        vals = np.array([float(kappa_real(n, k, g, prec)) for g in grid])
    # integer grid points take their signs from the exact table
    for x in range(n + 1):
        i, v = x * samples_per_unit, table.K[k][x]
        vals[i] = 0.0 if v == 0 else math.copysign(max(abs(vals[i]), 1e-300), v)

    def evaluate(t):
        if prec is None:
            return float(kappa_real(n, k, t))
        return float(kappa_real(n, k, t, prec))

    found = []
    for i in range(steps + 1):
        if vals[i] == 0.0:
            found.append(grid[i])
    for i in range(steps):
        a, b = vals[i], vals[i + 1]
        if a == 0.0 or b == 0.0 or (a > 0) == (b > 0):
            continue
        lo, hi = grid[i], grid[i + 1]
        flo = a
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            fm = evaluate(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        found.append(0.5 * (lo + hi))
    return np.sort(np.array(found))


def roots(n, k, samples_per_unit=16):
    """All ``k`` real roots of ``kappa_k`` on ``[0, n]``, sorted.

    Roots are located by sign changes on a grid (integer points use the exact
    table, so integer roots are found exactly) and refined by bisection well
    below ``1e-10``.  If fewer than ``k`` roots are found the search is
    repeated at a finer grid in 50-digit arithmetic.

    Raises
    ------
    NumericalResolutionError
        If ``k`` roots cannot be resolved even in high precision.
    """
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if k == 0:
        return np.empty(0)
    found = _sign_change_roots(n, k, samples_per_unit)
    if len(found) != k:
        found = _sign_change_roots(n, k, 4 * samples_per_unit, prec=50)
    if len(found) != k:
        raise NumericalResolutionError(
            f"found {len(found)} of {k} roots of kappa_{k} for n={n}")
    return found


def verify_roots(n_max, tol=1e-9, min_gap=1e-8, k_range="all"):
    """Check root location ``n/2 +- sqrt(k(n-k))`` and distinctness for ``n <= n_max``.

    ``k_range="all"`` checks ``1 <= k <= n``; ``"half"`` only ``k <= n/2``.
    The location bound fails for some ``k > n/2`` (already at ``n = k = 2``,
    where the roots are ``1 +- 1/sqrt 2`` but the window is ``{1}``).
    """
    if k_range not in ("all", "half"):
        raise ValueError(f"k_range must be 'all' or 'half', got {k_range!r}")
    worst = None
    failures = []
    for n in range(n_max + 1):
        k_top = n if k_range == "all" else n // 2
        for k in range(1, k_top + 1):
            r = roots(n, k)
            half_width = math.sqrt(k * (n - k))
            slack = half_width + tol - float(np.max(np.abs(r - n / 2)))
            gaps = np.diff(r)
            if slack < 0 or (gaps.size and gaps.min() <= min_gap):
                failures.append({"n": n, "k": k})
            if worst is None or slack < worst["slack"]:
                worst = {"n": n, "k": k, "x": float(r[np.argmax(np.abs(r - n / 2))]),
                         "slack": slack}
    return CheckReport(
        check="KRAWT-ROOTS",
        n_range=[0, n_max],
        passed=not failures,
        worst_case=worst,
        params={"k_range": k_range, "tolerance": tol, "min_gap": min_gap},
        details={"failures": failures[:20], "failure_count": len(failures)},
    )


def binary_entropy(p):
    """Natural-log binary entropy ``-p ln p - (1 - p) ln(1 - p)``."""
    if p in (0, 1):
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def _log_abs_kappa(table, k, x):
    # math.log is exact-argument for big ints, so no Fraction -> float rounding
    return math.log(abs(table.K[k][x])) - math.log(math.comb(table.n, k))


def _scan_constant(n, pairs):
    table = build_table(n)
    best = None
    for k, x in pairs:
        if table.K[k][x] == 0:
            continue
        c = -(n / (k * x)) * _log_abs_kappa(table, k, x)
        if best is None or c < best[0]:
            best = (c, k, x)
    return best


@dataclass
class DecayConstants:
    """Empirical constants in ``|kappa_k(x)| <= exp(-c k x / n)``.

    Attributes
    ----------
    n_range : list of int
        Dimensions scanned for ``c_emp``.
    c_emp : dict
        ``n -> min{-(n/kx) ln|kappa_k(x)| : 1 <= k, x <= n/2, kappa != 0}``.
    argmin : dict
        ``n -> (k, x)`` attaining ``c_emp[n]``.
    c2 : float
        Same minimum restricted to ``k <= x`` and taken over ``n < n0``.
    n0 : int
    c_cert : float
        ``min(min_n c_emp[n], c2)``; used by downstream bounds.
    """

    n_range: list
    c_emp: dict
    argmin: dict
    c2: float
    n0: int
    c_cert: float
    report: CheckReport = None


def decay_constants(n_max, n0=100, rtol=1e-12):
    """Scan exact tables for the decay constant and certify the bound.

    Returns
    -------
    DecayConstants
        Its ``report`` records the worst slack of
        ``|kappa_k(x)| <= exp(-c_cert k x / n) (1 + rtol)`` over
        ``2 <= n <= n_max`` and ``0 <= k, x <= n/2``.
    """
    if n_max < 2:
        raise DomainError(f"n_max must be at least 2, got {n_max}")
    c_emp, argmin = {}, {}
    for n in range(2, n_max + 1):
        half = n // 2
        best = _scan_constant(
            n, ((k, x) for k in range(1, half + 1) for x in range(1, half + 1)))
        if best is not None:
            c_emp[n], argmin[n] = best[0], (best[1], best[2])
    c2_best = None
    for n in range(2, n0):
        half = n // 2
        best = _scan_constant(
            n, ((k, x) for x in range(1, half + 1) for k in range(1, x + 1)))
        if best is not None and (c2_best is None or best[0] < c2_best):
            c2_best = best[0]
    c_cert = min(min(c_emp.values()), c2_best)

    worst = None
    for n in range(2, n_max + 1):
        table = build_table(n)
        half = n // 2
        for k in range(half + 1):
            for x in range(half + 1):
                if table.K[k][x] == 0:
                    continue
                log_bound = -c_cert * k * x / n + math.log1p(rtol)
                slack = log_bound - _log_abs_kappa(table, k, x)
                if worst is None or slack < worst["slack"]:
                    worst = {"n": n, "k": k, "x": x, "slack": slack}
    report = CheckReport(
        check="KRAWT-DECAY",
        n_range=[2, n_max],
        passed=worst["slack"] >= 0 and c2_best > 0,
        worst_case=worst,
        constants={"c_cert": c_cert, "c2": c2_best, "n0": n0},
    )
    return DecayConstants(list(range(2, n_max + 1)), c_emp, argmin, c2_best, n0,
                          c_cert, report)


def verify_case_constants(stirling_n_max=64):
    """Check the explicit constants used in the two regimes of the decay bound.

    * ``H(0.14) > ln(2)/2``;
    * ``y**2 / (1 - y**2) <= 0.93`` at ``y = 2 sqrt(0.14 * 0.86)``;
    * ``c1 = 2 H(0.14) - ln 2 > 0.116``;
    * ``c1 >= 2 ln(2 n0) / n0`` at ``n0 = 100``;
    * ``C(n, j) >= exp(n H(j/n)) / sqrt(8 p (1-p) n) >= exp(n H(j/n)) / sqrt(2n)``
      for ``n <= stirling_n_max`` and every ``0 <= j <= n`` (the middle
      expression only for ``0 < j < n``).
    """
    h = binary_entropy(0.14)
    y2 = 4 * 0.14 * 0.86
    ratio = y2 / (1 - y2)
    c1 = 2 * h - math.log(2)
    n0_rhs = 2 * math.log(200) / 100
    stirling_worst = None
    for n in range(1, stirling_n_max + 1):
        for j in range(n + 1):
            p = j / n
            log_c = math.log(math.comb(n, j))
            weak = n * binary_entropy(p) - 0.5 * math.log(2 * n)
            slack = log_c - weak
            if 0 < j < n:
                strong = n * binary_entropy(p) - 0.5 * math.log(8 * p * (1 - p) * n)
                slack = min(log_c - strong, strong - weak)
            if stirling_worst is None or slack < stirling_worst["slack"]:
                stirling_worst = {"n": n, "k": j, "x": j, "slack": slack}
    checks = {
        "H2(0.14)": h,
        "ln2/2": math.log(2) / 2,
        "ymax2_ratio": ratio,
        "c1": c1,
        "n0_threshold": n0_rhs,
        "H2_gt_half_ln2": h > math.log(2) / 2,
        "ratio_le_0.93": ratio <= 0.93,
        "c1_gt_0.116": c1 > 0.116,
        "n0_100_suffices": c1 >= n0_rhs,
        "stirling": stirling_worst["slack"] >= 0,
    }
    passed = all(v for key, v in checks.items() if isinstance(v, bool))
    return CheckReport(
        check="KRAWT-CASE-CONST",
        n_range=[1, stirling_n_max],
        passed=passed,
        worst_case=stirling_worst,
        constants={key: v for key, v in checks.items() if not isinstance(v, bool)},
        details={key: v for key, v in checks.items() if isinstance(v, bool)},
    )
