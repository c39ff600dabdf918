"""Verification of the comparison steps behind the spherical maximal bound.

Three comparisons take ``M_S`` to a semigroup maximal function:

1. a square-function (summation by parts) comparison of ``M_Sbar`` with the
   Cesaro-averaged ``M_Sen(Sbar)``, with error operators ``R_0``, ``R_1``;
2. pointwise domination ``Sen(Sbar) <~ 3 e^20 Sen(N~) <~ 3 e^20 Sen(N)``;
3. the weak (1,1) maximal ergodic inequality plus interpolation.

Every identity is checked on spectral profiles (radial operators are
determined by them); rational arithmetic is used wherever it is cheap.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, special

from ._validation import check_nonnegative, check_random_state
from .cube import CubeFunction, antipode, level_energies, sphere_means_all
from .exceptions import DomainError
from .krawtchouk import binary_entropy, build_table
from .maximal import marcinkiewicz_bound, maximal_apply, weak_ratio_of_values
from .radial import (
    P_K,
    senate_noise_T_family,
    weights_from_profile,
    RadialOperator,
    apply,
    senate_noise_coeff,
    senate_noise_P,
    senate_noise_T,
    spherical_family,
)
from .reports import CheckReport

__all__ = [
    "SteinReport",
    "ChainBound",
    "BINOM_CONSTANT",
    "r_max_even",
    "r_max_odd",
    "abel_identity_check",
    "difference_identity_check",
    "stein_sums",
    "stein_parseval_check",
    "r_operator_apply",
    "stein_error_check",
    "truncation_checks",
    "ncompare_decomposition",
    "ncompare_measure",
    "senate_chain_check",
    "binom_lb_check",
    "binom_lb_scan",
    "random_doubly_substochastic",
    "ergodic_check",
    "ergodic_suite",
    "lazy_walk",
    "dominates",
    "marcinkiewicz_check",
    "chain_bound",
]

#: constant of the senate comparison, ``3 e^20``
BINOM_CONSTANT = 3.0 * math.exp(20.0)
ERGODIC_CONSTANT = marcinkiewicz_bound(2.0)


def r_max_even(n):
    return (n // 2) // 2


def r_max_odd(n):
    return (n // 2 - 1) // 2


def _radius(parity, k):
    return 2 * k + parity


def abel_identity_check(n):
    """Exact check of the summation-by-parts identities on profiles.

    Even radii: ``S_2r - (1/(r+1)) sum_{k<=r} S_2k
    = (1/(r+1)) sum_{k=1}^r k (S_2k - S_2(k-1))`` for ``r <= r_max_even``;
    odd radii use ``S_{2k+1}`` and ``S_{2k-1}``.
    """
    kappa = build_table(n).exact()
    worst = Fraction(0)
    checked = 0
    for parity, r_max in ((0, r_max_even(n)), (1, r_max_odd(n))):
        for r in range(r_max + 1):
            for x in range(n + 1):
                vals = [kappa[_radius(parity, k)][x] for k in range(r + 1)]
                lhs = vals[r] - sum(vals, Fraction(0)) / (r + 1)
                rhs = sum((k * (vals[k] - vals[k - 1]) for k in range(1, r + 1)),
                          Fraction(0)) / (r + 1)
                worst = max(worst, abs(lhs - rhs))
                checked += 1
    return CheckReport(
        check="ABEL", n=n, passed=worst == 0, worst_violation=float(worst),
        details={"identities_checked": checked, "r_max_even": r_max_even(n),
                 "r_max_odd": r_max_odd(n)})


def difference_identity_check(n):
    """Exact check of the Krawtchouk difference identities.

    ``kappa_x(l) - kappa_x(l-1) = -(2x/n) kappa^{(n-1)}_{x-1}(l-1)`` for
    ``1 <= x, l <= n``; and
    ``kappa_x(l) - kappa_x(l-2) = -(2x/n)(kappa^{(n-1)}_{x-1}(l-1) + kappa^{(n-1)}_{x-1}(l-2))
    = -(4x/n)((n-x)/(n-1)) kappa^{(n-2)}_{x-1}(l-2)`` for ``2 <= l <= n``.
    """
    if n < 2:
        raise DomainError(f"difference identities need n >= 2, got {n}")
    k0 = build_table(n).exact()
    k1 = build_table(n - 1).exact()
    k2 = build_table(n - 2).exact()
    worst = {"one_step": Fraction(0), "two_step_sum": Fraction(0),
             "two_step_collapsed": Fraction(0)}
    for x in range(1, n + 1):
        for ell in range(1, n + 1):
            lhs = k0[x][ell] - k0[x][ell - 1]
            rhs = -Fraction(2 * x, n) * k1[x - 1][ell - 1]
            worst["one_step"] = max(worst["one_step"], abs(lhs - rhs))
            if ell < 2:
                continue
            lhs2 = k0[x][ell] - k0[x][ell - 2]
            mid = -Fraction(2 * x, n) * (k1[x - 1][ell - 1] + k1[x - 1][ell - 2])
            if x <= n - 1:
                collapsed = (-Fraction(4 * x, n) * Fraction(n - x, n - 1)
                             * k2[x - 1][ell - 2])
            else:
                collapsed = Fraction(0)  # factor (n - x) vanishes
            worst["two_step_sum"] = max(worst["two_step_sum"], abs(lhs2 - mid))
            worst["two_step_collapsed"] = max(worst["two_step_collapsed"],
                                              abs(lhs2 - collapsed))
    total = max(worst.values())
    return CheckReport(
        check="KRAWT-DIFF", n=n, passed=total == 0, worst_violation=float(total),
        details={k: float(v) for k, v in worst.items()})


@dataclass
class SteinReport:
    """Square-function multipliers for one dimension.

    ``D_even[x] = sum_{k=1}^{r_max_even} k (kappa_2k(x) - kappa_2k-2(x))**2``
    and ``D_odd`` likewise with odd radii.  ``C_R`` bounds
    ``||max(R_0 f, R_1 f)||_2 / ||f||_2``.
    """

    n: int
    r_max_even: int
    r_max_odd: int
    D_even: np.ndarray
    D_odd: np.ndarray
    C_R: float
    identity_residuals: dict
    D_bound: float = None
    report: CheckReport = None

    def rows(self):
        """``(n, x, D_even, D_odd)`` rows for CSV output."""
        for x in range(self.n + 1):
            yield self.n, x, float(self.D_even[x]), float(self.D_odd[x])


def _stein_exact(n):
    kappa = build_table(n).exact()
    re, ro = r_max_even(n), r_max_odd(n)
    d_even, d_odd = [], []
    for x in range(n + 1):
        d_even.append(sum((k * (kappa[2 * k][x] - kappa[2 * k - 2][x]) ** 2
                           for k in range(1, re + 1)), Fraction(0)))
        d_odd.append(sum((k * (kappa[2 * k + 1][x] - kappa[2 * k - 1][x]) ** 2
                          for k in range(1, ro + 1)), Fraction(0)))
    return d_even, d_odd


def _stein_collapsed(n):
    # uses the (n-2) table; valid for 1 <= x <= n - 1, and x = 0, n give 0
    re, ro = r_max_even(n), r_max_odd(n)
    small = build_table(n - 2).exact() if n >= 2 else None
    d_even, d_odd = [Fraction(0)] * (n + 1), [Fraction(0)] * (n + 1)
    for x in range(1, n):
        factor = Fraction(4 * x * (n - x), n * (n - 1))
        d_even[x] = sum((k * (factor * small[x - 1][2 * k - 2]) ** 2
                         for k in range(1, re + 1)), Fraction(0))
        d_odd[x] = sum((k * (factor * small[x - 1][2 * k - 1]) ** 2
                        for k in range(1, ro + 1)), Fraction(0))
    return d_even, d_odd


def stein_sums(n, c_cert=None):
    """Multipliers ``D_even``, ``D_odd`` and the constant ``C_R`` for one ``n``.

    Computed exactly and cross-checked against the collapsed form through the
    ``(n - 2)`` table; ``D[1]`` is checked against ``sum_k 16 k / n**2``.  With
    ``c_cert`` the bound ``D <= 24/c_cert**2 + 1`` is checked for
    ``1 <= x <= n/2``.
    """
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    d_even, d_odd = _stein_exact(n)
    residuals = {"collapsed": 0.0, "x1_closed_form": 0.0, "x0": 0.0}
    if n >= 2:
        c_even, c_odd = _stein_collapsed(n)
        residuals["collapsed"] = float(max(
            max(abs(a - b) for a, b in zip(d_even, c_even)),
            max(abs(a - b) for a, b in zip(d_odd, c_odd))))
        closed_e = sum(Fraction(16 * k, n * n) for k in range(1, r_max_even(n) + 1))
        closed_o = sum(Fraction(16 * k, n * n) for k in range(1, r_max_odd(n) + 1))
        residuals["x1_closed_form"] = float(max(abs(d_even[1] - closed_e),
                                                abs(d_odd[1] - closed_o)))
    residuals["x0"] = float(max(d_even[0], d_odd[0]))
    D_even = np.array([float(v) for v in d_even])
    D_odd = np.array([float(v) for v in d_odd])
    C_R = math.sqrt(float(max(a + b for a, b in zip(d_even, d_odd)) / 2))
    bound = None
    passed = all(v == 0 for v in residuals.values())
    worst = None
    if c_cert is not None:
        bound = 24.0 / c_cert**2 + 1.0
        half = n // 2
        if half >= 1:
            peak = max(max(D_even[1:half + 1]), max(D_odd[1:half + 1]))
            worst = bound - peak
            passed = passed and peak <= bound
    report = CheckReport(
        check="STEIN-D", n=n, passed=passed, worst_violation=worst,
        constants={"C_R": C_R, "D_bound": bound, "c_cert": c_cert},
        details={"residuals": residuals})
    return SteinReport(n, r_max_even(n), r_max_odd(n), D_even, D_odd, C_R,
                       residuals, bound, report)


def r_operator_apply(n, parity, f):
    """Error operator ``R_0`` (``parity=0``) or ``R_1`` (``parity=1``).

    ``(R f)(x) = sqrt((1/2) sum_{k=1}^{r_max} k ((S_{2k+p} - S_{2k-2+p}) f)(x)**2)``.
    """
    if parity not in (0, 1):
        raise ValueError("parity must be 0 (even) or 1 (odd)")
    f = f if isinstance(f, CubeFunction) else CubeFunction.from_values(f)
    if f.n != n:
        raise DomainError(f"function has n={f.n}, expected {n}")
    s = sphere_means_all(np.asarray(f.values, dtype=np.float64)).s
    r_max = r_max_even(n) if parity == 0 else r_max_odd(n)
    acc = np.zeros(1 << n)
    for k in range(1, r_max + 1):
        diff = s[:, 2 * k + parity] - s[:, 2 * k - 2 + parity]
        acc += k * diff * diff
    return CubeFunction(n, np.sqrt(0.5 * acc))


def stein_parseval_check(n, trials=20, seed=0, rtol=1e-9):
    """``||R_p f||**2 = (1/2) sum_x ||E_x f||**2 D_p[x]`` on random ``f``."""
    rng = check_random_state(seed)
    stein = stein_sums(n)
    worst = 0.0
    for _ in range(trials):
        f = rng.standard_normal(1 << n)
        energies = level_energies(f)
        for parity, D in ((0, stein.D_even), (1, stein.D_odd)):
            direct = float(np.sum(r_operator_apply(n, parity, f).values ** 2))
            spectral = 0.5 * float(np.dot(energies, D))
            scale = max(abs(spectral), float(np.dot(f, f)) * 1e-3)
            worst = max(worst, abs(direct - spectral) / scale)
    return CheckReport(check="STEIN-R", n=n, passed=worst <= rtol,
                       worst_violation=worst, params={"trials": trials, "seed": seed})


def stein_error_check(n, trials=500, seed=0, stein=None):
    """``||M_Sbar f - M_Sen(Sbar) f||_2 <= C_R ||f||_2`` on random nonnegative ``f``.

    Also checks the pointwise parity-split form
    ``M_Sbar f <= max(M_even f, M_odd f) + max(R_0 f, R_1 f)``, where
    ``M_even`` takes Cesaro means over even radii only (``M_odd`` odd), and
    records whether ``|M_Sbar f - M_Sen(Sbar) f| <= sqrt(R_0 f^2 + R_1 f^2)``
    holds in norm (it can fail for small ``n``).  ``worst_violation`` is the
    largest ``||M_Sbar f - M_Sen(Sbar) f|| / ||f|| - C_R``.
    """
    rng = check_random_state(seed)
    stein = stein or stein_sums(n)
    half = n // 2
    cnt = np.arange(1, half + 2)
    worst_gap, worst_r, worst_split = -np.inf, -np.inf, -np.inf
    for t in range(trials):
        f = _random_nonneg(rng, 1 << n, t)
        s = sphere_means_all(f).s[:, : half + 1]
        m_bar = s.max(axis=1)
        m_sen = (np.cumsum(s, axis=1) / cnt).max(axis=1)
        err = float(np.linalg.norm(m_bar - m_sen))
        r0 = r_operator_apply(n, 0, f).values
        r1 = r_operator_apply(n, 1, f).values
        r_norm = math.sqrt(float(np.sum(r0 * r0) + np.sum(r1 * r1)))
        nf = float(np.linalg.norm(f))
        worst_gap = max(worst_gap, err / nf - stein.C_R)
        worst_r = max(worst_r, (err - r_norm) / nf)
        m_par = np.zeros_like(m_bar)
        for parity in (0, 1):
            sub = s[:, parity::2]
            if sub.shape[1]:
                ces = np.cumsum(sub, axis=1) / np.arange(1, sub.shape[1] + 1)
                m_par = np.maximum(m_par, ces.max(axis=1))
        excess = m_bar - m_par - np.maximum(r0, r1)
        worst_split = max(worst_split, float(excess.max()) / max(1.0, float(f.max())))
    passed = worst_gap <= 1e-12 and worst_split <= 1e-12
    return CheckReport(
        check="STEIN-R", n=n, passed=bool(passed), worst_violation=float(worst_gap),
        constants={"C_R": stein.C_R},
        params={"trials": trials, "seed": seed},
        details={"parity_split_excess": float(worst_split),
                 "max_err_minus_R_over_f": float(worst_r),
                 "R_norm_dominates_error": bool(worst_r <= 1e-12)})


def _random_nonneg(rng, size, t):
    kind = t % 4
    if kind == 0:
        return rng.random(size)
    if kind == 1:
        return rng.random(size) ** rng.uniform(2, 16)
    if kind == 2:
        f = np.zeros(size)
        f[rng.choice(size, size=rng.integers(1, max(2, size // 8) + 1),
                     replace=False)] = 1.0
        return f
    return rng.exponential(size=size) * (rng.random(size) < 0.3) + 1e-9


def truncation_checks(n, f, rtol=1e-12):
    """Pointwise checks for the truncated spherical family.

    * ``M_S f = max(M_Sbar f, iota M_Sbar f)``;
    * ``Sen(S)_k f <= Sen(S)_{floor(n/2)} (f + iota f)`` for ``k > n/2``.

    Integer-valued ``f`` (integer dtype) is checked in exact rational
    arithmetic; float input within ``rtol`` relative to ``max f``.
    """
    values = f.values if isinstance(f, CubeFunction) else np.asarray(f)
    check_nonnegative(values)
    exact = values.dtype == object or np.issubdtype(values.dtype, np.integer)
    s = sphere_means_all(values, exact=exact).s
    half = n // 2
    m_full = s.max(axis=1)
    m_bar = s[:, : half + 1].max(axis=1)
    combined = np.maximum(m_bar, m_bar[::-1]) if not exact else np.array(
        [max(a, b) for a, b in zip(m_bar, m_bar[::-1])], dtype=object)
    scale = 1 if exact else rtol * max(1.0, float(np.max(np.abs(values))))
    diff1 = np.abs(combined - m_full).max()
    g = values + antipode(values)
    s2 = sphere_means_all(g, exact=exact).s
    sen_half = s2[:, : half + 1].sum(axis=1) / (half + 1)
    diff2 = 0 if not exact else Fraction(0)
    prefix = s[:, : half + 1].sum(axis=1)
    for k in range(half + 1, n + 1):
        prefix = prefix + s[:, k]
        sen_k = prefix / (k + 1)
        diff2 = max(diff2, (sen_k - sen_half).max())
    if exact:
        passed = diff1 == 0 and diff2 <= 0
    else:
        passed = diff1 <= scale and diff2 <= scale
    return CheckReport(
        check="TRUNCATION", n=n, passed=bool(passed),
        worst_violation=float(max(diff1, diff2)),
        details={"max_identity_residual": float(diff1),
                 "max_senate_excess": float(diff2), "exact": bool(exact)})


def _tau(P):
    return -math.log1p(-2.0 * P)


def ncompare_measure(P, order=48):
    """Discrete form of ``Sen(N~)_P = sum_j mu_j Sen(N)_{T_j}``.

    The continuous part ``(T e^-T / 2P) dT`` on ``[0, tau]`` is discretized
    by Gauss-Legendre; the atom ``tau f(tau)`` sits at ``T = tau``.  At
    ``P = 1/2`` (``tau = inf``) the atom vanishes and generalized
    Gauss-Laguerre handles the half line.  Returns ``(nodes, weights)``;
    weights are positive.
    """
    if not 0 < P <= 0.5:
        raise DomainError(f"need 0 < P <= 1/2, got {P}")
    if P == 0.5:
        nodes, weights = special.roots_genlaguerre(order, 1.0)
        return nodes, weights
    tau = _tau(P)
    x, wq = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * tau * (x + 1.0)
    weights = 0.5 * tau * wq * nodes * np.exp(-nodes) / (2.0 * P)
    atom = tau * math.exp(-tau) / (2.0 * P)
    return np.append(nodes, tau), np.append(weights, atom)


def senate_chain_check(n, f, slack=1e-10, order=48, grid_points=64):
    """Pointwise ``M_Sen(Sbar) f <= 3e^20 M_{Sen(N~)} f <= 3e^20 M_{Sen(N)} f``.

    ``Sen(N~)`` is taken over ``{P_K : K <= n/2}`` and ``Sen(N)`` over the
    default ``T`` grid together with the quadrature nodes of every
    ``Sen(N~)_{P_K}`` (see :func:`ncompare_measure`) and ``T = 0``, so the second step is
    a max-over-mixture inequality.  Also checks the coefficient domination
    ``Sen(S)_K <= 3e^20 Sen(N~)_{P_K}`` through sphere weights.
    """
    from .radial import OperatorFamily, default_T_grid, senate_family, truncated_spherical_family

    values = np.asarray(f.values if isinstance(f, CubeFunction) else f, dtype=np.float64)
    check_nonnegative(values)
    half = n // 2
    sen_bar = senate_family(truncated_spherical_family(n))
    # T = 0 is the identity, the limit that Sen(N~)_0 matches
    members, nodes = [], [np.zeros(1), default_T_grid(n, grid_points)]
    coeff_ok = True
    for K in range(half + 1):
        P = float(P_K(n, K))
        op = senate_noise_P(n, P)
        members.append(op)
        coeff_ok &= dominates(sen_bar[K], op, BINOM_CONSTANT)
        if P > 0:
            nodes.append(ncompare_measure(P, order)[0])
    tilde = OperatorFamily(n, members, [m.tag.get("P", 0.0) for m in members],
                           "continuous", {"family": "Sen(N~)", "n": n})
    grid = np.unique(np.concatenate(nodes))
    sen_n = OperatorFamily(n, [senate_noise_T(n, T) for T in grid], grid,
                           "continuous", {"family": "Sen(N)", "n": n})
    m1 = maximal_apply(sen_bar, values).values.values
    m2 = maximal_apply(tilde, values).values.values
    m3 = maximal_apply(sen_n, values).values.values
    scale = max(1.0, float(values.max()))
    step1 = float(np.max(m1 - BINOM_CONSTANT * m2)) / scale
    step2 = float(np.max(m2 - m3)) / scale
    passed = coeff_ok and step1 <= slack and step2 <= slack
    return CheckReport(
        check="BINOM-LB", n=n, passed=bool(passed), worst_violation=max(step1, step2),
        params={"grid_points": int(grid.size), "order": order},
        details={"coefficient_domination": bool(coeff_ok),
                 "sen_sbar_excess": step1, "sen_ntilde_excess": step2})


def ncompare_decomposition(n, P, tol_mass=1e-10, tol_spectral=1e-8):
    """Check that ``Sen(N~)_P`` is a probability mixture of ``Sen(N)_T``.

    With ``f(t) = e^-t / 2P`` and ``tau = -ln(1 - 2P)`` the mixture is an
    atom ``tau f(tau)`` at ``T = tau`` plus density ``-T f'(T)`` on
    ``[0, tau]``.  Checks nonnegativity, unit mass (by quadrature) and the
    spectral profile against the closed form of ``Sen(N~)_P``.
    """
    if not 0 < P < 0.5:
        raise DomainError(f"need 0 < P < 1/2, got {P}")
    tau = _tau(P)
    atom = tau * math.exp(-tau) / (2.0 * P)

    def density(T):
        return T * math.exp(-T) / (2.0 * P)

    mass = atom + integrate.quad(density, 0.0, tau, epsabs=0.0, epsrel=1e-12)[0]
    sample = np.linspace(0.0, tau, 257)
    nonneg = atom >= 0 and all(density(T) >= 0 for T in sample)
    target = senate_noise_P(n, P).lam
    combo = np.empty(n + 1)
    for x in range(n + 1):
        def integrand(T, x=x):
            return density(T) * senate_noise_T(n, T).lam[x] if T > 0 else 0.0
        combo[x] = atom * senate_noise_T(n, tau).lam[x] + integrate.quad(
            integrand, 0.0, tau, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    spectral = float(np.max(np.abs(combo - target)))
    mass_err = abs(mass - 1.0)
    passed = nonneg and mass_err <= tol_mass and spectral <= tol_spectral
    return CheckReport(
        check="N-COMPARE", n=n, passed=bool(passed),
        worst_violation=max(mass_err, spectral),
        params={"P": P, "tau": tau},
        details={"mass": mass, "mass_error": mass_err, "spectral_error": spectral,
                 "weights_nonnegative": bool(nonneg), "atom": atom})


def _log_binom_pmf(n, q, k):
    return (special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
            + special.xlogy(k, q) + special.xlog1py(n - k, -q))


def binom_lb_check(n, K, a=None):
    """Check ``Sen(S)_K <= 3 e^20 Sen(N~)_{P_K}`` coefficientwise.

    Main claim: ``3 e^20 a_k (K+1) >= 1`` for ``0 <= k <= K``.  Supporting
    bounds: ``a_0 >= 1/(8K)``; ``B(n, k/n, k) >= 1/(3 sqrt k)``; the
    log-derivative formula (by central differences); the window bound
    ``ln B(n,p,k)/B(n,k/n,k) >= -2`` and ``a_k >= 1/(12 e^2 K)`` when
    ``k + sqrt k <= n/2``, and ``a_k >= 1/(3 e^20 K)`` otherwise.
    """
    if n < 9 or not 0 <= K <= n / 2:
        raise DomainError(f"need n >= 9 and 0 <= K <= n/2, got n={n}, K={K}")
    if a is None:
        a = senate_noise_coeff(n, K)
    main = BINOM_CONSTANT * a * (K + 1)
    main_ok = bool(np.all(main >= 1.0))
    support = {"a0": True, "peak": True, "log_deriv": True, "window": True,
               "regime_lower": True}
    worst_support = {}
    if K >= 1:
        support["a0"] = bool(a[0] >= 1.0 / (8 * K))
        worst_support["a0"] = float(a[0] * 8 * K)
    for k in range(1, K + 1):
        q = k / n
        peak = math.exp(_log_binom_pmf(n, q, k))
        if peak < 1.0 / (3.0 * math.sqrt(k)):
            support["peak"] = False
        for qq in (0.5 * q, q, min(0.49, q + math.sqrt(k) / n)):
            h = 1e-6 * qq
            fd = (_log_binom_pmf(n, qq + h, k) - _log_binom_pmf(n, qq - h, k)) / (2 * h)
            exact = (k - n * qq) / (qq * (1 - qq))
            if abs(fd - exact) > 1e-5 * max(1.0, abs(exact)):
                support["log_deriv"] = False
        if k + math.sqrt(k) <= n / 2:
            p_hi = (k + math.sqrt(k)) / n
            if _log_binom_pmf(n, p_hi, k) - _log_binom_pmf(n, q, k) < -2.0:
                support["window"] = False
            if a[k] < 1.0 / (12.0 * math.e**2 * K):
                support["regime_lower"] = False
        elif a[k] < 1.0 / (BINOM_CONSTANT * K):
            support["regime_lower"] = False
    empirical = float(np.max(1.0 / ((K + 1) * a)))
    return CheckReport(
        check="BINOM-LB", n=n, passed=main_ok and all(support.values()),
        worst_violation=float(main.min()),
        params={"K": K, "P_K": float(P_K(n, K)), "peak_form": "B(n, k/n, k)"},
        constants={"empirical_binom": empirical, "binom_constant": BINOM_CONSTANT},
        details={"main": main_ok, **support, **worst_support})


def binom_lb_scan(n_min=9, n_max=256):
    """Run :func:`binom_lb_check` for every ``n`` and ``K <= n/2``."""
    failures = []
    worst_ratio = math.inf
    empirical = 0.0
    count = 0
    for n in range(n_min, n_max + 1):
        for K in range(n // 2 + 1):
            rep = binom_lb_check(n, K)
            count += 1
            worst_ratio = min(worst_ratio, rep.worst_violation)
            empirical = max(empirical, rep.constants["empirical_binom"])
            if not rep.passed:
                failures.append({"n": n, "K": K, **rep.details})
    return CheckReport(
        check="BINOM-LB", n_range=[n_min, n_max], passed=not failures,
        worst_violation=worst_ratio,
        constants={"empirical_binom": empirical, "binom_constant": BINOM_CONSTANT},
        details={"pairs_checked": count, "failures": failures[:20]})


def random_doubly_substochastic(dim, rng, sinkhorn_iter=500):
    """Random nonnegative matrix with all row and column sums at most 1.

    Positive random entries are Sinkhorn-balanced, divided by the largest
    remaining row or column sum, then shrunk by a factor in ``[1/2, 1]``.
    """
    rng = check_random_state(rng)
    A = rng.random((dim, dim)) ** rng.uniform(1.0, 6.0)
    A += 1e-12
    for _ in range(sinkhorn_iter):
        A /= A.sum(axis=1, keepdims=True)
        A /= A.sum(axis=0, keepdims=True)
    A /= max(A.sum(axis=1).max(), A.sum(axis=0).max(), 1.0)
    return A * rng.uniform(0.5, 1.0)


def lazy_walk(n):
    """Lazy hypercube walk ``(I + S_1)/2`` as a radial operator."""
    w = np.zeros(n + 1)
    w[0] += 0.5
    if n >= 1:
        w[1] += 0.5
    else:
        w[0] += 0.5
    lam = w @ build_table(n).as_float()
    return RadialOperator(n, lam, w, {"kind": "lazy_walk"})


def _apply_matrix(A, g):
    if isinstance(A, RadialOperator):
        return apply(A, g, "spectral").values
    return A @ g


def _check_contraction(A, atol=1e-12):
    if isinstance(A, RadialOperator):
        w = A.sphere_weights()
        if np.any(w < -atol) or w.sum() > 1 + atol:
            raise DomainError("radial operator must have nonnegative weights summing to <= 1")
        return
    A = np.asarray(A)
    if np.any(A < 0):
        raise DomainError("A must be entrywise nonnegative")
    if A.sum(axis=1).max() > 1 + atol or A.sum(axis=0).max() > 1 + atol:
        raise DomainError("A must have row and column sums <= 1")


def ergodic_check(A, f, T_max=50):
    """Weak (1,1) ratio of the Cesaro maximal function ``max_{t<=T} Sen(A)_t f``.

    Returns the ratio for every ``T <= T_max``; the maximal ergodic
    inequality bounds each by 1.  ``A`` is a dense nonnegative matrix or a radial operator, with
    row and column sums at most 1.  ``f`` may be signed.
    """
    _check_contraction(A)
    f = np.asarray(f.values if isinstance(f, CubeFunction) else f, dtype=np.float64)
    l1 = float(np.abs(f).sum())
    if l1 == 0:
        raise DomainError("weak ratio undefined for f = 0")
    g = f.copy()
    total = f.copy()
    running = f.copy()
    ratios = [weak_ratio_of_values(running, l1)]
    for t in range(1, T_max + 1):
        g = _apply_matrix(A, g)
        total += g
        np.maximum(running, total / (t + 1), out=running)
        ratios.append(weak_ratio_of_values(running, l1))
    return np.array(ratios)


def ergodic_suite(trials=1000, dim_max=64, T_max=50, seed=0, lazy_n_max=10):
    """Randomized and hypercube instances of the maximal ergodic inequality."""
    children = np.random.SeedSequence(seed).spawn(trials)
    worst = 0.0
    worst_case = None
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        dim = int(rng.integers(2, dim_max + 1))
        if i % 10 == 9:
            A = np.eye(dim)[rng.permutation(dim)] * rng.uniform(0.5, 1.0)
        else:
            A = random_doubly_substochastic(dim, rng)
        f = rng.standard_normal(dim) * (rng.random(dim) < rng.uniform(0.1, 1.0))
        if not np.any(f):
            f[0] = 1.0
        r = float(ergodic_check(A, f, T_max).max())
        if r > worst:
            worst, worst_case = r, {"trial": i, "dim": dim}
    lazy_worst = 0.0
    for n in range(lazy_n_max + 1):
        delta = np.zeros(1 << n)
        delta[0] = 1.0
        lazy_worst = max(lazy_worst, float(ergodic_check(lazy_walk(n), delta, T_max).max()))
    passed = worst <= 1 + 1e-9 and lazy_worst <= 1 + 1e-9
    return CheckReport(
        check="ERGODIC-W11", passed=passed, worst_violation=max(worst, lazy_worst),
        params={"trials": trials, "dim_max": dim_max, "T_max": T_max, "seed": seed,
                "lazy_n_max": lazy_n_max},
        worst_case=worst_case,
        details={"random_worst": worst, "lazy_walk_worst": lazy_worst})


def dominates(op_a, op_b, c=1.0, atol=1e-15):
    """``op_a <= c op_b`` entrywise, via sphere weights (rows are constant on spheres)."""
    return bool(np.all(op_a.sphere_weights() <= c * op_b.sphere_weights() + atol))


def marcinkiewicz_check(n, trials=1000, grid_points=64, seed=0):
    """``||M_Sen(N) f||_2 <= 2 sqrt2 ||f||_2`` on random nonnegative ``f``.

    ``Sen(N)`` is sampled on the default geometric ``T`` grid.  Members act
    through their sphere weights (one table of spherical means per ``f``);
    the first ``f`` is cross-checked against the spectral route.
    """
    rng = check_random_state(seed)
    family = senate_noise_T_family(n, points=grid_points)
    W = np.array([weights_from_profile(m.lam) for m in family.members])
    bound = marcinkiewicz_bound(2.0)
    worst, violations, route_err = 0.0, 0, 0.0
    for t in range(trials):
        f = _random_nonneg(rng, 1 << n, t)
        mf = (sphere_means_all(f).s @ W.T).max(axis=1)
        if t == 0:
            route_err = float(np.max(np.abs(mf - maximal_apply(family, f).values.values)))
        r = float(np.linalg.norm(mf) / np.linalg.norm(f))
        worst = max(worst, r)
        violations += r > bound
    passed = violations == 0 and route_err <= 1e-9
    return CheckReport(
        check="MARCINKIEWICZ-2", n=n, passed=bool(passed), worst_violation=worst,
        params={"trials": trials, "seed": seed, "grid": family.tag["grid"]},
        constants={"bound": bound},
        details={"violations": int(violations), "route_error": route_err})


@dataclass
class ChainBound:
    """Explicit upper bound on ``||M_S||_{2->2}`` assembled from the comparisons."""

    n: int
    c_cert: float
    C_R: float
    binom_constant: float = BINOM_CONSTANT
    ergodic_constant: float = ERGODIC_CONSTANT
    truncation_factor: float = math.sqrt(2.0)
    doubling_factor: float = 2.0
    total: float = None
    empirical_binom_constant: float = None
    empirical_total: float = None
    small_n_fallback: bool = False
    random_checks: dict = field(default_factory=dict)

    def to_dict(self):
        from .reports import to_jsonable

        return to_jsonable(self.__dict__)


def chain_bound(n, c_cert=None, trials=20, seed=0, check_n_max=14):
    """End-to-end bound ``sqrt2 (C_R + 3 e^20 2 sqrt2)``; ``n + 1`` when ``n < 9``.

    Also records the non-certified chain obtained by replacing ``3 e^20`` with
    the measured worst coefficient ratio, and checks
    ``||M_S f|| <= total ||f||`` on random ``f`` when ``n <= check_n_max``.
    """
    rng = check_random_state(seed)
    if n < 9:
        cb = ChainBound(n, c_cert, float("nan"), total=float(n + 1),
                        small_n_fallback=True)
    else:
        stein = stein_sums(n, c_cert)
        empirical = 0.0
        for K in range(n // 2 + 1):
            a = senate_noise_coeff(n, K)
            empirical = max(empirical, float(np.max(1.0 / ((K + 1) * a))))
        sqrt2 = math.sqrt(2.0)
        total = sqrt2 * (stein.C_R + BINOM_CONSTANT * ERGODIC_CONSTANT)
        cb = ChainBound(n, c_cert, stein.C_R, total=total,
                        empirical_binom_constant=empirical,
                        empirical_total=sqrt2 * (stein.C_R + empirical * ERGODIC_CONSTANT))
    if n <= check_n_max:
        family = spherical_family(n)
        worst = 0.0
        for t in range(trials):
            f = _random_nonneg(rng, 1 << n, t)
            mf = maximal_apply(family, f).values.values
            worst = max(worst, float(np.linalg.norm(mf) / np.linalg.norm(f)))
        cb.random_checks = {"trials": trials, "max_ratio": worst,
                            "holds": bool(worst <= cb.total)}
    return cb
