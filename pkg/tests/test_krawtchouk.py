import math
from fractions import Fraction

import numpy as np
import pytest

from cubemax.exceptions import DomainError
from cubemax.krawtchouk import (
    build_table,
    decay_constants,
    kappa_real,
    krawtchouk_direct,
    roots,
    table_rows,
    verify_case_constants,
    verify_orthogonality,
    verify_roots,
    verify_symmetries,
)


def oracle_kappa(n, k, x):
    """Defining alternating sum, independent of the table recurrence."""
    total = sum((-1) ** j * math.comb(x, j) * math.comb(n - x, k - j) for j in range(k + 1))
    return Fraction(total, math.comb(n, k))


@pytest.mark.parametrize("n", [0, 1, 2, 5, 9, 13])
def test_table_matches_defining_sum(n):
    t = build_table(n)
    for k in range(n + 1):
        for x in range(n + 1):
            assert t.kappa(k, x) == oracle_kappa(n, k, x)
            assert Fraction(krawtchouk_direct(n, k, x), math.comb(n, k)) == oracle_kappa(n, k, x)


def test_known_values():
    t3 = build_table(3)
    assert [t3.kappa(1, x) for x in range(4)] == [1, Fraction(1, 3), Fraction(-1, 3), -1]
    assert build_table(4).kappa(2, 2) == Fraction(-1, 3)
    assert t3.kappa(1, 2) == t3.kappa(2, 1) == Fraction(-1, 3)
    assert build_table(2).kappa(1, 2) == -1


def test_kappa_at_zero_is_one():
    t = build_table(11)
    assert all(t.kappa(k, 0) == 1 for k in range(12))


def test_float_view_relative_error():
    t = build_table(64)
    fl = t.as_float()
    worst = 0.0
    for k in range(65):
        for x in range(65):
            q = t.kappa(k, x)
            if q:
                worst = max(worst, abs(fl[k, x] - float(q)) / abs(float(q)))
    assert worst <= 1e-12
    with pytest.raises(ValueError):
        fl[0, 0] = 2.0


def test_table_rows_lowest_terms():
    rows = list(table_rows(build_table(4)))
    assert (4, 2, 2, -1, 3, pytest.approx(-1 / 3)) in rows
    for _, _, _, num, den, _ in rows:
        assert math.gcd(num, den) == 1


def test_kappa_real_matches_table_at_integers():
    for k in range(8):
        for x in range(8):
            assert kappa_real(7, k, x) == pytest.approx(float(oracle_kappa(7, k, x)), abs=1e-13)
    assert float(kappa_real(7, 3, 2.5, prec=50)) == pytest.approx(kappa_real(7, 3, 2.5), abs=1e-12)


def test_orthogonality_small_cases():
    assert verify_orthogonality(build_table(0)).passed
    t = build_table(2)
    s = sum(t.kappa(1, x) ** 2 * math.comb(2, x) for x in range(3))
    assert s == 2 == Fraction(4, math.comb(2, 1))


@pytest.mark.parametrize("n", [0, 1, 7, 16])
def test_symmetry_reports_pass(n):
    assert verify_symmetries(build_table(n)).passed
    assert verify_orthogonality(build_table(n)).passed


def test_roots_examples():
    np.testing.assert_allclose(roots(4, 2), [1, 3], atol=1e-12)
    np.testing.assert_allclose(roots(2, 1), [1], atol=1e-12)
    r = roots(6, 3)
    assert r.size == 3 and r.min() >= -1e-9 and r.max() <= 6 + 1e-9


def test_roots_n2_k2_outside_window():
    # the location window for k = n collapses to {n/2}; the real roots are not there
    np.testing.assert_allclose(roots(2, 2), [1 - 1 / math.sqrt(2), 1 + 1 / math.sqrt(2)],
                               atol=1e-12)


def test_roots_half_range_pass():
    rep = verify_roots(24, k_range="half")
    assert rep.passed, rep.details


def test_roots_are_zeros():
    for n, k in [(10, 3), (17, 8), (30, 20)]:
        for r in roots(n, k):
            assert abs(kappa_real(n, k, r, prec=50)) < 1e-9


def test_decay_constants_pinned():
    dc = decay_constants(64)
    expected = {8: 1.2284, 16: 1.3035, 32: 1.3439, 64: 1.3649}
    for n, c in expected.items():
        assert dc.c_emp[n] == pytest.approx(c, abs=1e-4)
    assert dc.c2 == pytest.approx(math.log(3), rel=1e-12)
    assert dc.c_cert == pytest.approx(math.log(3), rel=1e-12)
    assert dc.report.passed


def test_decay_constants_oracle_scan():
    # independent float scan over the defining sum
    n = 12
    best = min(-(n / (k * x)) * math.log(abs(float(oracle_kappa(n, k, x))))
               for k in range(1, 7) for x in range(1, 7) if oracle_kappa(n, k, x) != 0)
    assert decay_constants(12).c_emp[12] == pytest.approx(best, rel=1e-12)


def test_decay_constants_rejects_small_range():
    with pytest.raises(DomainError):
        decay_constants(1)


def test_case_constants():
    rep = verify_case_constants()
    assert rep.passed
    assert rep.constants["ymax2_ratio"] == pytest.approx(0.4816 / 0.5184)
    assert math.comb(4, 2) >= math.exp(4 * math.log(2)) / math.sqrt(8)
