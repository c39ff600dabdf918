import math

import numpy as np
import pytest

from cubemax.cube import CubeFunction
from cubemax.exceptions import DomainError
from cubemax.krawtchouk import build_table
from cubemax.radial import (
    P_K,
    antipodal,
    apply,
    identity,
    noise_p,
    noise_t,
    profile_from_weights,
    senate_discrete,
    senate_noise_coeff,
    senate_noise_P,
    senate_noise_P_weights,
    senate_noise_T,
    senate_noise_T_family,
    spherical,
    spherical_family,
    weights_from_profile,
)
from scipy import integrate


def test_spherical_profiles():
    np.testing.assert_allclose(spherical(3, 1).lam, [1, 1 / 3, -1 / 3, -1])
    np.testing.assert_allclose(spherical(5, 0).lam, 1)
    np.testing.assert_allclose(spherical(5, 5).lam, [(-1) ** x for x in range(6)])
    np.testing.assert_allclose(antipodal(5).lam, spherical(5, 5).lam)


def test_spherical_matrix_is_sphere_average():
    M = spherical(3, 2).matrix()
    for x in range(8):
        for y in range(8):
            assert M[x, y] == pytest.approx((bin(x ^ y).count("1") == 2) / 3)


def test_noise_limits():
    np.testing.assert_allclose(noise_t(6, 0).lam, 1)
    np.testing.assert_allclose(noise_t(6, math.inf).lam, [1, 0, 0, 0, 0, 0, 0])
    np.testing.assert_allclose(noise_p(6, 0).lam, 1)
    np.testing.assert_allclose(noise_p(6, 0.5).lam, [1, 0, 0, 0, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(noise_p(6, -math.expm1(-1) / 2).lam, noise_t(6, 1).lam,
                               atol=1e-12)


def test_noise_eigenvalue_is_exponential():
    np.testing.assert_allclose(noise_t(7, 0.3).lam, np.exp(-0.3 * np.arange(8)), rtol=1e-12)


def test_senate_discrete():
    fam = spherical_family(3)
    np.testing.assert_allclose(senate_discrete(fam, 0).lam, fam[0].lam)
    np.testing.assert_allclose(senate_discrete(fam, 1).lam, (1 + fam[1].lam) / 2)
    np.testing.assert_allclose(senate_discrete(fam, 3).sphere_weights(), [0.25] * 4)


def test_senate_noise_T_quadrature_oracle():
    n, T = 6, 2.0
    op = senate_noise_T(n, T)
    for x in range(n + 1):
        val = integrate.quad(lambda t: math.exp(-t * x), 0, T)[0] / T
        assert op.lam[x] == pytest.approx(val, abs=1e-12)
    np.testing.assert_allclose(senate_noise_T(n, 1e-9).lam, 1, atol=1e-8)
    w = senate_noise_T(n, T, with_weights=True).w
    np.testing.assert_allclose(profile_from_weights(w), op.lam, atol=1e-10)


def test_senate_noise_P_oracle():
    n, P = 7, 0.3
    op = senate_noise_P(n, P)
    for x in range(n + 1):
        val = integrate.quad(lambda p: (1 - 2 * p) ** x, 0, P)[0] / P
        assert op.lam[x] == pytest.approx(val, abs=1e-12)
    np.testing.assert_allclose(senate_noise_P(n, 0.5).lam, 1 / (np.arange(n + 1) + 1),
                               atol=1e-14)
    np.testing.assert_allclose(profile_from_weights(op.w), op.lam, atol=1e-10)


def test_senate_noise_P_weights_quadrature():
    n, P = 9, 0.2
    w = senate_noise_P_weights(n, P)
    for k in range(n + 1):
        val = integrate.quad(lambda p: math.comb(n, k) * p**k * (1 - p) ** (n - k), 0, P,
                             epsabs=1e-15)[0] / P
        assert w[k] == pytest.approx(val, rel=1e-9, abs=1e-15)


def test_P_K_and_coefficients():
    assert P_K(20, 0) == 0
    assert P_K(20, 4) == pytest.approx(6 / 20)
    assert P_K(10, 5) == 0.5
    np.testing.assert_allclose(senate_noise_coeff(20, 0), [1.0])
    a = senate_noise_coeff(40, 6)
    assert a.shape == (7,)
    assert a[0] >= 1 / (8 * 6)


def test_weights_from_profile_roundtrip(rng):
    w = rng.random(9)
    w /= w.sum()
    np.testing.assert_allclose(weights_from_profile(profile_from_weights(w)), w, atol=1e-12)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_apply_routes_agree(n, rng):
    f = rng.random(1 << n)
    op = senate_noise_P(n, 0.2)
    a = apply(op, f, "spectral").values
    b = apply(op, f, "direct").values
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


def test_apply_identity_and_stochastic(rng):
    f = rng.random(16)
    np.testing.assert_allclose(apply(identity(4), f).values, f)
    np.testing.assert_allclose(apply(noise_t(4, 0.7), np.ones(16)).values, 1)


def test_apply_dimension_mismatch():
    with pytest.raises(Exception):
        apply(identity(3), np.ones(16))


def test_operator_composition():
    a, b = noise_t(5, 0.2), noise_t(5, 0.5)
    np.testing.assert_allclose((a @ b).lam, noise_t(5, 0.7).lam, atol=1e-12)


def test_domain_errors():
    with pytest.raises(DomainError):
        noise_p(4, 0.7)
    with pytest.raises(DomainError):
        senate_noise_T(4, -1)


def test_family_grid_recorded():
    fam = senate_noise_T_family(6)
    assert len(fam) == 64
    assert fam.tag["grid"]["points"] == 64
    assert fam.tag["grid"]["min"] == pytest.approx(1 / 36)
    assert fam.tag["grid"]["max"] == pytest.approx(60)
