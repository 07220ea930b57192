import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ballsquare.errors import ParameterError
from ballsquare.kernels import (KernelSpec, ball_symbol, binomial_coefficients,
                                grad_riesz_magnitude, profile_table, riesz_value,
                                smoothed_riesz_profile, sphere_area, tau, unit_ball_volume)


def test_binomial_small_orders():
    assert binomial_coefficients(1) == [1]
    assert binomial_coefficients(2) == [2, -1]
    assert binomial_coefficients(3) == [3, -3, 1]


@given(st.integers(1, 20))
def test_binomial_coefficients_sum_to_one(k):
    c = binomial_coefficients(k)
    assert len(c) == k and sum(c) == 1
    # 1 - sum c_j s^j == (1 - s)^k as integer polynomials
    poly = np.polynomial.polynomial.polysub([1], [0] + c)
    assert np.array_equal(poly, np.polynomial.polynomial.polypow([1, -1], k))


@pytest.mark.parametrize("k", [0, 21, 2.5])
def test_binomial_order_bounds(k):
    with pytest.raises(ParameterError):
        binomial_coefficients(k)


def test_kernel_spec():
    assert KernelSpec.ball(2).support_radius == 1
    b = KernelSpec.binomial(3, 4)
    assert b.support_radius == 4 and b.coefficients() == [4, -6, 4, -1]
    assert KernelSpec.iterate(2, 3).coefficients() == [0, 0, 1]
    with pytest.raises(ParameterError):
        KernelSpec("ball", 2, 2)
    with pytest.raises(ParameterError):
        KernelSpec("gauss", 2, 1)


def test_tau_values():
    assert tau(1.0, 2) == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert tau(2.0, 3) == pytest.approx(1 / (4 * math.pi), rel=1e-14)
    for bad in (0.0, 2.0, -1.0, 2.5):
        with pytest.raises(ParameterError):
            tau(bad, 2)


def test_riesz_values():
    assert riesz_value(1.0, 2, [1.0, 0.0]) == pytest.approx(1 / (2 * math.pi))
    assert riesz_value(1.0, 2, [0.0, 2.0]) == pytest.approx(1 / (4 * math.pi))
    assert riesz_value(1.3, 3, [0.6, 0.8, 0.0]) == pytest.approx(tau(1.3, 3))
    with pytest.raises(ParameterError):
        riesz_value(1.0, 2, [0.0, 0.0])


@settings(max_examples=30)
@given(st.floats(0.1, 1.9), st.floats(0.1, 5.0))
def test_grad_homogeneity(alpha, r):
    a = grad_riesz_magnitude(alpha, 2, [r, 0.0])
    b = grad_riesz_magnitude(alpha, 2, [2 * r, 0.0])
    assert b / a == pytest.approx(2 ** (alpha - 3), rel=1e-12)


def test_grad_values():
    assert grad_riesz_magnitude(1.0, 2, [1.0, 0.0]) == pytest.approx(1 / (2 * math.pi))
    assert grad_riesz_magnitude(1.0, 2, [2.0, 0.0]) == pytest.approx(1 / (8 * math.pi))
    with pytest.raises(ParameterError):
        grad_riesz_magnitude(1.0, 2, [0.0, 0.0])


def test_geometry_constants():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_ball_symbol_2d_matches_bessel():
    from scipy.special import j1
    s = np.linspace(0.0, 30.0, 61)
    expected = np.ones_like(s)
    expected[1:] = 2 * j1(s[1:]) / s[1:]
    np.testing.assert_allclose(ball_symbol(2, s), expected, rtol=1e-13, atol=1e-15)


def test_ball_symbol_3d_closed_form():
    s = np.array([0.5, 2.0, 7.0])
    expected = 3 * (np.sin(s) - s * np.cos(s)) / s**3
    np.testing.assert_allclose(ball_symbol(3, s), expected, rtol=1e-12)


def test_profile_at_origin():
    prof = smoothed_riesz_profile(1.0, 2, [0.0])
    assert prof.values[0] == pytest.approx(1 / math.pi, rel=1e-12)


@pytest.mark.parametrize("alpha,n", [(1.5, 2), (1.2, 2), (2.0, 3)])
def test_profile_far_field(alpha, n):
    prof = smoothed_riesz_profile(alpha, n, [50.0])
    assert prof.values[0] / (tau(alpha, n) * 50.0 ** (alpha - n)) == pytest.approx(1, abs=1e-3)


def test_profile_decreases_outside_support():
    r = np.linspace(2.0, 40.0, 60)
    vals = smoothed_riesz_profile(1.5, 2, r).values
    assert np.all(np.diff(vals) < 0)


def test_profile_against_brute_force_2d():
    # ball average of |w|^(alpha-2) about (r, 0) by 2-D quadrature in polar form
    alpha, r = 1.5, 0.4
    t = tau(alpha, 2)

    def inner(phi):
        return integrate.quad(lambda s: s * np.hypot(r + s * np.cos(phi), s * np.sin(phi))
                              ** (alpha - 2), 0, 1, epsabs=1e-13, limit=200)[0]

    brute = t * integrate.quad(inner, 0, 2 * np.pi, epsabs=1e-12, points=[np.pi], limit=200)[0] / np.pi
    assert smoothed_riesz_profile(alpha, 2, [r]).values[0] == pytest.approx(brute, rel=1e-7)


def test_profile_rejects_bad_radii():
    with pytest.raises(ParameterError):
        smoothed_riesz_profile(1.5, 2, [1.0, 0.5])
    with pytest.raises(ParameterError):
        smoothed_riesz_profile(1.5, 2, [-1.0])


def test_table_matches_direct_evaluation():
    table = profile_table(1.5, 2)
    r = np.array([0.0, 1e-4, 0.37, 0.99, 0.999999, 1.0, 1.000001, 1.3, 5.5, 40.0])
    direct = smoothed_riesz_profile(1.5, 2, r, rtol=1e-10).values
    np.testing.assert_allclose(table(r), direct, rtol=1e-6)
    with pytest.raises(ParameterError):
        table(np.array([1e3]))
