import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballsquare import convolve
from ballsquare.convolve import (ANALYTIC, DISCRETE, ball_average, ball_symbol_table,
                                 binomial_smooth, check_scale, discrete_ball_kernel,
                                 fractional_laplacian, smooth)
from ballsquare.errors import ParameterError
from ballsquare.field import Field, GridSpec, lp_norm, make_field
from ballsquare.kernels import KernelSpec
from ballsquare.testfields import mean_zero_atom, spectral_noise


def harmonic(g, xi):
    return make_field(g, lambda x, y: np.cos(2 * np.pi * (xi[0] * x + xi[1] * y) / g.L))


@pytest.mark.parametrize("mode", [DISCRETE, ANALYTIC])
def test_constant_is_fixed_exactly(mode):
    g = GridSpec(2, 32)
    f = Field(g, np.full(g.shape, -2.5))
    assert np.all(ball_average(f, 0.1, mode).values == -2.5)
    assert np.all(binomial_smooth(f, 0.1, 3, mode).values == -2.5)


def test_discrete_kernel_unit_mass_and_symmetry():
    g = GridSpec(2, 64)
    k = discrete_ball_kernel(g, 5 * g.spacing)
    assert math.isclose(k.sum(), 1.0, rel_tol=1e-14)
    assert np.count_nonzero(k) == 81  # lattice points with i^2 + j^2 <= 25
    assert np.array_equal(k, np.roll(k[::-1, ::-1], 1, axis=(0, 1)))


def test_harmonic_is_an_eigenfunction():
    g = GridSpec(2, 64)
    f = harmonic(g, (3, 5))
    table = ball_symbol_table(g, 0.1, DISCRETE)
    out = ball_average(f, 0.1)
    lam = table.full_symbol()[3, 5]
    np.testing.assert_allclose(out.values, lam * f.values, atol=1e-13)


@pytest.mark.parametrize("N", [64, 128, 256])
def test_discrete_and_analytic_modes_agree_at_low_frequency(N):
    g = GridSpec(2, N)
    t = 0.125
    d = ball_symbol_table(g, t, DISCRETE).full_symbol()
    a = ball_symbol_table(g, t, ANALYTIC).full_symbol()
    low = (slice(0, 8), slice(0, 8))
    assert np.max(np.abs(d[low] - a[low])) <= g.spacing / t


def test_smoothing_reduces_noise_variance():
    g = GridSpec(2, 64)
    f = Field(g, np.random.default_rng(3).standard_normal(g.shape))
    out = ball_average(f, 2 * g.spacing)
    assert np.var(out.values) < np.var(f.values)


def test_binomial_k1_is_ball_average():
    f = mean_zero_atom(GridSpec(2, 64), (0.2, 0.3), 0.2)
    assert np.array_equal(binomial_smooth(f, 0.05, 1).values, ball_average(f, 0.05).values)
    assert np.array_equal(smooth(f, 0.05, KernelSpec.ball(2)).values,
                          ball_average(f, 0.05).values)


def test_binomial_k2_identity():
    f = spectral_noise(GridSpec(2, 128), 1.5, 11)
    t = 0.05
    a = ball_average(f, t)
    two = binomial_smooth(f, t, 2)
    expected = 2 * a.values - ball_average(a, t).values
    np.testing.assert_allclose(two.values, expected, atol=1e-12 * np.abs(expected).max())
    diff = f.values - two.values
    step = f.values - a.values
    direct = step - ball_average(Field(f.grid, step), t).values
    np.testing.assert_allclose(diff, direct, atol=1e-12 * np.abs(direct).max())


def test_scale_bounds():
    g = GridSpec(2, 64)
    with pytest.raises(ParameterError, match="resolution"):
        check_scale(g, g.spacing)
    with pytest.raises(ParameterError, match="self-overlap"):
        check_scale(g, 0.3, reach=2)
    check_scale(g, 0.25, reach=2)
    with pytest.raises(ParameterError):
        binomial_smooth(Field(g, np.zeros(g.shape)), 0.2, 3)


def test_fractional_laplacian_single_mode():
    g = GridSpec(2, 32, L=2.0)
    f = harmonic(g, (1, 0))
    for alpha in (0.5, 1.5):
        out = fractional_laplacian(f, alpha)
        np.testing.assert_allclose(out.values, (2 * np.pi / g.L) ** alpha * f.values,
                                   rtol=1e-12, atol=1e-12)


def test_fractional_laplacian_small_alpha_is_identity():
    f = mean_zero_atom(GridSpec(2, 64), (0.5, 0.5), 0.2)
    out = fractional_laplacian(f, 1e-13)
    np.testing.assert_allclose(out.values, f.values, atol=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 1.9), st.floats(-3, 3))
def test_fractional_laplacian_linear(alpha, c):
    g = GridSpec(2, 32)
    f = spectral_noise(g, 1.5, 1)
    h = spectral_noise(g, 2.0, 2)
    lhs = fractional_laplacian(f + h * c, alpha).values
    rhs = fractional_laplacian(f, alpha).values + c * fractional_laplacian(h, alpha).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * np.abs(rhs).max())


def test_fractional_laplacian_rejects_bad_input():
    g = GridSpec(2, 16)
    with pytest.raises(ParameterError):
        fractional_laplacian(Field(g, np.ones(g.shape)), 1.0)
    with pytest.raises(ParameterError):
        fractional_laplacian(Field(g, np.zeros(g.shape)), 2.0)


def test_workers_do_not_change_results():
    f = spectral_noise(GridSpec(2, 128), 1.5, 5)
    convolve.set_workers(1)
    a = ball_average(f, 0.05).values
    convolve.set_workers(2)
    try:
        b = ball_average(f, 0.05).values
    finally:
        convolve.set_workers(1)
    assert np.array_equal(a, b)
    assert lp_norm(Field(f.grid, a), 1) > 0
