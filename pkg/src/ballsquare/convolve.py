"""Periodic convolution with ball-derived kernels and the fractional Laplacian.

All operators are Fourier multipliers on the torus.  The mean of the input is
split off before transforming and added back afterwards, so constants pass
through every unit-mass smoothing operator bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .errors import ParameterError
from .field import Field, mean
from .kernels import ball_symbol, binomial_coefficients

DISCRETE = "discrete"
ANALYTIC = "analytic"

# relative slack on scale bounds so that t = L/2 computed in floating point is accepted
_BOUND_SLACK = 1e-12

_workers = 1


def set_workers(k):
    """Number of threads handed to the FFT backend (results do not depend on it)."""
    global _workers
    _workers = max(1, int(k))


def _rfft(v):
    return sfft.rfftn(v, workers=_workers)


def _irfft(v, shape):
    return sfft.irfftn(v, s=shape, workers=_workers)


def _half_spectrum_radius(grid):
    """``|xi|`` (integer frequency units) on the ``rfftn`` half spectrum."""
    full = grid.frequencies()
    half = np.fft.rfftfreq(grid.N, d=1.0 / grid.N)
    r2 = np.zeros([grid.N] * (grid.n - 1) + [half.size])
    for d in range(grid.n):
        ax = half if d == grid.n - 1 else full
        shape = [1] * grid.n
        shape[d] = ax.size
        r2 = r2 + ax.reshape(shape) ** 2
    return np.sqrt(r2)


@dataclass(frozen=True, eq=False)
class BallSymbolTable:
    """Fourier symbol of the radius-``t`` ball average on ``grid``."""

    t: float
    grid: object
    mode: str
    symbol: np.ndarray
    stencil_size: int = 0

    def full_symbol(self):
        """Symbol on the full ``fftn`` frequency lattice."""
        if self.mode == DISCRETE:
            return np.real(sfft.fftn(discrete_ball_kernel(self.grid, self.t)))
        xi = np.sqrt(sum(np.meshgrid(*([self.grid.frequencies() ** 2] * self.grid.n),
                                     indexing="ij")))
        return ball_symbol(self.grid.n, 2 * math.pi * self.t * xi / self.grid.L)


def discrete_ball_kernel(grid, t):
    """Unit-mass sampled indicator of ``|x| <= t`` (cell-centre rule, periodic)."""
    j = np.arange(grid.N)
    m = np.minimum(j, grid.N - j)
    r2 = np.zeros(grid.shape, dtype=np.int64)
    for d in range(grid.n):
        shape = [1] * grid.n
        shape[d] = grid.N
        r2 = r2 + (m**2).reshape(shape)
    mask = r2 <= (t / grid.spacing) ** 2
    return mask / np.count_nonzero(mask)


def check_scale(grid, t, reach=1):
    """Validate ``2h <= t`` and ``reach * t <= L/2``."""
    h = grid.spacing
    if not (t >= 2 * h * (1 - _BOUND_SLACK)):
        raise ParameterError(f"scale t={t} below the resolution limit 2h={2 * h}")
    if not (reach * t <= grid.L / 2 * (1 + _BOUND_SLACK)):
        raise ParameterError(
            f"support radius {reach}*t={reach * t} exceeds L/2={grid.L / 2} (torus self-overlap)"
        )


@lru_cache(maxsize=256)
def ball_symbol_table(grid, t, mode=DISCRETE):
    t = float(t)
    check_scale(grid, t)
    if mode == DISCRETE:
        kernel = discrete_ball_kernel(grid, t)
        sym = np.real(_rfft(kernel))
        sym.flat[0] = 1.0
        size = int(np.count_nonzero(kernel))
    elif mode == ANALYTIC:
        xi = _half_spectrum_radius(grid)
        sym = ball_symbol(grid.n, 2 * math.pi * t * xi / grid.L)
        size = 0
    else:
        raise ParameterError(f"unknown normalisation mode {mode!r}")
    sym.setflags(write=False)
    return BallSymbolTable(t, grid, mode, sym, size)


def apply_symbol(values, symbol):
    """Apply a real multiplier with unit DC value to a sample array."""
    m = mean(values)
    centred = values - m
    return m + _irfft(_rfft(centred) * symbol, values.shape)


def ball_average(f, t, mode=DISCRETE):
    """``A_t f``: average of ``f`` over the ball of radius ``t`` about each node."""
    table = ball_symbol_table(f.grid, t, mode)
    return Field(f.grid, apply_symbol(f.values, table.symbol))


def smooth_values(values, grid, t, coefficients, mode=DISCRETE):
    """``sum_j c_j (A_t)^j`` applied to a raw sample array."""
    check_scale(grid, t, reach=len(coefficients))
    sym = ball_symbol_table(grid, t, mode).symbol
    acc = np.zeros_like(values)
    cur = values
    for c in coefficients:
        cur = apply_symbol(cur, sym)
        if c != 0.0:
            acc = acc + c * cur
    return acc


def smooth(f, t, kernel, mode=DISCRETE):
    """``K_t * f`` for a :class:`~ballsquare.kernels.KernelSpec`."""
    return Field(f.grid, smooth_values(f.values, f.grid, t, kernel.coefficients(), mode))


def binomial_smooth(f, t, k, mode=DISCRETE):
    """``K^(k)_t * f = sum_j c_j (A_t)^j f`` with binomial weights."""
    coeffs = binomial_coefficients(k)
    return Field(f.grid, smooth_values(f.values, f.grid, t, coeffs, mode))


def fractional_laplacian(f, alpha):
    """Multiplier ``|2 pi xi / L|^alpha`` on non-zero frequencies; DC set to 0."""
    if not f.mean_zero:
        raise ParameterError("fractional Laplacian requires a mean-zero field")
    if not 0 < alpha < f.grid.n:
        raise ParameterError(f"alpha must satisfy 0 < alpha < n = {f.grid.n}, got {alpha}")
    return Field(f.grid, _fractional_laplacian_values(f.values, f.grid, alpha))


def _fractional_laplacian_values(values, grid, alpha):
    xi = _half_spectrum_radius(grid)
    mult = np.zeros_like(xi)
    nz = xi > 0
    mult[nz] = (2 * math.pi * xi[nz] / grid.L) ** alpha
    return _irfft(_rfft(values) * mult, values.shape)
