"""Mean-zero test fields with controlled regularity.

* ``mean_zero_atom``: a C-infinity bump minus its copy at the antipodal point.
* ``singular_bump``: ``|x - c|^beta`` under a smooth cutoff, same antipodal
  correction.
* ``spectral_noise``: random phases with amplitude ``|xi|^(-s)``.

Phases come from a counter-based hash of ``(seed, frequency)`` rather than a
sequential stream, so the coefficient of a given frequency is the same on
every grid that resolves it.  Refining ``N`` therefore adds high frequencies
to one fixed random Fourier series instead of drawing a new field.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .field import Field

RNG_ALGORITHM = "splitmix64-hash-v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(x):
    """SplitMix64 finaliser applied elementwise to a ``uint64`` array."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def hash_uniform(seed, keys):
    """Uniform ``[0, 1)`` variates keyed by ``seed`` and integer vectors ``keys``.

    ``keys`` has shape ``(..., d)``.  Each component is folded into the state
    with one SplitMix64 round; the top 53 bits form the output.
    """
    keys = np.asarray(keys, dtype=np.int64)
    state = splitmix64(np.full(keys.shape[:-1], np.uint64(seed & 0xFFFFFFFFFFFFFFFF)))
    for d in range(keys.shape[-1]):
        state = splitmix64(state ^ keys[..., d].astype(np.uint64))
    return (state >> np.uint64(11)).astype(np.float64) * 2.0**-53


def _periodic_distance(grid, center):
    coords = grid.coordinates()
    r2 = 0.0
    for x, c in zip(coords, center):
        d = np.abs(x - c) % grid.L
        d = np.minimum(d, grid.L - d)
        r2 = r2 + d * d
    return np.sqrt(r2)


def bump(r):
    """``exp(1 - 1/(1 - r^2))`` on ``r < 1``, zero outside; peak value 1."""
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def smooth_cutoff(r):
    """1 on ``r <= 1/2``, 0 on ``r >= 1``, C-infinity in between."""
    r = np.asarray(r, dtype=np.float64)

    def psi(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    s = 2.0 * r - 1.0
    a, b = psi(1.0 - s), psi(s)
    return a / (a + b)


def _antipodal(grid, values):
    half = grid.N // 2
    return values - np.roll(values, (half,) * grid.n, axis=tuple(range(grid.n)))


def _check_center(grid, center):
    center = tuple(float(c) for c in center)
    if len(center) != grid.n:
        raise ParameterError(f"center must have {grid.n} coordinates")
    return center


def mean_zero_atom(grid, center, width):
    """Smooth bump of radius ``width`` at ``center`` minus the same bump shifted by ``L/2``.

    The shift is a lattice translation by ``N/2`` in every axis, so the two
    copies are exact permutations of each other and the sum vanishes exactly.
    """
    center = _check_center(grid, center)
    if not 0 < width <= grid.L / 4:
        raise ParameterError(f"width must lie in (0, L/4] = (0, {grid.L / 4}], got {width}")
    single = bump(_periodic_distance(grid, center) / width)
    return Field(grid, _antipodal(grid, single))


def atom_sampler(L, center, width):
    """Pointwise version of :func:`mean_zero_atom` for :func:`~ballsquare.field.make_field`."""
    center = tuple(float(c) for c in center)

    def sampler(*x):
        r0 = r1 = 0.0
        for xi, c in zip(x, center):
            d0 = np.abs(xi - c) % L
            d1 = np.abs(xi - c - L / 2) % L
            r0 = r0 + np.minimum(d0, L - d0) ** 2
            r1 = r1 + np.minimum(d1, L - d1) ** 2
        return bump(np.sqrt(r0) / width) - bump(np.sqrt(r1) / width)

    return sampler


def singular_bump(grid, center, beta, cutoff_width):
    """``|x - c|^beta`` times a smooth cutoff, mean-corrected antipodally.

    For ``beta < 0`` samples closer than ``h`` to the centre take the average
    of ``|x|^beta`` over the ball of radius ``h``, ``n h^beta / (n + beta)``.
    """
    center = _check_center(grid, center)
    n = grid.n
    if not -n / 2 < beta < 2:
        raise ParameterError(f"beta must lie in (-n/2, 2) = ({-n / 2}, 2), got {beta}")
    if not 0 < cutoff_width <= grid.L / 4:
        raise ParameterError(f"cutoff width must lie in (0, L/4], got {cutoff_width}")
    r = _periodic_distance(grid, center)
    h = grid.spacing
    with np.errstate(divide="ignore"):
        core = r**beta
    if beta < 0:
        core = np.where(r < h, n * h**beta / (n + beta), core)
    single = core * smooth_cutoff(r / cutoff_width)
    return Field(grid, _antipodal(grid, single))


def _canonical_sign(freqs):
    """+1 where the first non-zero component is positive, -1 where negative, 0 at DC."""
    sign = np.zeros(freqs.shape[:-1], dtype=np.int64)
    for d in range(freqs.shape[-1]):
        comp = np.sign(freqs[..., d]).astype(np.int64)
        sign = np.where(sign == 0, comp, sign)
    return sign


def spectral_noise(grid, decay, seed):
    """Real field ``sum_xi |xi|^(-decay) cos(2 pi xi.x/L + theta_xi)``.

    Frequencies run over ``|xi_d| < N/2`` (Nyquist modes dropped), DC is
    zero, and ``theta_{-xi} = -theta_xi`` so the samples are real.
    """
    n = grid.n
    if not 0 < decay < n + 2:
        raise ParameterError(f"decay exponent must lie in (0, n + 2) = (0, {n + 2}), got {decay}")
    if int(seed) != seed or seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")
    k = grid.frequencies().astype(np.int64)
    freqs = np.stack(np.meshgrid(*([k] * n), indexing="ij"), axis=-1)
    sign = _canonical_sign(freqs)
    canon = freqs * sign[..., None]
    theta = 2.0 * math.pi * hash_uniform(int(seed), canon) * sign
    radius = np.sqrt(np.sum(freqs.astype(np.float64) ** 2, axis=-1))
    amp = np.zeros_like(radius)
    keep = (radius > 0) & np.all(np.abs(freqs) < grid.N // 2, axis=-1)
    amp[keep] = radius[keep] ** (-float(decay))
    coeff = amp * np.exp(1j * theta)
    values = np.real(np.fft.ifftn(coeff)) * grid.size
    return Field(grid, values)


def build(recipe, grid):
    """Dispatch a recipe dictionary (as stored in run configs) to a generator."""
    kind = recipe.get("kind")
    if kind == "atom":
        return mean_zero_atom(grid, recipe["center"], recipe["width"])
    if kind == "singular":
        return singular_bump(grid, recipe["center"], recipe["beta"], recipe["cutoff_width"])
    if kind == "spectral":
        return spectral_noise(grid, recipe["decay"], recipe["seed"])
    if kind == "constant":
        return Field(grid, np.full(grid.shape, float(recipe.get("value", 1.0))))
    if kind == "harmonic":
        freq = recipe["frequency"]
        phase = 2 * math.pi * sum(f * x for f, x in zip(freq, grid.coordinates())) / grid.L
        return Field(grid, np.broadcast_to(np.cos(phase), grid.shape))
    raise ParameterError(f"unknown recipe kind {kind!r}")


def recipe_metadata(recipe):
    meta = dict(recipe)
    if recipe.get("kind") == "spectral":
        meta["rng"] = RNG_ALGORITHM
    return meta

