"""Ball-average square functions on a truncated geometric scale grid.

For a smoothing kernel ``K`` the square function of order ``alpha`` is

    S(f)(x)^2 = int_0^inf int_{B(x,t)} |f(z) - K_t*f(z)|^2 dz  t^(-2 alpha - n) dt/t.

The inner integral over ``B(x, t)`` equals ``v_n t^n A_t(d_t^2)(x)`` with
``d_t = f - K_t*f``, so each scale costs a handful of FFT convolutions.  The
``dt/t`` integral is the midpoint rule in ``log t`` on
``t_i = t_min 2^(i/m)``, weight ``ln 2 / m``.

``K = Phi`` gives ``U_alpha``; ``K = K^(k)`` gives ``E~_alpha^(k)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .convolve import DISCRETE, apply_symbol, ball_symbol_table, check_scale, smooth_values
from .errors import ParameterError, RangeViolation
from .field import Field
from .kernels import BINOMIAL, KernelSpec, unit_ball_volume


@dataclass(frozen=True)
class ScaleGrid:
    """Geometric scales ``t_min 2^(i/m)`` up to ``t_max`` with log-midpoint weights."""

    grid: object
    t_min: float
    t_max: float
    per_octave: int
    reach: int = 1

    @property
    def count(self):
        # the small offset absorbs rounding in log2 when t_max/t_min is an exact power of two
        return math.floor(self.per_octave * math.log2(self.t_max / self.t_min) + 1e-9) + 1

    @property
    def scales(self):
        return self.t_min * 2.0 ** (np.arange(self.count) / self.per_octave)

    @property
    def weight(self):
        return math.log(2.0) / self.per_octave

    def dilated(self, factor, grid):
        """Same grid with every scale multiplied by ``factor`` (on another sampling grid)."""
        return scale_grid(grid, self.t_min * factor, self.t_max * factor, self.per_octave,
                          self.reach)

    def to_dict(self):
        return {"t_min": self.t_min, "t_max": self.t_max, "per_octave": self.per_octave,
                "reach": self.reach, "count": self.count}


def scale_grid(grid, t_min, t_max, per_octave, k=1):
    """Validated :class:`ScaleGrid`; ``k`` is the kernel's support multiple."""
    if int(per_octave) != per_octave or per_octave < 1:
        raise ParameterError(f"per_octave must be a positive integer, got {per_octave}")
    if int(k) != k or k < 1:
        raise ParameterError(f"support multiple k must be a positive integer, got {k}")
    if not (t_min > 0 and t_max > 0):
        raise ParameterError("scale bounds must be positive")
    if t_max < t_min:
        raise ParameterError(f"empty scale grid: t_max={t_max} < t_min={t_min}")
    check_scale(grid, t_min, reach=int(k))
    check_scale(grid, t_max, reach=int(k))
    return ScaleGrid(grid, float(t_min), float(t_max), int(per_octave), int(k))


def default_scale_grid(grid, per_octave=4, k=1):
    """``[2h, L/(4k)]`` rounded to whole octaves above ``2h``."""
    t_min = 2 * grid.spacing
    octaves = math.floor(math.log2(grid.L / (4 * k) / t_min) + 1e-9)
    if octaves < 0:
        raise ParameterError(f"grid {grid} too coarse for a kernel of support {k}")
    return scale_grid(grid, t_min, t_min * 2.0**octaves, per_octave, k)


@dataclass(frozen=True, eq=False)
class SquareFnOutput:
    result: Field
    per_scale: np.ndarray
    alpha: float
    kernel: KernelSpec
    scales: ScaleGrid
    metadata: dict = dc_field(default_factory=dict)
    integrands: list | None = None

    def to_csv(self, path):
        np.savetxt(path, self.per_scale, delimiter=",", fmt="%.17g", header="t,mass",
                   comments="")


def admissible_range(n, kernel):
    """Open interval of smoothness exponents covered by the characterisation."""
    hi = float(n)
    if kernel.kind == BINOMIAL:
        hi = min(hi, 2.0 * kernel.order)
    return n / 2.0, hi


def check_alpha(alpha, n, kernel, override=False):
    """Return True when ``alpha`` is in range; raise unless ``override`` is set."""
    lo, hi = admissible_range(n, kernel)
    ok = lo < alpha < hi
    if not ok and not override:
        if kernel.kind == BINOMIAL:
            msg = (f"alpha={alpha} outside n/2 < alpha < min(2k, n) = ({lo:g}, {hi:g}) "
                   f"for n={n}, k={kernel.order}")
        else:
            msg = f"alpha={alpha} outside n/2 < alpha < n = ({lo:g}, {hi:g}) for n={n}"
        raise RangeViolation(msg + "; pass override to explore outside the range")
    if not 0 < alpha:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    return ok


ROUNDOFF_FLOOR = 64 * np.finfo(np.float64).eps


def _kernel_difference(coefficients, mode):
    def diff(values, grid, t):
        return values - smooth_values(values, grid, t, coefficients, mode)
    return diff


def _power_difference(k, mode):
    """``(I - A_t)^k`` by repeated differencing."""
    def diff(values, grid, t):
        sym = ball_symbol_table(grid, t, mode).symbol
        g = values
        for _ in range(k):
            g = g - apply_symbol(g, sym)
        return g
    return diff


def _scale_integrand(values, grid, t, alpha, diff, mode):
    d = diff(values, grid, t)
    sym = ball_symbol_table(grid, t, mode).symbol
    d2 = d * d
    avg = apply_symbol(d2, sym)
    # the average of a non-negative array is non-negative; anything below the
    # FFT roundoff floor is noise that the final sqrt would inflate
    avg[avg < ROUNDOFF_FLOOR * float(np.max(d2))] = 0.0
    return unit_ball_volume(grid.n) * t ** (-2.0 * alpha) * avg


def _run(f, alpha, scales, diff, mode, threads, keep_integrands):
    grid = f.grid
    ts = scales.scales
    h_n = grid.cell_volume

    def one(t):
        return _scale_integrand(f.values, grid, float(t), alpha, diff, mode)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            integrands = list(pool.map(one, ts))
    else:
        integrands = [one(t) for t in ts]

    w = scales.weight
    total = np.zeros(grid.shape)
    masses = np.empty(len(ts))
    for i, integ in enumerate(integrands):
        # ascending-t reduction keeps the result independent of the worker count
        total = total + w * integ
        masses[i] = math.fsum(np.abs(integ).ravel()) * h_n
    result = Field(grid, np.sqrt(np.maximum(total, 0.0)))
    per_scale = np.column_stack([ts, masses])
    return result, per_scale, (integrands if keep_integrands else None)


def _validate(f, kernel, scales):
    if scales.grid != f.grid:
        raise ParameterError(f"scale grid built for {scales.grid}, field lives on {f.grid}")
    if kernel.n != f.grid.n:
        raise ParameterError(f"kernel dimension {kernel.n} != field dimension {f.grid.n}")
    check_scale(f.grid, scales.t_max, reach=kernel.order)


def square_function(f, alpha, kernel, scales, override=False, mode=DISCRETE, threads=1,
                    keep_integrands=False):
    """Square function of ``f`` of order ``alpha`` for the given smoothing kernel.

    Parameters
    ----------
    f : Field
    alpha : float
        Smoothness order; must satisfy ``n/2 < alpha < n`` (and ``alpha < 2k``
        for binomial kernels) unless ``override`` is set.
    kernel : KernelSpec
    scales : ScaleGrid
    override : bool
        Permit out-of-range ``alpha``; recorded in ``metadata``.
    mode : {"discrete", "analytic"}
        Ball symbol normalisation.
    threads : int
        Scales evaluated concurrently; the reduction order is fixed.
    keep_integrands : bool
        Retain every per-scale integrand field (for diagnostics).

    Returns
    -------
    SquareFnOutput
    """
    _validate(f, kernel, scales)
    in_range = check_alpha(alpha, f.grid.n, kernel, override)
    diff = _kernel_difference(kernel.coefficients(), mode)
    result, per_scale, integ = _run(f, alpha, scales, diff, mode, threads, keep_integrands)
    meta = {"in_range": in_range, "range_override": bool(override), "mode": mode,
            "pipeline": "kernel"}
    return SquareFnOutput(result, per_scale, float(alpha), kernel, scales, meta, integ)


def u_alpha(f, alpha, scales, **kw):
    """``U_alpha(f)`` with the normalised ball indicator."""
    return square_function(f, alpha, KernelSpec.ball(f.grid.n), scales, **kw)


def e_tilde(f, alpha, k, scales, **kw):
    """``E~_alpha^(k)(f)`` with the binomial kernel ``K^(k)``."""
    return square_function(f, alpha, KernelSpec.binomial(f.grid.n, k), scales, **kw)


def e_tilde_direct(f, alpha, k, scales, override=False, mode=DISCRETE, threads=1,
                   keep_integrands=False):
    """Same quantity as :func:`e_tilde` computed through ``(I - A_t)^k f``."""
    kernel = KernelSpec.binomial(f.grid.n, k)
    _validate(f, kernel, scales)
    in_range = check_alpha(alpha, f.grid.n, kernel, override)
    diff = _power_difference(k, mode)
    result, per_scale, integ = _run(f, alpha, scales, diff, mode, threads, keep_integrands)
    meta = {"in_range": in_range, "range_override": bool(override), "mode": mode,
            "pipeline": "power"}
    return SquareFnOutput(result, per_scale, float(alpha), kernel, scales, meta, integ)


def per_scale_profile(out):
    """``[(t, mass), ...]`` in ascending ``t``."""
    return [(float(t), float(m)) for t, m in out.per_scale]


def log_log_slope(profile):
    """Least-squares slope of ``log mass`` against ``log t`` (positive masses only)."""
    t = np.array([p[0] for p in profile])
    m = np.array([p[1] for p in profile])
    keep = m > 0
    if keep.sum() < 2:
        raise ParameterError("need at least two positive masses to fit a slope")
    return float(np.polyfit(np.log(t[keep]), np.log(m[keep]), 1)[0])


def identity_discrepancy(a, b):
    """``max |a^2 - b^2| / max b^2`` for two square-function outputs.

    Squares are compared because the final square root turns absolute
    roundoff near exact zeros into errors of order ``sqrt(eps)``; the peak
    normalisation keeps points where the exact value vanishes meaningful.
    """
    a2 = np.square(a.result.values)
    b2 = np.square(b.result.values)
    peak = float(np.max(b2))
    diff = float(np.max(np.abs(a2 - b2)))
    return diff / peak if peak > 0 else diff
