"""Ball-indicator kernel family and the Riesz kernel.

The smoothing kernel is ``Phi = |B(0,1)|^{-1} 1_{B(0,1)}``.  Its ``j``-fold
convolution powers and the binomial combination

    K^(k) = sum_{j=1}^{k} c_j Phi^(j),   c_j = -(-1)^j C(k, j),

are described symbolically by :class:`KernelSpec`; the convolution engine in
:mod:`ballsquare.convolve` never samples ``Phi^(j)`` and instead applies the
ball average ``j`` times.

The Riesz kernel ``L_alpha(x) = tau(alpha) |x|^(alpha - n)`` and its unit-scale
smoothing ``G = L_alpha * Phi`` are provided as point evaluators and as a
tabulated radial profile.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate, special

from .errors import ConvergenceError, ParameterError

MAX_BINOMIAL_ORDER = 20

BALL = "ball"
ITERATE = "iterate"
BINOMIAL = "binomial"


@dataclass(frozen=True)
class KernelSpec:
    """Symbolic kernel: ``ball`` (Phi), ``iterate`` (Phi^(j)) or ``binomial`` (K^(k))."""

    kind: str
    n: int
    order: int = 1

    def __post_init__(self):
        if self.kind not in (BALL, ITERATE, BINOMIAL):
            raise ParameterError(f"unknown kernel kind {self.kind!r}")
        if self.n < 2:
            raise ParameterError(f"dimension must be >= 2, got {self.n}")
        if self.kind == BALL and self.order != 1:
            raise ParameterError("ball kernel has order 1")
        if not 1 <= self.order <= MAX_BINOMIAL_ORDER:
            raise ParameterError(f"kernel order must lie in [1, {MAX_BINOMIAL_ORDER}], got {self.order}")

    @classmethod
    def ball(cls, n):
        return cls(BALL, n, 1)

    @classmethod
    def iterate(cls, n, j):
        return cls(ITERATE, n, j)

    @classmethod
    def binomial(cls, n, k):
        return cls(BINOMIAL, n, k)

    @property
    def support_radius(self):
        return float(self.order)

    @property
    def mass(self):
        return 1.0

    def coefficients(self):
        """Weights of ``Phi^(1), ..., Phi^(order)`` in this kernel."""
        if self.kind == BALL:
            return [1.0]
        if self.kind == ITERATE:
            return [0.0] * (self.order - 1) + [1.0]
        return binomial_coefficients(self.order)

    def label(self):
        return self.kind if self.kind == BALL else f"{self.kind}({self.order})"

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "order": self.order}


def binomial_coefficients(k):
    """``c_j = -(-1)^j C(k, j)`` for ``j = 1..k``; they sum to one."""
    if int(k) != k or not 1 <= k <= MAX_BINOMIAL_ORDER:
        raise ParameterError(f"k must be an integer in [1, {MAX_BINOMIAL_ORDER}], got {k}")
    k = int(k)
    coeffs = [-((-1) ** j) * math.comb(k, j) for j in range(1, k + 1)]
    assert sum(coeffs) == 1
    return [float(c) for c in coeffs]


def unit_ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n):
    """Surface measure of the unit sphere in ``R^n``."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_symbol(n, s):
    """Fourier symbol of the unit ball average at ``s = 2 pi t |xi|``.

    ``Gamma(n/2 + 1) (2/s)^(n/2) J_{n/2}(s)``, equal to 1 at ``s = 0``.
    """
    s = np.asarray(s, dtype=np.float64)
    out = np.ones_like(s)
    nz = s > 0
    sn = s[nz]
    out[nz] = math.gamma(n / 2 + 1) * (2.0 / sn) ** (n / 2) * special.jv(n / 2, sn)
    return out


def _check_alpha(alpha, n):
    if not 0 < alpha < n:
        raise ParameterError(f"alpha must satisfy 0 < alpha < n = {n}, got {alpha}")


def tau(alpha, n):
    """Normalising constant of the order-``alpha`` Riesz kernel in ``R^n``."""
    _check_alpha(alpha, n)
    return math.gamma(n / 2 - alpha / 2) / (
        math.pi ** (n / 2) * 2.0**alpha * math.gamma(alpha / 2)
    )


def _radius(x):
    x = np.asarray(x, dtype=np.float64)
    return np.sqrt(np.sum(x * x, axis=-1))


def riesz_value(alpha, n, x):
    """``tau(alpha) |x|^(alpha - n)`` at points ``x`` (last axis of length ``n``)."""
    r = _radius(x)
    if np.any(r == 0):
        raise ParameterError("Riesz kernel is singular at the origin")
    return tau(alpha, n) * r ** (alpha - n)


def grad_riesz_magnitude(alpha, n, x):
    """Exact gradient magnitude ``tau(alpha) (n - alpha) |x|^(alpha - n - 1)``."""
    r = _radius(x)
    if np.any(r == 0):
        raise ParameterError("Riesz kernel gradient is singular at the origin")
    return tau(alpha, n) * (n - alpha) * r ** (alpha - n - 1)


def _cap_fraction(n, rho, r):
    """Fraction of the sphere ``|w| = rho`` lying inside the unit ball about ``r e``."""
    if rho == 0.0:
        return 1.0 if r < 1.0 else (0.5 if r == 1.0 else 0.0)
    c = (rho * rho + r * r - 1.0) / (2.0 * rho * r)
    c = min(1.0, max(-1.0, c))
    if n == 2:
        return math.acos(c) / math.pi
    if n == 3:
        return 0.5 * (1.0 - c)
    half = 0.5 * special.betainc((n - 1) / 2, 0.5, 1.0 - c * c)
    return half if c >= 0 else 1.0 - half


def _profile_point(alpha, n, r, rtol):
    """``G(r) / (n tau)`` by radial integration about the kernel's singular point."""
    if r == 0.0:
        return 1.0 / alpha, 0.0
    head = (1.0 - r) ** alpha / alpha if r < 1.0 else 0.0
    a, b = abs(1.0 - r), 1.0 + r
    opts = dict(epsabs=0.0, epsrel=rtol * 1e-2, limit=400)
    with warnings.catch_warnings():
        # convergence is judged below from the returned error estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if a == 0.0:
            val, err = integrate.quad(lambda p: _cap_fraction(n, p, r), 0.0, b,
                                      weight="alg", wvar=(alpha - 1.0, 0.0), **opts)
        else:
            # near r = 1 the cap fraction varies on the scale sqrt(a) just above
            # rho = a; geometric breakpoints resolve it without a special rule
            pts = [a * 2.0**j for j in range(1, 64) if a * 2.0**j < min(1.0, b)]
            pts = [p for p in pts + [1.0] if a < p < b]
            opts["limit"] = 800
            val, err = integrate.quad(lambda p: p ** (alpha - 1.0) * _cap_fraction(n, p, r),
                                      a, b, points=pts or None, **opts)
    total = head + val
    achieved = err / abs(total)
    if achieved > rtol:
        raise ConvergenceError(
            f"profile quadrature at r={r} reached relative error {achieved:.3g} > {rtol:.3g}",
            achieved=achieved,
        )
    return total, achieved


@dataclass(frozen=True)
class RadialProfile:
    alpha: float
    n: int
    radii: np.ndarray
    values: np.ndarray
    singular_exponent: float
    achieved_rtol: float = 0.0

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.radii, self.values]), delimiter=",",
                   fmt="%.17g", header="r,G", comments="")


def smoothed_riesz_profile(alpha, n, radii, rtol=1e-8):
    """Evaluate ``G = L_alpha * Phi`` at the given radii by adaptive quadrature.

    Averaging ``|w|^(alpha-n)`` over the unit ball centred at distance ``r``
    reduces, in polar coordinates about the singular point, to a
    one-dimensional integral of ``rho^(alpha-1)`` times the fraction of the
    sphere of radius ``rho`` inside the ball.
    """
    _check_alpha(alpha, n)
    radii = np.asarray(radii, dtype=np.float64)
    if radii.ndim != 1 or np.any(radii < 0) or np.any(np.diff(radii) <= 0):
        raise ParameterError("radii must be a strictly increasing 1-D array of non-negative values")
    scale = n * tau(alpha, n)
    vals = np.empty_like(radii)
    worst = 0.0
    for i, r in enumerate(radii):
        v, acc = _profile_point(alpha, n, float(r), rtol)
        vals[i] = scale * v
        worst = max(worst, acc)
    return RadialProfile(float(alpha), int(n), radii, vals, alpha - n, worst)


class RieszProfileTable:
    """Cubic interpolation of ``log G`` against ``log r``.

    ``G`` is only ``C^{1, alpha-1}`` at ``r = 1``, where the ball boundary
    crosses the kernel singularity, so the table is split there into two
    splines and nodes are graded geometrically toward ``r = 1`` from both
    sides.  Below ``r_min`` the even expansion ``G(0) + c r^2`` is used.
    """

    def __init__(self, alpha, n, r_min=1e-3, r_max=64.0, per_decade=100,
                 kink_gap=1e-7, rtol=1e-10):
        _check_alpha(alpha, n)
        self.alpha, self.n = float(alpha), int(n)
        self.per_decade = per_decade
        base = 10.0 ** (np.arange(math.floor(math.log10(r_min) * per_decade),
                                  math.ceil(math.log10(r_max) * per_decade) + 1) / per_decade)
        gaps = 10.0 ** (np.arange(math.floor(math.log10(kink_gap) * per_decade),
                                  math.ceil(math.log10(0.5) * per_decade) + 1) / per_decade)
        nodes = np.unique(np.concatenate([base, 1.0 - gaps, 1.0 + gaps, [1.0]]))
        self.nodes = nodes[(nodes >= r_min) & (nodes <= r_max)]
        prof = smoothed_riesz_profile(alpha, n, self.nodes, rtol=rtol)
        self.node_values = prof.values
        self.g0 = n * tau(alpha, n) / alpha
        inner = self.nodes <= 1.0
        outer = self.nodes >= 1.0
        logr, logg = np.log(self.nodes), np.log(prof.values)
        self._inner = interpolate.CubicSpline(logr[inner], logg[inner])
        self._outer = interpolate.CubicSpline(logr[outer], logg[outer])
        self._c2 = (prof.values[0] - self.g0) / self.nodes[0] ** 2

    @property
    def r_max(self):
        return self.nodes[-1]

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        if np.any(r > self.nodes[-1]):
            raise ParameterError(f"radius beyond tabulated range {self.nodes[-1]:.3g}")
        out = np.empty_like(r)
        small = r < self.nodes[0]
        out[small] = self.g0 + self._c2 * r[small] ** 2
        mid = ~small & (r <= 1.0)
        out[mid] = np.exp(self._inner(np.log(r[mid])))
        far = r > 1.0
        out[far] = np.exp(self._outer(np.log(r[far])))
        return out


@lru_cache(maxsize=16)
def profile_table(alpha, n, per_decade=100):
    return RieszProfileTable(alpha, n, per_decade=per_decade)
