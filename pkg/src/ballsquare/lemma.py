"""Quadrature checks for the smoothed-Riesz-kernel difference integral.

With ``G = L_alpha * Phi`` and dimensionless ``u = x/t``, ``v = y/t``,

    I(x, y, t) = t^(-2n) F(u, v),
    F(u, v) = int_{z in B_0, 2|v| < |u - z| < 6} |G(u - v - z) - G(u - z)|^2 dz,

and the claimed bound reads ``F(u, v) <= C |v|^2`` whenever ``|u| < 7`` and
``|v| < |u| / 2``.

``F`` is integrated in polar coordinates about ``u``: writing ``u - z =
rho * omega`` the annulus condition becomes ``2|v| < rho < 6`` and ``z in B_0``
becomes an angular cap about ``u/|u|`` whose half-angle depends only on
``rho``.  The integration domain is thus a product of intervals with no
indicator discontinuities.  Radii where ``G`` or the cap lose smoothness are
aligned with initial cell boundaries.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from .errors import BallSquareError, ConvergenceError, ParameterError
from .kernels import grad_riesz_magnitude, profile_table, sphere_area, tau
from .quadrature import adaptive_cubature

OUTER_RADIUS = 6.0
U_BOUND = 7.0


@dataclass(frozen=True)
class DimensionlessPair:
    u: tuple
    v: tuple

    @property
    def u_norm(self):
        return float(np.linalg.norm(self.u))

    @property
    def v_norm(self):
        return float(np.linalg.norm(self.v))

    def admissible(self):
        """``|u| < 7`` and ``|v| < |u| / 2``."""
        return self.u_norm < U_BOUND and self.v_norm < self.u_norm / 2


@dataclass(frozen=True)
class FResult:
    value: float
    achieved: float
    empty: bool = False
    cells: int = 0

    def __float__(self):
        return self.value


def _check_tol(tol):
    if not 1e-10 <= tol <= 1e-4:
        raise ParameterError(f"tolerance must lie in [1e-10, 1e-4], got {tol}")


def _frame(u):
    """Orthonormal frame whose first vector is ``u / |u|`` (``e_1`` if ``u = 0``)."""
    n = len(u)
    un = np.linalg.norm(u)
    first = np.asarray(u, dtype=float) / un if un > 0 else np.eye(n)[0]
    basis = [first]
    for e in np.eye(n):
        w = e - sum(np.dot(e, b) * b for b in basis)
        if np.linalg.norm(w) > 1e-8:
            basis.append(w / np.linalg.norm(w))
        if len(basis) == n:
            break
    return np.array(basis)


def _cap_angle(rho, un):
    """Half-angle of ``{omega : |u - rho omega| < 1}`` about ``u/|u|``."""
    if un == 0:
        return np.where(rho < 1.0, math.pi, 0.0)
    c = (un * un + rho * rho - 1.0) / (2.0 * rho * un)
    return np.arccos(np.clip(c, -1.0, 1.0))


def _radial_breaks(un, vn, lo, hi):
    pts = {1.0, un - 1.0, 1.0 - un, un + 1.0, 1.0 - vn, 1.0 + vn, 1.0 - un + vn, 1.0 - un - vn}
    return sorted(p for p in pts if lo < p < hi)


def F_dimensionless(alpha, n, u, v, tol=1e-8, table=None):
    """``F(u, v)`` by adaptive cubature to relative tolerance ``tol``.

    Returns an :class:`FResult`; an empty integration region yields value 0
    with ``empty=True``.
    """
    _check_tol(tol)
    if n not in (2, 3):
        raise ParameterError(f"F is implemented for n in (2, 3), got {n}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (n,) or v.shape != (n,):
        raise ParameterError(f"u and v must be points of R^{n}")
    vn = float(np.linalg.norm(v))
    if vn == 0:
        raise ParameterError("v must be non-zero")
    un = float(np.linalg.norm(u))
    G = table if table is not None else profile_table(float(alpha), int(n))
    rho_lo = max(2.0 * vn, un - 1.0)
    rho_hi = min(OUTER_RADIUS, un + 1.0)
    if rho_lo >= rho_hi:
        return FResult(0.0, 0.0, empty=True)
    span = rho_hi - rho_lo
    frame = _frame(u)
    vloc = frame @ v
    breaks = [(b - rho_lo) / span for b in _radial_breaks(un, vn, rho_lo, rho_hi)]

    if n == 2:
        def integrand(p):
            rho = rho_lo + span * p[:, 0]
            half = _cap_angle(rho, un)
            phi = half * (2.0 * p[:, 1] - 1.0)
            wx = rho * np.cos(phi) - vloc[0]
            wy = rho * np.sin(phi) - vloc[1]
            diff = G(np.hypot(wx, wy)) - G(rho)
            return diff * diff * rho * 2.0 * half * span
        cuts = [breaks, [0.5]]
    else:
        def integrand(p):
            rho = rho_lo + span * p[:, 0]
            half = _cap_angle(rho, un)
            phi = half * p[:, 1]
            psi = 2.0 * math.pi * p[:, 2]
            s = np.sin(phi)
            wx = rho * np.cos(phi) - vloc[0]
            wy = rho * s * np.cos(psi) - vloc[1]
            wz = rho * s * np.sin(psi) - vloc[2]
            diff = G(np.sqrt(wx * wx + wy * wy + wz * wz)) - G(rho)
            return diff * diff * rho * rho * s * half * 2.0 * math.pi * span
        cuts = [breaks, None, None]

    res = adaptive_cubature(integrand, n, tol, cuts=cuts)
    return FResult(res.value, res.achieved, False, res.cells)


def i11(alpha, n, x, y, t, tol=1e-8, table=None):
    """``t^(-2n) F(x/t, y/t)``."""
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    res = F_dimensionless(alpha, n, x / t, y / t, tol, table)
    scale = t ** (-2 * n)
    return FResult(res.value * scale, res.achieved, res.empty, res.cells)


@dataclass
class SampleSpec:
    """Seeded design for :func:`bound_scan`.

    ``bases`` random ``u`` (``|u|`` uniform in ``u_range``, uniform direction)
    each carry a ladder ``|v| = |u| 2^(-j) / 2``, ``j = 1..rungs``, with a
    random ``v`` direction.  ``custom`` adds explicit ``(u, v)`` pairs.
    """

    bases: int = 15
    rungs: int = 7
    seed: int = 2024
    tol: float = 1e-8
    u_range: tuple = (0.25, 6.75)
    custom: list = dc_field(default_factory=list)
    slope_rungs: int = 3

    def pairs(self, n):
        rng = np.random.default_rng(self.seed)
        out = []
        for b in range(self.bases):
            un = rng.uniform(*self.u_range)
            du = rng.standard_normal(n)
            dv = rng.standard_normal(n)
            u = un * du / np.linalg.norm(du)
            dv = dv / np.linalg.norm(dv)
            for j in range(1, self.rungs + 1):
                out.append((b, j, u, un * 2.0**-j / 2 * dv))
        for c, (u, v) in enumerate(self.custom):
            out.append((-1 - c, 0, np.asarray(u, float), np.asarray(v, float)))
        return out


@dataclass
class BoundScanReport:
    alpha: float
    n: int
    tol: float
    samples: list
    skipped: list
    failures: list
    sup_ratio: float
    slopes: list
    min_slope: float | None
    max_achieved: float

    def to_json(self):
        return json.dumps(asdict(self), indent=2, allow_nan=False)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("ux,uy,vx,vy,F,ratio\n" if self.n == 2 else "ux,uy,uz,vx,vy,vz,F,ratio\n")
            for s in self.samples:
                vals = list(s["u"]) + list(s["v"]) + [s["F"], s["ratio"]]
                fh.write(",".join(repr(float(x)) for x in vals) + "\n")


def _evaluate(alpha, n, item, tol, table):
    base, rung, u, v = item
    pair = DimensionlessPair(tuple(u), tuple(v))
    record = {"base": int(base), "rung": int(rung), "u": [float(a) for a in u],
              "v": [float(a) for a in v], "u_norm": pair.u_norm, "v_norm": pair.v_norm}
    if not pair.admissible():
        return "skip", {**record, "reason": "inadmissible: need |u| < 7 and |v| < |u|/2"}
    try:
        res = F_dimensionless(alpha, n, u, v, tol, table)
    except BallSquareError as exc:
        return "fail", {**record, "error": str(exc)}
    ratio = res.value / pair.v_norm**2
    return "ok", {**record, "F": res.value, "ratio": ratio, "achieved": res.achieved,
                  "empty": res.empty, "cells": res.cells}


def bound_scan(alpha, n, spec=None, threads=1):
    """Evaluate ``F(u, v) / |v|^2`` over a seeded admissible design.

    Inadmissible pairs are skipped with a label and quadrature failures are
    listed; neither stops the scan.  Slopes of ``log F`` against ``log |v|``
    are taken between consecutive rungs of each ladder, for the last
    ``spec.slope_rungs`` rungs.
    """
    spec = spec or SampleSpec()
    _check_tol(spec.tol)
    table = profile_table(float(alpha), int(n))
    items = spec.pairs(n)

    def run(item):
        return _evaluate(alpha, n, item, spec.tol, table)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(it) for it in items]
    samples = [r for tag, r in results if tag == "ok"]
    skipped = [r for tag, r in results if tag == "skip"]
    failures = [r for tag, r in results if tag == "fail"]

    slopes = []
    ladders = {}
    for s in samples:
        if s["base"] >= 0 and not s["empty"]:
            ladders.setdefault(s["base"], []).append(s)
    for base, rungs in sorted(ladders.items()):
        rungs.sort(key=lambda s: s["rung"])
        tail = rungs[-(spec.slope_rungs + 1):]
        for a, b in zip(tail[:-1], tail[1:]):
            if a["F"] > 0 and b["F"] > 0:
                slope = math.log(a["F"] / b["F"]) / math.log(a["v_norm"] / b["v_norm"])
                slopes.append({"base": base, "rungs": [a["rung"], b["rung"]],
                               "v_norms": [a["v_norm"], b["v_norm"]], "slope": slope})
    ratios = [s["ratio"] for s in samples]
    return BoundScanReport(
        alpha=float(alpha), n=int(n), tol=spec.tol, samples=samples, skipped=skipped,
        failures=failures, sup_ratio=max(ratios) if ratios else 0.0, slopes=slopes,
        min_slope=min((s["slope"] for s in slopes), default=None),
        max_achieved=max((s["achieved"] for s in samples), default=0.0),
    )


def grad_integral_closed_form(alpha, n, radius):
    """``sigma_{n-1} tau(alpha) (n - alpha) C^(alpha-1) / (alpha - 1)``; infinite for ``alpha <= 1``.

    Polar integration of ``|w|^(alpha-n-1)`` against ``rho^(n-1) d rho``
    leaves ``rho^(alpha-2)``, integrable at the origin only when ``alpha > 1``.
    """
    if alpha <= 1:
        return math.inf
    return sphere_area(n) * tau(alpha, n) * (n - alpha) * radius ** (alpha - 1) / (alpha - 1)


def _sphere_rule(n, order):
    """Product Gauss rule on the unit sphere in ``R^n`` (n = 2 or 3)."""
    if n == 2:
        th = 2 * math.pi * (np.arange(order) + 0.5) / order
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(order, 2 * math.pi / order)
    x, w = np.polynomial.legendre.leggauss(order)
    ps = 2 * math.pi * (np.arange(2 * order) + 0.5) / (2 * order)
    ct, pp = np.meshgrid(x, ps, indexing="ij")
    st = np.sqrt(1 - ct**2)
    pts = np.column_stack([(st * np.cos(pp)).ravel(), (st * np.sin(pp)).ravel(), ct.ravel()])
    wts = np.outer(w, np.full(2 * order, 2 * math.pi / (2 * order))).ravel()
    return pts, wts


@dataclass(frozen=True)
class GradCheck:
    quadrature: float
    closed_form: float
    alpha: float
    n: int
    radius: float
    in_admissible_range: bool

    @property
    def rel_error(self):
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)


def grad_integral_check(alpha, n, radius, tol=1e-10, shells=400, order=12):
    """Integral of ``|grad L_alpha|`` over ``|w| <= radius``, two ways.

    The quadrature evaluates the gradient magnitude at points of ``R^n``:
    dyadic shells ``[C 2^(-j-1), C 2^(-j)]`` with Gauss-Legendre in the radius
    and a product rule on the sphere, summed toward the origin until the
    geometric tail (extrapolated from the last two shells) is below ``tol``.
    """
    if n not in (2, 3):
        raise ParameterError(f"gradient check implemented for n in (2, 3), got {n}")
    if not 0 < alpha < n:
        raise ParameterError(f"alpha must satisfy 0 < alpha < n = {n}, got {alpha}")
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    xr, wr = np.polynomial.legendre.leggauss(order)
    dirs, dw = _sphere_rule(n, order)
    total, prev = 0.0, None
    for j in range(shells):
        a, b = radius * 2.0 ** (-j - 1), radius * 2.0**-j
        rho = 0.5 * (b - a) * xr + 0.5 * (b + a)
        pts = rho[:, None, None] * dirs[None, :, :]
        with np.errstate(over="ignore"):
            g = grad_riesz_magnitude(alpha, n, pts)
        shell = 0.5 * (b - a) * float(np.sum(wr[:, None] * dw[None, :] * g * rho[:, None] ** (n - 1)))
        total += shell
        if prev is not None and prev > 0:
            q = shell / prev
            if q < 1:
                tail = shell * q / (1 - q)
                if abs(tail) < tol * abs(total):
                    return GradCheck(total + tail, grad_integral_closed_form(alpha, n, radius),
                                     float(alpha), int(n), float(radius), n / 2 < alpha < n)
        prev = shell
    raise ConvergenceError(
        f"gradient integral did not converge in {shells} dyadic shells; "
        f"it diverges for alpha <= 1 (alpha={alpha})",
        achieved=float("inf"),
    )


def grad_integral_trend(n, radius, alphas):
    """Closed-form values along ``alphas``; they blow up like ``1/(alpha - 1)`` as ``alpha -> 1+``."""
    return [(float(a), grad_integral_closed_form(a, n, radius)) for a in alphas]
