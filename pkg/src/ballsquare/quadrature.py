"""Adaptive tensor Gauss-Legendre cubature on the unit hypercube.

Cells whose error indicator exceeds an equal share of the global budget are
bisected along the axis where the integrand is least resolved.
Integrands must be vectorised over points of shape ``(P, d)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True)
class CubatureResult:
    value: float
    error: float
    cells: int
    evaluations: int

    @property
    def achieved(self):
        return self.error / abs(self.value) if self.value != 0 else (0.0 if self.error == 0 else np.inf)


def _gauss(q):
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor(rules):
    pts = np.array(list(itertools.product(*[r[0] for r in rules])))
    wts = np.prod(np.array(list(itertools.product(*[r[1] for r in rules]))), axis=1)
    return pts, wts


def _initial_cells(d, cuts):
    axes = []
    for k in range(d):
        c = [0.0, 1.0]
        if cuts is not None and cuts[k] is not None:
            c = sorted(set([0.0, 1.0] + [float(v) for v in cuts[k] if 0.0 < v < 1.0]))
        axes.append(list(zip(c[:-1], c[1:])))
    lo, hi = [], []
    for combo in itertools.product(*axes):
        lo.append([a for a, _ in combo])
        hi.append([b for _, b in combo])
    return np.array(lo), np.array(hi)


def adaptive_cubature(func, d, rtol, atol=0.0, order=7, cuts=None, max_cells=400_000,
                      batch=2048):
    """Integrate ``func`` over ``[0, 1]^d`` to ``rtol`` relative accuracy.

    Each cell is integrated with the ``order``-point tensor Gauss rule and
    with ``d`` companion rules that drop to ``order - 2`` points along one
    axis.  The largest companion difference is the cell's error indicator and
    names the axis along which the cell is bisected.

    ``cuts`` optionally lists, per axis, interior breakpoints where the
    integrand is known to lose smoothness; the initial cells are aligned to
    them.  Raises :class:`ConvergenceError` when ``max_cells`` is exceeded.
    """
    full = _gauss(order)
    reduced = _gauss(order - 2)
    rules = [_tensor([full] * d)]
    for k in range(d):
        rules.append(_tensor([reduced if j == k else full for j in range(d)]))
    pts = np.concatenate([r[0] for r in rules])
    sizes = [len(r[1]) for r in rules]
    bounds = np.cumsum([0] + sizes)
    per_cell = int(bounds[-1])

    def estimate(lo, hi):
        width = hi - lo
        vol = np.prod(width, axis=1)
        est = np.empty((len(lo), d + 1))
        for s in range(0, len(lo), batch):
            l, w = lo[s:s + batch], width[s:s + batch]
            p = l[:, None, :] + w[:, None, :] * pts[None, :, :]
            f = func(p.reshape(-1, d)).reshape(len(l), -1)
            for r, (a, b) in enumerate(zip(bounds[:-1], bounds[1:])):
                est[s:s + batch, r] = f[:, a:b] @ rules[r][1]
        est *= vol[:, None]
        diffs = np.abs(est[:, 1:] - est[:, :1])
        return est[:, 0], diffs.max(axis=1), diffs.argmax(axis=1)

    lo, hi = _initial_cells(d, cuts)
    est, err, axis = estimate(lo, hi)
    evals = len(lo) * per_cell
    while True:
        total = est.sum()
        total_err = err.sum()
        budget = max(rtol * abs(total), atol)
        if total_err <= budget:
            return CubatureResult(float(total), float(total_err), len(lo), evals)
        split = err > budget / len(lo)
        if not split.any():
            split = err >= err.max()
        if len(lo) + int(split.sum()) > max_cells:
            achieved = total_err / abs(total) if total else np.inf
            raise ConvergenceError(
                f"cubature budget of {max_cells} cells exhausted at relative error {achieved:.3g}",
                achieved=achieved,
            )
        slo, shi, ax = lo[split], hi[split], axis[split]
        rows = np.arange(len(slo))
        mid = 0.5 * (slo[rows, ax] + shi[rows, ax])
        left_hi = shi.copy()
        left_hi[rows, ax] = mid
        right_lo = slo.copy()
        right_lo[rows, ax] = mid
        clo = np.concatenate([slo, right_lo])
        chi = np.concatenate([left_hi, shi])
        c_est, c_err, c_ax = estimate(clo, chi)
        evals += len(clo) * per_cell
        keep = ~split
        lo = np.concatenate([lo[keep], clo])
        hi = np.concatenate([hi[keep], chi])
        est = np.concatenate([est[keep], c_est])
        err = np.concatenate([err[keep], c_err])
        axis = np.concatenate([axis[keep], c_ax])
