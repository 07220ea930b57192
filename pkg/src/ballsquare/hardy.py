"""Discrete Hardy and Hardy-Sobolev norm surrogates and the equivalence report.

Surrogates used here:

* ``||f||_{H^1}``: the ``L^1`` norm of ``sup_t |A_t f|`` with ``t`` ranging
  over the same :class:`~ballsquare.squarefn.ScaleGrid` as the square
  function (ball-average maximal function).
* ``||f||_{W^alpha_{H^1}}``: ``||f||_{H^1} + ||(-Delta)^(alpha/2) f||_{H^1}``.

Both are recorded by name in every report.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .convolve import DISCRETE, apply_symbol, ball_symbol_table, fractional_laplacian
from .errors import ParameterError
from .field import Field, lp_norm
from .squarefn import e_tilde, u_alpha

H1_SURROGATE = "L1 norm of scale-grid ball-average maximal function"
SOBOLEV_SURROGATE = "H1 surrogate of f plus H1 surrogate of (-Laplacian)^(alpha/2) f"
UNDEFINED = "undefined"


def _require_mean_zero(f):
    if not f.mean_zero:
        raise ParameterError("Hardy-space surrogates require a mean-zero field")


def maximal_function(f, scales, mode=DISCRETE):
    """Pointwise ``max_t |A_t f|`` over the scale grid."""
    out = np.zeros(f.grid.shape)
    for t in scales.scales:
        sym = ball_symbol_table(f.grid, float(t), mode).symbol
        out = np.maximum(out, np.abs(apply_symbol(f.values, sym)))
    return Field(f.grid, out)


def h1_norm(f, scales, mode=DISCRETE):
    """Hardy-space surrogate ``|| max_t |A_t f| ||_1``."""
    _require_mean_zero(f)
    if scales.grid != f.grid:
        raise ParameterError("scale grid and field live on different grids")
    return lp_norm(maximal_function(f, scales, mode), 1)


def sobolev_h1_norm(f, alpha, scales, mode=DISCRETE):
    """``h1_norm(f) + h1_norm((-Delta)^(alpha/2) f)``."""
    _require_mean_zero(f)
    if not 0 < alpha < f.grid.n:
        raise ParameterError(f"alpha must satisfy 0 < alpha < n = {f.grid.n}, got {alpha}")
    return h1_norm(f, scales, mode) + h1_norm(fractional_laplacian(f, alpha), scales, mode)


def _ratio(num, den):
    return num / den if den > 0 else None


@dataclass
class RegularityReport:
    alpha: float
    h1_norm: float
    sobolev_h1_norm: float
    u_alpha_l1: float
    ratio_thm1: float | None
    e_tilde_l1: dict = dc_field(default_factory=dict)
    ratio_thm2: dict = dc_field(default_factory=dict)
    grid: dict = dc_field(default_factory=dict)
    scales: dict = dc_field(default_factory=dict)
    label: str = ""

    def flat(self):
        """Flat mapping with ``None`` ratios rendered as ``"undefined"``."""
        row = {
            "label": self.label,
            "alpha": self.alpha,
            "h1_norm": self.h1_norm,
            "sobolev_h1_norm": self.sobolev_h1_norm,
            "u_alpha_l1": self.u_alpha_l1,
            "ratio_thm1": UNDEFINED if self.ratio_thm1 is None else self.ratio_thm1,
        }
        for k in sorted(self.e_tilde_l1):
            row[f"e_tilde_l1_k{k}"] = self.e_tilde_l1[k]
            r = self.ratio_thm2[k]
            row[f"ratio_thm2_k{k}"] = UNDEFINED if r is None else r
        row.update({f"grid_{key}": v for key, v in self.grid.items()})
        row.update({f"scales_{key}": v for key, v in self.scales.items()})
        row["h1_surrogate"] = H1_SURROGATE
        row["sobolev_surrogate"] = SOBOLEV_SURROGATE
        return row

    def to_json(self):
        return json.dumps(self.flat(), indent=2, allow_nan=False)

    @property
    def undefined(self):
        return self.ratio_thm1 is None


def equivalence_report(f, alpha, k_list, scales, override=False, mode=DISCRETE, threads=1,
                       label=""):
    """All norms entering the two norm equivalences, with their ratios.

    ``ratio_thm1 = sobolev / (h1 + ||U_alpha f||_1)``; ``ratio_thm2[k]`` is
    the same with ``E~_alpha^(k)``.  Zero denominators give ``None``.
    """
    _require_mean_zero(f)
    h1 = h1_norm(f, scales, mode)
    sob = h1 + h1_norm(fractional_laplacian(f, alpha), scales, mode)
    u1 = lp_norm(u_alpha(f, alpha, scales, override=override, mode=mode,
                         threads=threads).result, 1)
    e1, r2 = {}, {}
    for k in k_list:
        ek = lp_norm(e_tilde(f, alpha, int(k), scales, override=override, mode=mode,
                             threads=threads).result, 1)
        e1[int(k)] = ek
        r2[int(k)] = _ratio(sob, h1 + ek)
    return RegularityReport(
        alpha=float(alpha), h1_norm=h1, sobolev_h1_norm=sob, u_alpha_l1=u1,
        ratio_thm1=_ratio(sob, h1 + u1), e_tilde_l1=e1, ratio_thm2=r2,
        grid=f.grid.to_dict(), scales=scales.to_dict(), label=label,
    )


def write_report_csv(reports, path):
    rows = [r.flat() for r in reports]
    keys = list(rows[0]) if rows else []
    for row in rows[1:]:
        keys += [k for k in row if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k, "")) for k in keys})


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else UNDEFINED
    return v


def dilate(f, factor=2):
    """``f(factor * x)`` sampled on the ``factor``-times finer grid.

    On the refined grid the samples of ``f(factor x)`` are exactly the coarse
    samples of ``f`` tiled ``factor^n`` times, so no interpolation enters.
    """
    if int(factor) != factor or factor < 1:
        raise ParameterError("dilation factor must be a positive integer")
    g = f.grid
    fine = g.refined(int(factor))
    return Field(fine, np.tile(f.values, (int(factor),) * g.n))
