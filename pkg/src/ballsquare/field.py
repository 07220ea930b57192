"""Periodic sampling grids, sampled fields, elementary norms and field files.

A :class:`Field` holds real samples of a function on the torus ``[0, L)^n``
at the nodes ``x_i = i * h`` with ``h = L / N``.  Values are stored as an
``n``-dimensional C-ordered array, so the flattened order is row-major with
the first axis varying slowest.

Norms use :func:`math.fsum`, which is correctly rounded and therefore
independent of summand order; this makes every norm exactly invariant under
lattice translations.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DimensionMismatchError,
    ParameterError,
    TruncatedPayloadError,
)

MAGIC = b"SQFN1\x00"
_HEADER = struct.Struct("<6sIId")

MEAN_ZERO_RTOL = 1e-12


def _is_power_of_two(N):
    return N > 0 and (N & (N - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``N`` samples per axis on ``[0, L)^n``."""

    n: int
    N: int
    L: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"dimension n must be an integer >= 2, got {self.n}")
        if int(self.N) != self.N or self.N < 8 or not _is_power_of_two(int(self.N)):
            raise ParameterError(f"samples per axis must be a power of two >= 8, got {self.N}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ParameterError(f"period must be positive and finite, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "L", float(self.L))

    @property
    def spacing(self):
        return self.L / self.N

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def size(self):
        return self.N**self.n

    @property
    def cell_volume(self):
        return self.spacing**self.n

    def axis(self):
        """Sample coordinates along one axis."""
        return np.arange(self.N) * self.spacing

    def coordinates(self):
        """Tuple of ``n`` broadcastable coordinate arrays (``indexing='ij'``)."""
        ax = self.axis()
        return tuple(
            ax.reshape([self.N if k == d else 1 for k in range(self.n)])
            for d in range(self.n)
        )

    def frequencies(self):
        """Signed integer frequencies per axis, in FFT order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N)

    def refined(self, factor=2):
        return GridSpec(self.n, self.N * factor, self.L)

    def to_dict(self):
        return {"n": self.n, "N": self.N, "L": self.L}


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a :class:`GridSpec`.  Immutable once built."""

    grid: GridSpec
    values: np.ndarray = dc_field(repr=False)
    mean_zero: bool = dc_field(init=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.size != self.grid.size:
            raise DimensionMismatchError(
                f"expected {self.grid.size} samples for {self.grid}, got {vals.size}"
            )
        vals = vals.reshape(self.grid.shape)
        bad = np.argwhere(~np.isfinite(vals))
        if bad.size:
            raise ParameterError(f"non-finite sample at grid index {tuple(int(i) for i in bad[0])}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        m = abs(mean(vals))
        scale = float(np.max(np.abs(vals))) if vals.size else 0.0
        object.__setattr__(self, "mean_zero", bool(m <= MEAN_ZERO_RTOL * scale))

    def mean(self):
        return mean(self.values)

    def with_values(self, values):
        return Field(self.grid, values)

    def __add__(self, other):
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c):
        return Field(self.grid, self.values * float(c))

    __rmul__ = __mul__


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ParameterError(f"grid mismatch: {a.grid} vs {b.grid}")


def mean(values):
    """Correctly rounded arithmetic mean of an array."""
    v = np.asarray(values, dtype=np.float64).ravel()
    return math.fsum(v) / v.size


def make_field(grid, sampler):
    """Sample a pointwise function on every grid node.

    ``sampler`` receives ``n`` coordinate arrays (broadcastable, physical
    units) and returns an array or a scalar.
    """
    coords = grid.coordinates()
    with np.errstate(all="ignore"):
        vals = sampler(*coords)
    vals = np.broadcast_to(np.asarray(vals, dtype=np.float64), grid.shape)
    return Field(grid, vals)


def lp_norm(f, p):
    """Riemann-sum ``L^p`` norm for ``p`` in {1, 2}."""
    v = f.values.ravel()
    if p == 1:
        return math.fsum(np.abs(v)) * f.grid.cell_volume
    if p == 2:
        return math.sqrt(math.fsum(v * v) * f.grid.cell_volume)
    raise ParameterError(f"unsupported exponent p={p}; only 1 and 2 are supported")


def translate(f, shift):
    """Circular shift by a lattice vector: ``out[i] = f[i - shift]``.

    Components must lie in ``[0, N]``; ``N`` itself is reduced to 0.
    """
    shift = tuple(int(s) for s in shift)
    if len(shift) != f.grid.n:
        raise ParameterError(f"shift must have {f.grid.n} components, got {len(shift)}")
    N = f.grid.N
    for s in shift:
        if not 0 <= s <= N:
            raise ParameterError(f"shift component {s} outside [0, {N}]")
    shift = tuple(s % N for s in shift)
    return Field(f.grid, np.roll(f.values, shift, axis=tuple(range(f.grid.n))))


def write_field(f, path):
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.n, g.N, g.L))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_field(path, expected=None):
    """Read a field file; ``expected`` optionally pins the grid."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{path}: bad magic")
    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: truncated header")
    _, n, N, L = _HEADER.unpack_from(data)
    try:
        grid = GridSpec(n, N, L)
    except ParameterError as exc:
        raise DimensionMismatchError(f"{path}: invalid header ({exc})") from None
    if expected is not None and expected != grid:
        raise DimensionMismatchError(f"{path}: grid {grid} does not match expected {expected}")
    payload = data[_HEADER.size:]
    need = grid.size * 8
    if len(payload) < need:
        raise TruncatedPayloadError(
            f"{path}: truncated payload ({len(payload) // 8} of {grid.size} samples)"
        )
    if len(payload) > need:
        raise DimensionMismatchError(f"{path}: payload longer than {grid.size} samples")
    vals = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(grid.shape)
    return Field(grid, vals)


def write_field_csv(f, path):
    """One ``x1,...,xn,value`` row per sample, 17 significant digits."""
    g = f.grid
    grids = np.meshgrid(*([g.axis()] * g.n), indexing="ij")
    cols = [c.ravel() for c in grids] + [f.values.ravel()]
    header = ",".join([f"x{d + 1}" for d in range(g.n)] + ["value"])
    np.savetxt(path, np.column_stack(cols), delimiter=",", fmt="%.17g",
               header=header, comments="")
