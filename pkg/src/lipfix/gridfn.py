"""Piecewise-linear functions on a uniform grid.

A :class:`GridFunction` stores node values on ``G`` equally spaced nodes of
``[lo, hi]`` and evaluates by linear interpolation between them.  Evaluation
outside the interval clamps to the nearest endpoint value; callers that care
pass an :class:`EvalDiagnostics` to count such clamps.

Linear interpolation is deliberate: the largest segment slope of the
interpolant IS its smallest Lipschitz constant, so the seminorm below is exact
for the stored function, and resampling never overshoots the data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .errors import GridMismatch
from .exprlang import Expr, evaluate

__all__ = [
    "GridFunction",
    "EvalDiagnostics",
    "from_expr",
    "from_values",
    "lin_comb",
    "sup_norm",
    "lip_seminorm",
    "lip_norm",
    "bl_norm",
    "refine_double",
    "write_csv",
    "read_csv",
]


@dataclass
class EvalDiagnostics:
    """Mutable counter threaded through computations that evaluate grid
    functions; counts evaluations that fell outside [lo, hi]."""

    out_of_range: int = 0


@dataclass(frozen=True)
class GridFunction:
    lo: float
    hi: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo!r}, {self.hi!r}]")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("values must be a 1-d array of length >= 2")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.size - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.size)

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.lo == other.lo and self.hi == other.hi and self.size == other.size
        )

    def eval(self, x: float, diag: EvalDiagnostics | None = None) -> float:
        """Piecewise-linear value at x; clamps outside [lo, hi]."""
        if diag is not None and (x < self.lo or x > self.hi):
            diag.out_of_range += 1
        return float(np.interp(x, self.nodes(), self.values))

    def eval_many(
        self, xs: np.ndarray, diag: EvalDiagnostics | None = None
    ) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if diag is not None:
            diag.out_of_range += int(np.count_nonzero((xs < self.lo) | (xs > self.hi)))
        return np.interp(xs, self.nodes(), self.values)


def from_values(lo: float, hi: float, values: Iterable[float]) -> GridFunction:
    return GridFunction(lo, hi, np.asarray(list(values), dtype=float))


def from_expr(e: Expr, lo: float, hi: float, count: int) -> GridFunction:
    """Sample an expression at `count` equally spaced nodes."""
    if count < 2:
        raise ValueError(f"need at least 2 nodes, got {count}")
    nodes = np.linspace(lo, hi, count)
    values = np.fromiter((evaluate(e, float(t)) for t in nodes), dtype=float, count=count)
    return GridFunction(lo, hi, values)


def lin_comb(a: float, u: GridFunction, b: float, v: GridFunction) -> GridFunction:
    """Nodewise a*u + b*v on a shared grid."""
    if not u.same_grid(v):
        raise GridMismatch(
            f"grids differ: [{u.lo}, {u.hi}] n={u.size} vs [{v.lo}, {v.hi}] n={v.size}"
        )
    return GridFunction(u.lo, u.hi, a * u.values + b * v.values)


def sup_norm(u: GridFunction) -> float:
    return float(np.max(np.abs(u.values)))


def lip_seminorm(u: GridFunction) -> float:
    """Largest segment slope; the exact smallest Lipschitz constant of the
    interpolant."""
    return float(np.max(np.abs(np.diff(u.values))) / u.spacing)


def lip_norm(u: GridFunction, x0: float) -> float:
    """|u(x0)| plus the Lipschitz seminorm (base point inside [lo, hi])."""
    if not (u.lo <= x0 <= u.hi):
        raise ValueError(f"base point {x0!r} outside [{u.lo!r}, {u.hi!r}]")
    return abs(u.eval(x0)) + lip_seminorm(u)


def bl_norm(u: GridFunction) -> float:
    """Sup norm plus Lipschitz seminorm."""
    return sup_norm(u) + lip_seminorm(u)


def refine_double(u: GridFunction) -> GridFunction:
    """Resample onto the 2G-1 grid (nodes nest; exact for the interpolant)."""
    out = np.empty(2 * u.size - 1)
    out[0::2] = u.values
    out[1::2] = 0.5 * (u.values[:-1] + u.values[1:])
    return GridFunction(u.lo, u.hi, out)


# --- CSV serialization (header "x,value", 17 significant digits) -----------


def _fmt(v: float) -> str:
    return format(v, ".17g")


def write_csv(u: GridFunction, stream: IO[str], expected: GridFunction | None = None) -> None:
    """Write one row per node.  An optional second value column carries a
    reference function sampled on the same grid."""
    writer = csv.writer(stream, lineterminator="\n")
    if expected is None:
        writer.writerow(["x", "value"])
        for x, v in zip(u.nodes(), u.values):
            writer.writerow([_fmt(x), _fmt(v)])
    else:
        if not u.same_grid(expected):
            raise GridMismatch("expected-value column must share the grid")
        writer.writerow(["x", "value", "expected"])
        for x, v, w in zip(u.nodes(), u.values, expected.values):
            writer.writerow([_fmt(x), _fmt(v), _fmt(w)])


def read_csv(stream: IO[str]) -> GridFunction:
    """Read a grid function written by :func:`write_csv` (extra columns are
    ignored).  Nodes must be equally spaced and increasing."""
    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or len(header) < 2 or header[0] != "x" or header[1] != "value":
        raise ValueError("expected CSV header starting with: x,value")
    xs, vs = [], []
    for row in reader:
        if not row:
            continue
        xs.append(float(row[0]))
        vs.append(float(row[1]))
    if len(xs) < 2:
        raise ValueError("need at least 2 rows")
    lo, hi = xs[0], xs[-1]
    expected_nodes = np.linspace(lo, hi, len(xs))
    if not np.allclose(xs, expected_nodes, rtol=0.0, atol=4.0 * np.spacing(max(abs(lo), abs(hi)))):
        raise ValueError("nodes are not a uniform increasing grid")
    return GridFunction(lo, hi, np.asarray(vs))
