"""Exploratory-analysis emitters: correlations, labelled scatter points,
Gaussian KDE grids and quadrant cross-tabulations.

Everything here returns plain data for external plotting. The only
rendering is :func:`svg_heatmap`, a deterministic raster for quick looks.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import DataError, Dataset

# grid padding beyond the data range, in bandwidths; 4 keeps the lost tail
# mass under 1e-4 even for two-point samples
PAD_BANDWIDTHS = 4.0
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class CorrelationMatrix:
    columns: tuple[str, ...]
    values: np.ndarray
    undefined: tuple[str, ...] = ()


@dataclass(frozen=True)
class KdeGrid:
    """Density sampled on a uniform grid.

    For two axes ``density[i, j]`` is the value at ``(axes[0][j], axes[1][i])``,
    i.e. rows follow the second (y) axis as in an image.
    """

    axes: tuple[np.ndarray, ...]
    density: np.ndarray
    bandwidths: tuple[float, ...]

    @property
    def cell_volume(self) -> float:
        return float(np.prod([a[1] - a[0] for a in self.axes]))

    def mass(self) -> float:
        return float(self.density.sum() * self.cell_volume)


@dataclass(frozen=True)
class QuadrantTable:
    """Counts indexed ``[factor_a, factor_b, label]`` with 0 = no, 1 = yes."""

    factor_a: str
    factor_b: str
    counts: np.ndarray

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=2)

    @property
    def empty(self) -> np.ndarray:
        return self.totals == 0

    @property
    def positive_rate(self) -> np.ndarray:
        """Label-1 share per quadrant; NaN where the quadrant is empty."""
        tot = self.totals
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(tot > 0, self.counts[:, :, 1] / np.maximum(tot, 1), np.nan)

    def to_dict(self) -> dict:
        quads = []
        rate = self.positive_rate
        for a in (0, 1):
            for b in (0, 1):
                quads.append(
                    {
                        self.factor_a: ("no", "yes")[a],
                        self.factor_b: ("no", "yes")[b],
                        "label_0": int(self.counts[a, b, 0]),
                        "label_1": int(self.counts[a, b, 1]),
                        "positive_rate": None if self.empty[a, b] else float(rate[a, b]),
                        "empty": bool(self.empty[a, b]),
                    }
                )
        return {
            "factor_a": self.factor_a,
            "factor_b": self.factor_b,
            "n_rows": int(self.counts.sum()),
            "quadrants": quads,
        }


def correlation(d: Dataset, columns=None) -> CorrelationMatrix:
    """Pearson correlation matrix over ``columns`` (all features by default).

    Constant columns have no defined correlation; their entries, diagonal
    included, are reported as 0 and the column is listed in ``undefined``.
    """
    columns = tuple(d.feature_names if columns is None else columns)
    if d.n_rows < 2:
        raise DataError("correlation needs at least 2 rows")
    X = np.column_stack([d.column(c) for c in columns])
    Z = X - X.mean(axis=0)
    norms = np.sqrt((Z * Z).sum(axis=0))
    const = norms == 0
    Z = Z / np.where(const, 1.0, norms)
    R = np.clip(Z.T @ Z, -1.0, 1.0)
    R = (R + R.T) / 2.0
    np.fill_diagonal(R, np.where(const, 0.0, 1.0))
    R[const, :] = 0.0
    R[:, const] = 0.0
    return CorrelationMatrix(columns, R, tuple(c for c, k in zip(columns, const) if k))


def scott_bandwidth(values, n_dims: int = 1) -> float:
    values = np.asarray(values, dtype=float)
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    if sd == 0.0:
        raise DataError("bandwidth is zero: all values identical")
    return sd * len(values) ** (-1.0 / (n_dims + 4))


def kde_evaluate(points, data, bandwidths) -> np.ndarray:
    """Product-Gaussian KDE of ``data`` evaluated at ``points``.

    ``data`` and ``points`` are ``(n, d)`` and ``(m, d)`` (1-D inputs are
    treated as ``d = 1``); ``bandwidths`` has one entry per dimension.
    """
    data = np.asarray(data, dtype=float)
    points = np.asarray(points, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if points.ndim == 1:
        points = points[:, None]
    h = np.asarray(bandwidths, dtype=float).reshape(-1)
    u = (points[:, None, :] - data[None, :, :]) / h
    k = np.exp(-0.5 * (u * u).sum(axis=2)) / np.prod(h * _SQRT_2PI)
    return k.mean(axis=1)


def _axis(values, h, grid_size):
    lo, hi = float(np.min(values)), float(np.max(values))
    return np.linspace(lo - PAD_BANDWIDTHS * h, hi + PAD_BANDWIDTHS * h, grid_size)


def _gauss_matrix(grid, values, h):
    u = (grid[:, None] - values[None, :]) / h
    return np.exp(-0.5 * u * u) / (h * _SQRT_2PI)


def _kde_1d_single(values, grid_size, bandwidth):
    values = np.asarray(values, dtype=float)
    h = scott_bandwidth(values, 1) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise DataError("bandwidth must be positive")
    x = _axis(values, h, grid_size)
    dens = _gauss_matrix(x, values, h).mean(axis=1)
    return KdeGrid((x,), dens, (h,))


def _kde_2d_single(x, y, grid_size, bandwidths):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if bandwidths is None:
        hx, hy = scott_bandwidth(x, 2), scott_bandwidth(y, 2)
    else:
        hx, hy = (float(b) for b in bandwidths)
    if hx <= 0 or hy <= 0:
        raise DataError("bandwidths must be positive")
    gx, gy = _axis(x, hx, grid_size), _axis(y, hy, grid_size)
    Kx = _gauss_matrix(gx, x, hx)
    Ky = _gauss_matrix(gy, y, hy)
    dens = (Ky @ Kx.T) / len(x)
    return KdeGrid((gx, gy), dens, (hx, hy))


def _groups(n, by_label):
    if by_label is None:
        return None
    lab = np.asarray(by_label)
    if len(lab) != n:
        raise DataError("by_label length does not match the data")
    return {int(c): lab == c for c in np.unique(lab)}


def kde_1d(values, by_label=None, grid_size: int = 100, bandwidth: Optional[float] = None):
    """Gaussian KDE on a uniform grid.

    Bandwidth defaults to Scott's rule, ``std * n**(-1/5)``. The grid spans
    the data range padded by :data:`PAD_BANDWIDTHS` bandwidths.

    Returns a :class:`KdeGrid`, or ``{label: KdeGrid}`` when ``by_label`` is
    given (each group gets its own bandwidth and grid).
    """
    if grid_size < 2:
        raise DataError("grid_size must be at least 2")
    values = np.asarray(values, dtype=float).reshape(-1)
    groups = _groups(len(values), by_label)
    if groups is None:
        return _kde_1d_single(values, grid_size, bandwidth)
    return {c: _kde_1d_single(values[m], grid_size, bandwidth) for c, m in groups.items()}


def kde_2d(x, y, by_label=None, grid_size: int = 100, bandwidths=None):
    """Bivariate product-Gaussian KDE on a ``grid_size x grid_size`` lattice.

    Per-axis bandwidths default to Scott's rule ``std * n**(-1/6)``.
    """
    if grid_size < 2:
        raise DataError("grid_size must be at least 2")
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(x) != len(y):
        raise DataError("x and y must have equal length")
    groups = _groups(len(x), by_label)
    if groups is None:
        return _kde_2d_single(x, y, grid_size, bandwidths)
    return {c: _kde_2d_single(x[m], y[m], grid_size, bandwidths) for c, m in groups.items()}


def quadrant_table(d: Dataset, factor_a: str, factor_b: str) -> QuadrantTable:
    a = d.column(factor_a)
    b = d.column(factor_b)
    for name, col in ((factor_a, a), (factor_b, b)):
        if not np.isin(col, (0.0, 1.0)).all():
            raise DataError(f"column {name!r} is not binary (0/1)")
    counts = np.zeros((2, 2, 2), dtype=np.int64)
    np.add.at(counts, (a.astype(int), b.astype(int), d.labels), 1)
    return QuadrantTable(factor_a, factor_b, counts)


def scatter_export(d: Dataset, x: str, y: str) -> list[tuple[float, float, int]]:
    return list(zip(d.column(x).tolist(), d.column(y).tolist(), d.labels.tolist()))


# writers


def _atomic_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    return repr(float(v))


def write_correlation_csv(cm: CorrelationMatrix, path) -> None:
    rows = [["", *cm.columns]]
    for name, vals in zip(cm.columns, cm.values):
        rows.append([name, *(_fmt(v) for v in vals)])
    _atomic_text(path, _csv_text(rows))


def write_kde_csv(grid: KdeGrid, path) -> None:
    """1-D: ``x,density`` rows. 2-D: first row holds x coordinates, each
    later row starts with its y coordinate followed by the densities."""
    if len(grid.axes) == 1:
        rows = [["x", "density"]]
        rows += [[_fmt(a), _fmt(v)] for a, v in zip(grid.axes[0], grid.density)]
    else:
        gx, gy = grid.axes
        rows = [["y\\x", *(_fmt(v) for v in gx)]]
        rows += [[_fmt(yv), *(_fmt(v) for v in row)] for yv, row in zip(gy, grid.density)]
    _atomic_text(path, _csv_text(rows))


def write_quadrant_json(qt: QuadrantTable, path) -> None:
    _atomic_text(path, json.dumps(qt.to_dict(), indent=2) + "\n")


def write_scatter_csv(points, path, x: str = "x", y: str = "y") -> None:
    rows = [[x, y, "label"]] + [[_fmt(a), _fmt(b), int(c)] for a, b, c in points]
    _atomic_text(path, _csv_text(rows))


def svg_heatmap(
    values,
    cell: int = 4,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    origin: str = "upper",
) -> str:
    """Grayscale SVG raster of a matrix; darker means larger.

    ``origin="lower"`` draws the first row at the bottom, which suits KDE
    grids whose rows follow an increasing y axis. Output depends only on the
    arguments, so it is byte-stable.
    """
    V = np.asarray(values, dtype=float)
    if V.ndim == 1:
        V = V[None, :]
    lo = float(np.min(V)) if lo is None else lo
    hi = float(np.max(V)) if hi is None else hi
    span = hi - lo if hi > lo else 1.0
    h, w = V.shape
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" height="{h * cell}" '
        f'shape-rendering="crispEdges">'
    ]
    for i in range(h):
        top = (h - 1 - i) * cell if origin == "lower" else i * cell
        for j in range(w):
            g = 255 - int(round(255 * min(max((V[i, j] - lo) / span, 0.0), 1.0)))
            out.append(
                f'<rect x="{j * cell}" y="{top}" width="{cell}" height="{cell}" '
                f'fill="rgb({g},{g},{g})"/>'
            )
    out.append("</svg>\n")
    return "\n".join(out)
