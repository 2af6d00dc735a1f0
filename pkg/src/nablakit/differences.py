"""Divided differences and discrete convexity classification.

Order-m divided differences over distinct points, their alternating-sign
(nabla) variants, the iterated two-variable form, double-binomial finite
differences, and window scans that classify sampled data as convex or
nabla-convex of a requested order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolation
from .grids import Grid1D, Grid2D, as_grid1d, as_grid2d
from .numerics import DEFAULT_TOLERANCE, TolerancePolicy, stable_sum


def _as_distinct_points(points) -> np.ndarray:
    pts = np.asarray(getattr(points, "points", points), dtype=float).ravel()
    if pts.size < 1:
        raise ContractViolation("need at least one point")
    if not np.all(np.isfinite(pts)):
        raise ContractViolation("points must be finite")
    if len(np.unique(pts)) != len(pts):
        raise ContractViolation("points must be pairwise distinct (coincidence limits are not supported)")
    return pts


def _values_at(f, pts: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(pts), dtype=float)
    return np.broadcast_to(vals, pts.shape).astype(float)


def dd_from_values(points, values) -> float:
    """Top entry of the divided-difference recursion for tabulated values."""
    pts = np.asarray(points, dtype=float)
    row = np.asarray(values, dtype=float).copy()
    n = len(row)
    if len(pts) != n:
        raise ContractViolation("points and values must have equal length")
    for level in range(1, n):
        row = (row[1:] - row[:-1]) / (pts[level:] - pts[:-level])
    return float(row[0])


def divided_difference(f: Callable, points) -> float:
    """Divided difference of ``f`` over the given distinct points.

    Order m = len(points) - 1.  The value is independent of the ordering of
    the points and equals the explicit Lagrange sum
    ``sum_j f(y_j) / prod_{i != j} (y_j - y_i)``.
    """
    pts = _as_distinct_points(points)
    return dd_from_values(pts, _values_at(f, pts))


def divided_difference_explicit(f: Callable, points) -> float:
    """Lagrange-sum form of the divided difference (independent route,
    used as an oracle against the recursion)."""
    pts = _as_distinct_points(points)
    vals = _values_at(f, pts)
    terms = []
    for j in range(len(pts)):
        denom = 1.0
        for i in range(len(pts)):
            if i != j:
                denom *= pts[j] - pts[i]
        terms.append(vals[j] / denom)
    return stable_sum(terms)


def nabla_diff(f: Callable, points) -> float:
    """(-1)^m times the order-m divided difference."""
    pts = _as_distinct_points(points)
    m = len(pts) - 1
    return (-1.0) ** m * dd_from_values(pts, _values_at(f, pts))


def dd2_from_values(ypoints, zpoints, values) -> float:
    """Iterated divided difference of a value matrix: inner along z,
    outer along y."""
    yp = np.asarray(ypoints, dtype=float)
    zp = np.asarray(zpoints, dtype=float)
    vals = np.asarray(values, dtype=float)
    if vals.shape != (len(yp), len(zp)):
        raise ContractViolation(f"value matrix shape {vals.shape} does not match grid {(len(yp), len(zp))}")
    inner = np.array([dd_from_values(zp, vals[i, :]) for i in range(len(yp))])
    return dd_from_values(yp, inner)


def divided_difference_2d(f: Callable, grid) -> float:
    """Divided difference of order (m, n): inner in z, outer in y.

    Equals the transposed evaluation order (outer in z).
    """
    grid = as_grid2d(grid)
    yp = _as_distinct_points(grid.ygrid)
    zp = _as_distinct_points(grid.zgrid)
    vals = np.asarray(f(yp[:, None], zp[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (len(yp), len(zp)))
    return dd2_from_values(yp, zp, vals)


def nabla_diff_2d(f: Callable, grid) -> float:
    """(-1)^(m+n) times the order-(m, n) divided difference."""
    grid = as_grid2d(grid)
    m = len(grid.ygrid) - 1
    n = len(grid.zgrid) - 1
    return (-1.0) ** (m + n) * divided_difference_2d(f, grid)


def finite_difference_2d(f: Callable, base, steps, order) -> float:
    """Double binomial finite difference
    ``sum_{i,j} (-1)^(m+n-i-j) C(m,i) C(n,j) f(y+ih, z+jk)``."""
    y, z = float(base[0]), float(base[1])
    h, k = float(steps[0]), float(steps[1])
    m, n = int(order[0]), int(order[1])
    if h == 0.0 or k == 0.0:
        raise ContractViolation("finite-difference steps must be nonzero")
    if m < 0 or n < 0:
        raise ContractViolation("finite-difference orders must be nonnegative")
    ys = y + h * np.arange(m + 1)
    zs = z + k * np.arange(n + 1)
    vals = np.asarray(f(ys[:, None], zs[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (m + 1, n + 1))
    terms = []
    for i in range(m + 1):
        for j in range(n + 1):
            terms.append((-1.0) ** (m + n - i - j) * math.comb(m, i) * math.comb(n, j) * vals[i, j])
    return stable_sum(terms)


def sequence_nabla(a, n: int, start: int = 0) -> float:
    """n-fold backward-style difference of a sequence, anchored at ``start``
    (zero-based): one application maps ``a[m] -> a[m] - a[m+1]``."""
    seq = np.asarray(a, dtype=float).ravel()
    if n < 0:
        raise ContractViolation("difference order must be nonnegative")
    if start < 0 or start + n + 1 > len(seq):
        raise ContractViolation(f"window [{start}, {start + n}] leaves the sequence of length {len(seq)}")
    window = seq[start : start + n + 1].copy()
    for _ in range(n):
        window = window[:-1] - window[1:]
    return float(window[0])


@dataclass(frozen=True)
class DividedDiffTable:
    """Triangular table of divided differences over a fixed grid.

    Row r holds the order-r differences over every consecutive window:
    ``rows[r][i] = [y_i, ..., y_{i+r}; f]``; row 0 is the function values.
    """

    points: Grid1D
    rows: tuple[tuple[float, ...], ...]
    order: int

    @classmethod
    def build(cls, f: Callable, points, order: int | None = None) -> "DividedDiffTable":
        grid = as_grid1d(points)
        pts = grid.points
        if order is None:
            order = len(pts) - 1
        if order < 0 or order > len(pts) - 1:
            raise ContractViolation(f"table order {order} incompatible with {len(pts)} points")
        row = _values_at(f, pts)
        rows = [tuple(float(v) for v in row)]
        for level in range(1, order + 1):
            row = (row[1:] - row[:-1]) / (pts[level:] - pts[:-level])
            rows.append(tuple(float(v) for v in row))
        return cls(points=grid, rows=tuple(rows), order=order)

    def row(self, r: int) -> tuple[float, ...]:
        return self.rows[r]


@dataclass(frozen=True)
class ClassifyReport:
    """Window-scan verdicts for sampled data at one requested order."""

    order: object
    convex: bool
    convex_worst_value: float
    convex_worst_window: tuple
    nabla_convex: bool
    nabla_worst_value: float
    nabla_worst_window: tuple

    def to_json(self) -> dict:
        return {
            "order": self.order if np.isscalar(self.order) else list(self.order),
            "convex": self.convex,
            "convex_worst_value": self.convex_worst_value,
            "convex_worst_window": list(self.convex_worst_window),
            "nabla_convex": self.nabla_convex,
            "nabla_worst_value": self.nabla_worst_value,
            "nabla_worst_window": list(self.nabla_worst_window),
        }


def _scan(values_by_window, tol):
    worst_idx = min(values_by_window, key=values_by_window.get)
    worst = values_by_window[worst_idx]
    return worst >= -tol.abs_tol, worst, worst_idx


def classify_sampled(f: Callable, grid, order, tol: TolerancePolicy | None = None) -> ClassifyReport:
    """Scan all consecutive windows of the grid and report whether the
    order-m (or order-(m, n)) divided differences are nonnegative (convex
    verdict) and whether their alternating-sign versions are nonnegative
    (nabla-convex verdict).

    On a sorted grid, nonnegativity over consecutive windows already implies
    it over arbitrary point subsets (knot-insertion argument), so only
    consecutive windows are scanned.
    """
    tol = tol or DEFAULT_TOLERANCE
    if np.isscalar(order):
        m = int(order)
        grid1 = as_grid1d(grid)
        if len(grid1) < m + 1:
            raise ContractViolation(f"grid of {len(grid1)} points cannot host order {m}")
        table = DividedDiffTable.build(f, grid1, order=m)
        deltas = {(i,): table.rows[m][i] for i in range(len(grid1) - m)}
        nablas = {idx: (-1.0) ** m * v for idx, v in deltas.items()}
        c_ok, c_val, c_idx = _scan(deltas, tol)
        n_ok, n_val, n_idx = _scan(nablas, tol)
        return ClassifyReport(m, c_ok, c_val, c_idx, n_ok, n_val, n_idx)

    m, n = int(order[0]), int(order[1])
    grid2 = as_grid2d(grid)
    rows, cols = grid2.shape
    if rows < m + 1 or cols < n + 1:
        raise ContractViolation(f"grid of shape {grid2.shape} cannot host order ({m}, {n})")
    yp = grid2.ygrid.points
    zp = grid2.zgrid.points
    vals = np.asarray(f(yp[:, None], zp[None, :]), dtype=float)
    vals = np.broadcast_to(vals, grid2.shape)
    deltas = {}
    for i in range(rows - m):
        for j in range(cols - n):
            deltas[(i, j)] = dd2_from_values(
                yp[i : i + m + 1], zp[j : j + n + 1], vals[i : i + m + 1, j : j + n + 1]
            )
    nablas = {idx: (-1.0) ** (m + n) * v for idx, v in deltas.items()}
    c_ok, c_val, c_idx = _scan(deltas, tol)
    n_ok, n_val, n_idx = _scan(nablas, tol)
    return ClassifyReport((m, n), c_ok, c_val, c_idx, n_ok, n_val, n_idx)
