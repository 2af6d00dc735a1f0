"""Exact expansions of weighted sums and integrals.

Every operation here evaluates both sides of an algebraic identity that
rewrites a weighted sum (or integral) as boundary blocks in low-order
differences (or derivatives at the upper corner) plus a remainder block in
the top-order differences, and reports the per-block contributions together
with the residual.  The discrete identities are exact, so their residual
measures rounding only; the integral identities are exact up to quadrature.

Index conventions follow the classical 1-based window notation: grids are
padded so that ``y[1] .. y[M]`` are the sample points, which lets the block
coefficients be transcribed literally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ContractViolation, EvaluationError
from .differences import DividedDiffTable, dd2_from_values, sequence_nabla
from .functions import FunctionSpec
from .grids import as_grid1d, as_grid2d
from .numerics import (
    DEFAULT_SCHEME,
    DEFAULT_SCHEME_2D,
    QuadratureScheme,
    falling_factorial,
    panel_nodes,
    stable_sum,
    unit_panel_nodes,
)


@dataclass(frozen=True)
class WeightSpec:
    """A weight: a vector p_i, a matrix p_ij, or an integrable kernel."""

    kind: str
    data: object

    def __post_init__(self):
        if self.kind not in ("vector", "matrix", "kernel"):
            raise ContractViolation(f"unknown weight kind '{self.kind}'")
        if self.kind in ("vector", "matrix"):
            arr = np.asarray(self.data, dtype=float)
            want = 1 if self.kind == "vector" else 2
            if arr.ndim != want:
                raise ContractViolation(f"{self.kind} weight must be {want}-dimensional, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ContractViolation("weight entries must be finite")
            arr.setflags(write=False)
            object.__setattr__(self, "data", arr)

    @classmethod
    def vector(cls, values) -> "WeightSpec":
        return cls("vector", values)

    @classmethod
    def matrix(cls, values) -> "WeightSpec":
        return cls("matrix", values)

    @classmethod
    def kernel(cls, fn) -> "WeightSpec":
        return cls("kernel", fn)


def as_weight_vector(p, length: int) -> np.ndarray:
    if isinstance(p, WeightSpec):
        if p.kind != "vector":
            raise ContractViolation(f"expected a vector weight, got kind '{p.kind}'")
        arr = p.data
    else:
        arr = p
    arr = np.asarray(arr, dtype=float).ravel()
    if len(arr) != length:
        raise ContractViolation(f"weight vector has length {len(arr)}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("weight entries must be finite")
    return arr


def as_weight_matrix(p, shape: tuple[int, int]) -> np.ndarray:
    if isinstance(p, WeightSpec):
        if p.kind != "matrix":
            raise ContractViolation(f"expected a matrix weight, got kind '{p.kind}'")
        arr = p.data
    else:
        arr = np.asarray(p, dtype=float)
    if arr.shape != shape:
        raise ContractViolation(f"weight matrix has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("weight entries must be finite")
    return np.asarray(arr, dtype=float)


def kernel_callable(P, arity: int):
    """Normalize a kernel argument (WeightSpec, FunctionSpec, or callable)
    to a vectorized callable."""
    if isinstance(P, WeightSpec):
        if P.kind != "kernel":
            raise ContractViolation(f"expected a kernel weight, got kind '{P.kind}'")
        P = P.data
    if isinstance(P, FunctionSpec):
        if P.arity != arity:
            raise ContractViolation(f"kernel has arity {P.arity}, expected {arity}")
        return P.value
    if callable(P):
        return P
    raise ContractViolation("kernel must be a FunctionSpec, a callable, or a kernel WeightSpec")


def _checked(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"non-finite {what} encountered")
    return arr


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of an identity plus per-block contributions."""

    lhs: float
    rhs: float
    blocks: tuple[tuple[str, float], ...]
    abs_residual: float
    rel_residual: float

    @classmethod
    def from_blocks(cls, lhs: float, blocks) -> "IdentityReport":
        blocks = tuple((str(label), float(value)) for label, value in blocks)
        rhs = stable_sum(value for _, value in blocks)
        abs_res = abs(lhs - rhs)
        rel_res = abs_res / max(1.0, abs(lhs), abs(rhs))
        return cls(lhs=float(lhs), rhs=rhs, blocks=blocks, abs_residual=abs_res, rel_residual=rel_res)

    def block(self, label: str) -> float:
        for name, value in self.blocks:
            if name == label:
                return value
        raise KeyError(label)

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "blocks": [[label, value] for label, value in self.blocks],
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
        }


def _pad1(values) -> np.ndarray:
    """1-based view: index 0 is a NaN sentinel."""
    return np.concatenate(([math.nan], np.asarray(values, dtype=float)))


def _fpow(pad: np.ndarray, top: int, j: int, count: int) -> float:
    """Descending factorial power ``prod_{r<count} (x[top-r] - x[j])`` over
    a 1-based padded array."""
    out = 1.0
    for r in range(count):
        out *= pad[top - r] - pad[j]
    return out


def _check_orders(m: int, M: int, axis: str = "") -> None:
    if not (1 <= m <= M):
        raise ContractViolation(f"order {axis + ' ' if axis else ''}must satisfy 1 <= m <= {M}, got {m}")


# ---------------------------------------------------------------------------
# discrete identities


def seq_identity(p, a, m: int) -> IdentityReport:
    """Expansion of ``sum_i p_i a_i`` into boundary differences anchored at
    the tail of the sequence plus a remainder in the m-fold differences."""
    a_arr = np.asarray(a, dtype=float).ravel()
    M = len(a_arr)
    _check_orders(m, M)
    p_arr = as_weight_vector(p, M)
    p1 = _pad1(p_arr)

    lhs = stable_sum(p_arr[i] * a_arr[i] for i in range(M))

    boundary_terms = []
    for k in range(m):
        nab = sequence_nabla(a_arr, k, start=M - k - 1)
        coef = stable_sum(falling_factorial(float(M - i), k) * p1[i] for i in range(1, M - k + 1))
        boundary_terms.append(nab * coef / math.factorial(k))
    boundary = stable_sum(boundary_terms)

    remainder_terms = []
    for k in range(1, M - m + 1):
        inner = stable_sum(falling_factorial(float(k - i + m - 1), m - 1) * p1[i] for i in range(1, k + 1))
        remainder_terms.append(inner * sequence_nabla(a_arr, m, start=k - 1))
    remainder = stable_sum(remainder_terms) / math.factorial(m - 1)

    return IdentityReport.from_blocks(lhs, [("boundary", boundary), ("remainder", remainder)])


def func_identity(p, f, ygrid, m: int) -> IdentityReport:
    """Expansion of ``sum_i p_i f(y_i)`` over a sorted grid: boundary
    differences anchored at the top of the grid plus a remainder in the
    m-th order alternating differences."""
    grid = as_grid1d(ygrid)
    pts = grid.points
    M = len(pts)
    _check_orders(m, M)
    p_arr = as_weight_vector(p, M)
    p1 = _pad1(p_arr)
    ypad = _pad1(pts)

    table = DividedDiffTable.build(f, grid, order=m)
    values = np.asarray(table.rows[0])
    lhs = stable_sum(p_arr[i] * values[i] for i in range(M))

    def nabla_at(order: int, start_1b: int) -> float:
        # (-1)^order * [y_start, ..., y_{start+order}; f], 1-based start
        return (-1.0) ** order * table.rows[order][start_1b - 1]

    boundary_terms = []
    for k in range(m):
        coef = stable_sum(p1[j] * _fpow(ypad, M, j, k) for j in range(1, M - k + 1))
        boundary_terms.append(coef * nabla_at(k, M - k))
    boundary = stable_sum(boundary_terms)

    remainder_terms = []
    for k in range(1, M - m + 1):
        coef = stable_sum(p1[j] * _fpow(ypad, k + m - 1, j, m - 1) for j in range(1, k + 1))
        remainder_terms.append(coef * nabla_at(m, k) * (ypad[k + m] - ypad[k]))
    remainder = stable_sum(remainder_terms)

    return IdentityReport.from_blocks(lhs, [("boundary", boundary), ("remainder", remainder)])


def _window_nabla_2d(yp, zp, values, ylo, yhi, zlo, zhi) -> float:
    """Alternating iterated difference over the 1-based inclusive windows
    ``y[ylo..yhi] x z[zlo..zhi]``."""
    order = (yhi - ylo) + (zhi - zlo)
    dd = dd2_from_values(
        yp[ylo - 1 : yhi], zp[zlo - 1 : zhi], values[ylo - 1 : yhi, zlo - 1 : zhi]
    )
    return (-1.0) ** order * dd


def double_sum_identity(p, f, grid, order: tuple[int, int]) -> IdentityReport:
    """Expansion of ``sum_i sum_j p_ij f(y_i, z_j)`` into four blocks:
    boundary-by-boundary, remainder-in-y by boundary-in-z, boundary-in-y by
    remainder-in-z, and remainder-by-remainder."""
    grid2 = as_grid2d(grid)
    yp = grid2.ygrid.points
    zp = grid2.zgrid.points
    M, N = grid2.shape
    m, n = int(order[0]), int(order[1])
    _check_orders(m, M, "m")
    _check_orders(n, N, "n")
    pmat = as_weight_matrix(p, (M, N))

    values = _checked(np.broadcast_to(np.asarray(f(yp[:, None], zp[None, :]), dtype=float), (M, N)), "function value")
    lhs = stable_sum(pmat[i, j] * values[i, j] for i in range(M) for j in range(N))

    p1 = np.full((M + 1, N + 1), math.nan)
    p1[1:, 1:] = pmat
    ypad = _pad1(yp)
    zpad = _pad1(zp)

    def nabla(ylo, yhi, zlo, zhi):
        return _window_nabla_2d(yp, zp, values, ylo, yhi, zlo, zhi)

    b1_terms = []
    for k in range(n):
        for t in range(m):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, N, r, k) * _fpow(ypad, M, s, t)
                for s in range(1, M - t + 1)
                for r in range(1, N - k + 1)
            )
            b1_terms.append(coef * nabla(M - t, M, N - k, N))
    b1 = stable_sum(b1_terms)

    b2_terms = []
    for k in range(n):
        for t in range(1, M - m + 1):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, N, r, k) * _fpow(ypad, t + m - 1, s, m - 1)
                for s in range(1, t + 1)
                for r in range(1, N - k + 1)
            )
            b2_terms.append(coef * nabla(t, t + m, N - k, N) * (ypad[t + m] - ypad[t]))
    b2 = stable_sum(b2_terms)

    b3_terms = []
    for k in range(1, N - n + 1):
        for t in range(m):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, k + n - 1, r, n - 1) * _fpow(ypad, M, s, t)
                for s in range(1, M - t + 1)
                for r in range(1, k + 1)
            )
            b3_terms.append(coef * nabla(M - t, M, k, k + n) * (zpad[k + n] - zpad[k]))
    b3 = stable_sum(b3_terms)

    b4_terms = []
    for k in range(1, N - n + 1):
        for t in range(1, M - m + 1):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, k + n - 1, r, n - 1) * _fpow(ypad, t + m - 1, s, m - 1)
                for s in range(1, t + 1)
                for r in range(1, k + 1)
            )
            b4_terms.append(
                coef * nabla(t, t + m, k, k + n) * (ypad[t + m] - ypad[t]) * (zpad[k + n] - zpad[k])
            )
    b4 = stable_sum(b4_terms)

    return IdentityReport.from_blocks(
        lhs,
        [
            ("boundary_y*boundary_z", b1),
            ("remainder_y*boundary_z", b2),
            ("boundary_y*remainder_z", b3),
            ("remainder_y*remainder_z", b4),
        ],
    )


def separable_double_sum_identity(p, f, g, grid, order: tuple[int, int]) -> IdentityReport:
    """Separable variant of :func:`double_sum_identity` for
    ``f(y_i) * g(z_j)``: the same four coefficient blocks, with the mixed
    windows replaced by products of one-variable alternating differences."""
    grid2 = as_grid2d(grid)
    yp = grid2.ygrid.points
    zp = grid2.zgrid.points
    M, N = grid2.shape
    m, n = int(order[0]), int(order[1])
    _check_orders(m, M, "m")
    _check_orders(n, N, "n")
    pmat = as_weight_matrix(p, (M, N))

    tf = DividedDiffTable.build(f, grid2.ygrid, order=m)
    tg = DividedDiffTable.build(g, grid2.zgrid, order=n)
    fvals = np.asarray(tf.rows[0])
    gvals = np.asarray(tg.rows[0])
    lhs = stable_sum(pmat[i, j] * fvals[i] * gvals[j] for i in range(M) for j in range(N))

    p1 = np.full((M + 1, N + 1), math.nan)
    p1[1:, 1:] = pmat
    ypad = _pad1(yp)
    zpad = _pad1(zp)

    def nab_f(order_, start_1b):
        return (-1.0) ** order_ * tf.rows[order_][start_1b - 1]

    def nab_g(order_, start_1b):
        return (-1.0) ** order_ * tg.rows[order_][start_1b - 1]

    b1_terms = []
    for k in range(n):
        for t in range(m):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, N, r, k) * _fpow(ypad, M, s, t)
                for s in range(1, M - t + 1)
                for r in range(1, N - k + 1)
            )
            b1_terms.append(coef * nab_f(t, M - t) * nab_g(k, N - k))
    b1 = stable_sum(b1_terms)

    b2_terms = []
    for k in range(n):
        for t in range(1, M - m + 1):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, N, r, k) * _fpow(ypad, t + m - 1, s, m - 1)
                for s in range(1, t + 1)
                for r in range(1, N - k + 1)
            )
            b2_terms.append(coef * nab_g(k, N - k) * nab_f(m, t) * (ypad[t + m] - ypad[t]))
    b2 = stable_sum(b2_terms)

    b3_terms = []
    for k in range(1, N - n + 1):
        for t in range(m):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, k + n - 1, r, n - 1) * _fpow(ypad, M, s, t)
                for s in range(1, M - t + 1)
                for r in range(1, k + 1)
            )
            b3_terms.append(coef * nab_g(n, k) * (zpad[k + n] - zpad[k]) * nab_f(t, M - t))
    b3 = stable_sum(b3_terms)

    b4_terms = []
    for k in range(1, N - n + 1):
        for t in range(1, M - m + 1):
            coef = stable_sum(
                p1[s, r] * _fpow(zpad, k + n - 1, r, n - 1) * _fpow(ypad, t + m - 1, s, m - 1)
                for s in range(1, t + 1)
                for r in range(1, k + 1)
            )
            b4_terms.append(
                coef * nab_g(n, k) * (zpad[k + n] - zpad[k]) * nab_f(m, t) * (ypad[t + m] - ypad[t])
            )
    b4 = stable_sum(b4_terms)

    return IdentityReport.from_blocks(
        lhs,
        [
            ("boundary_y*boundary_z", b1),
            ("remainder_y*boundary_z", b2),
            ("boundary_y*remainder_z", b3),
            ("remainder_y*remainder_z", b4),
        ],
    )


# ---------------------------------------------------------------------------
# integral identities


def _require_partials_1d(f: FunctionSpec, top: int) -> None:
    if not isinstance(f, FunctionSpec) or f.arity != 1:
        raise ContractViolation("f must be a one-variable FunctionSpec")
    if not f.has_partial(top):
        raise CapabilityError(f"{f.name} must expose derivatives up to order {top}")


def _require_partials_2d(f: FunctionSpec, top: tuple[int, int]) -> None:
    if not isinstance(f, FunctionSpec) or f.arity != 2:
        raise ContractViolation("f must be a two-variable FunctionSpec")
    if not f.has_partial(top):
        raise CapabilityError(f"{f.name} must expose partials up to order {top}")


def integral_identity_1d(P, f: FunctionSpec, interval, m: int, scheme: QuadratureScheme | None = None) -> IdentityReport:
    """Expansion of ``int_a^b P f`` into derivative terms at the right
    endpoint plus a remainder against the truncated-power moment of P.

    The running inner integrals are evaluated only over [a, s] (the domain
    is split exactly at s), so the truncated factor never makes the
    integrand discontinuous.
    """
    a, b = float(interval[0]), float(interval[1])
    if not (a < b):
        raise ContractViolation(f"interval needs a < b, got [{a}, {b}]")
    if m < 0:
        raise ContractViolation("order m must be nonnegative")
    scheme = scheme or DEFAULT_SCHEME
    _require_partials_1d(f, m + 1)
    Pfn = kernel_callable(P, 1)

    nodes, weights = panel_nodes(a, b, scheme)
    Pv = _checked(np.broadcast_to(np.asarray(Pfn(nodes), dtype=float), nodes.shape), "kernel value")
    fv = _checked(np.broadcast_to(np.asarray(f.value(nodes), dtype=float), nodes.shape), "function value")
    lhs = float(weights @ (Pv * fv))

    boundary_terms = []
    for i in range(m + 1):
        moment = float(weights @ (Pv * (b - nodes) ** i)) / math.factorial(i)
        boundary_terms.append(moment * (-1.0) ** i * f.partial_at(b, i))
    boundary = stable_sum(boundary_terms)

    u, wu = unit_panel_nodes(scheme)
    inner_nodes = a + np.outer(nodes - a, u)
    Pin = _checked(
        np.broadcast_to(np.asarray(Pfn(inner_nodes), dtype=float), inner_nodes.shape), "kernel value"
    )
    trunc = ((nodes[:, None] - inner_nodes) ** m * Pin) @ wu * (nodes - a) / math.factorial(m)
    ftop = _checked(
        np.broadcast_to(np.asarray(f.partial(m + 1)(nodes), dtype=float), nodes.shape), "derivative value"
    )
    remainder = float(weights @ (trunc * (-1.0) ** (m + 1) * ftop))

    return IdentityReport.from_blocks(lhs, [("boundary", boundary), ("remainder", remainder)])


def _rect(rect):
    (a, b), (c, d) = rect
    a, b, c, d = float(a), float(b), float(c), float(d)
    if not (a < b and c < d):
        raise ContractViolation(f"rectangle must be nondegenerate, got {rect}")
    return a, b, c, d


def _eval_kernel_grid(Pfn, ynodes, znodes):
    vals = np.asarray(Pfn(ynodes[:, None], znodes[None, :]), dtype=float)
    return _checked(np.broadcast_to(vals, (len(ynodes), len(znodes))), "kernel value")


def double_integral_identity(
    P, f: FunctionSpec, rect, order: tuple[int, int], scheme: QuadratureScheme | None = None
) -> IdentityReport:
    """Expansion of the rectangle integral of P*f anchored at the upper
    corner (b, d): an alternating-sign corner block, two edge blocks
    carrying the (M+1, j) and (i, N+1) partials, and an interior block in
    the (M+1, N+1) partial against the doubly truncated kernel moment."""
    a, b, c, d = _rect(rect)
    M, N = int(order[0]), int(order[1])
    if M < 0 or N < 0:
        raise ContractViolation("orders must be nonnegative")
    scheme = scheme or DEFAULT_SCHEME_2D
    _require_partials_2d(f, (M + 1, N + 1))
    Pfn = kernel_callable(P, 2)

    Y, Wy = panel_nodes(a, b, scheme)
    Z, Wz = panel_nodes(c, d, scheme)
    u, wu = unit_panel_nodes(scheme)

    Pfull = _eval_kernel_grid(Pfn, Y, Z)
    fvals = _checked(np.broadcast_to(np.asarray(f.value(Y[:, None], Z[None, :]), dtype=float), Pfull.shape), "function value")
    lhs = float(Wy @ (Pfull * fvals) @ Wz)

    powy = [(b - Y) ** i / math.factorial(i) for i in range(M + 1)]
    powz = [(d - Z) ** j / math.factorial(j) for j in range(N + 1)]
    corner_terms = []
    for i in range(M + 1):
        for j in range(N + 1):
            cij = float((Wy * powy[i]) @ Pfull @ (Wz * powz[j]))
            corner_terms.append(cij * (-1.0) ** (i + j) * f.partial_at((b, d), (i, j)))
    corner = stable_sum(corner_terms)

    # edge in y: integrals over [a, s] x [c, d] against the (M+1, j) partials
    czj = [Wz * powz[j] for j in range(N + 1)]
    ftop_y = [
        _checked(
            np.broadcast_to(np.asarray(f.partial(M + 1, j)(Y, np.asarray(d)), dtype=float), Y.shape),
            "derivative value",
        )
        for j in range(N + 1)
    ]
    edge_y_terms = []
    for idx, s in enumerate(Y):
        ys = a + (s - a) * u
        wys = (s - a) * wu * (s - ys) ** M / math.factorial(M)
        Pblk = _eval_kernel_grid(Pfn, ys, Z)
        left = wys @ Pblk
        for j in range(N + 1):
            ej = float(left @ czj[j])
            edge_y_terms.append(Wy[idx] * ej * (-1.0) ** (M + j + 1) * ftop_y[j][idx])
    edge_y = stable_sum(edge_y_terms)

    # edge in z: integrals over [a, b] x [c, t] against the (i, N+1) partials
    cyi = [Wy * powy[i] for i in range(M + 1)]
    ftop_z = [
        _checked(
            np.broadcast_to(np.asarray(f.partial(i, N + 1)(np.asarray(b), Z), dtype=float), Z.shape),
            "derivative value",
        )
        for i in range(M + 1)
    ]
    edge_z_terms = []
    for idx, t in enumerate(Z):
        zs = c + (t - c) * u
        wzs = (t - c) * wu * (t - zs) ** N / math.factorial(N)
        Pblk = _eval_kernel_grid(Pfn, Y, zs)
        right = Pblk @ wzs
        for i in range(M + 1):
            fi = float(cyi[i] @ right)
            edge_z_terms.append(Wz[idx] * fi * (-1.0) ** (i + N + 1) * ftop_z[i][idx])
    edge_z = stable_sum(edge_z_terms)

    # interior: doubly truncated kernel moment against the top partial
    ZT = c + np.outer(Z - c, u)  # inner z-nodes for every outer t
    WTfac = (Z - c)[:, None] * wu[None, :] * (Z[:, None] - ZT) ** N / math.factorial(N)
    ftop = _checked(
        np.broadcast_to(np.asarray(f.partial(M + 1, N + 1)(Y[:, None], Z[None, :]), dtype=float), (len(Y), len(Z))),
        "derivative value",
    )
    sign = (-1.0) ** (M + N)
    interior_terms = []
    for idx, s in enumerate(Y):
        ys = a + (s - a) * u
        wys = (s - a) * wu * (s - ys) ** M / math.factorial(M)
        Pblk = np.asarray(Pfn(ys[:, None], ZT.ravel()[None, :]), dtype=float)
        Pblk = _checked(np.broadcast_to(Pblk, (len(ys), ZT.size)), "kernel value")
        G = (wys @ Pblk).reshape(ZT.shape)
        K = np.einsum("tj,tj->t", G, WTfac)
        interior_terms.append(Wy[idx] * float(Wz @ (K * sign * ftop[idx, :])))
    interior = stable_sum(interior_terms)

    return IdentityReport.from_blocks(
        lhs, [("corner", corner), ("edge_y", edge_y), ("edge_z", edge_z), ("interior", interior)]
    )


def corner_double_integral_identity(
    P, f: FunctionSpec, rect, order: tuple[int, int], scheme: QuadratureScheme | None = None
) -> IdentityReport:
    """Companion expansion anchored at the lower corner (a, c): the same
    four-block shape with no alternating signs, and the truncated kernel
    moments taken over [y, b] and [z, d]."""
    a, b, c, d = _rect(rect)
    M, N = int(order[0]), int(order[1])
    if M < 0 or N < 0:
        raise ContractViolation("orders must be nonnegative")
    scheme = scheme or DEFAULT_SCHEME_2D
    _require_partials_2d(f, (M + 1, N + 1))
    Pfn = kernel_callable(P, 2)

    Y, Wy = panel_nodes(a, b, scheme)
    Z, Wz = panel_nodes(c, d, scheme)
    u, wu = unit_panel_nodes(scheme)

    Pfull = _eval_kernel_grid(Pfn, Y, Z)
    fvals = _checked(np.broadcast_to(np.asarray(f.value(Y[:, None], Z[None, :]), dtype=float), Pfull.shape), "function value")
    lhs = float(Wy @ (Pfull * fvals) @ Wz)

    powy = [(Y - a) ** i / math.factorial(i) for i in range(M + 1)]
    powz = [(Z - c) ** j / math.factorial(j) for j in range(N + 1)]
    corner_terms = []
    for i in range(M + 1):
        for j in range(N + 1):
            cij = float((Wy * powy[i]) @ Pfull @ (Wz * powz[j]))
            corner_terms.append(cij * f.partial_at((a, c), (i, j)))
    corner = stable_sum(corner_terms)

    czj = [Wz * powz[j] for j in range(N + 1)]
    ftop_y = [
        _checked(
            np.broadcast_to(np.asarray(f.partial(M + 1, j)(Y, np.asarray(c)), dtype=float), Y.shape),
            "derivative value",
        )
        for j in range(N + 1)
    ]
    edge_y_terms = []
    for idx, y in enumerate(Y):
        ss = y + (b - y) * u
        wss = (b - y) * wu * (ss - y) ** M / math.factorial(M)
        Pblk = _eval_kernel_grid(Pfn, ss, Z)
        left = wss @ Pblk
        for j in range(N + 1):
            ej = float(left @ czj[j])
            edge_y_terms.append(Wy[idx] * ej * ftop_y[j][idx])
    edge_y = stable_sum(edge_y_terms)

    cyi = [Wy * powy[i] for i in range(M + 1)]
    ftop_z = [
        _checked(
            np.broadcast_to(np.asarray(f.partial(i, N + 1)(np.asarray(a), Z), dtype=float), Z.shape),
            "derivative value",
        )
        for i in range(M + 1)
    ]
    edge_z_terms = []
    for idx, z in enumerate(Z):
        ts = z + (d - z) * u
        wts = (d - z) * wu * (ts - z) ** N / math.factorial(N)
        Pblk = _eval_kernel_grid(Pfn, Y, ts)
        right = Pblk @ wts
        for i in range(M + 1):
            fi = float(cyi[i] @ right)
            edge_z_terms.append(Wz[idx] * fi * ftop_z[i][idx])
    edge_z = stable_sum(edge_z_terms)

    ZT = Z[:, None] + np.outer(d - Z, u)  # inner t-nodes over [z, d] for every outer z
    WTfac = (d - Z)[:, None] * wu[None, :] * (ZT - Z[:, None]) ** N / math.factorial(N)
    ftop = _checked(
        np.broadcast_to(np.asarray(f.partial(M + 1, N + 1)(Y[:, None], Z[None, :]), dtype=float), (len(Y), len(Z))),
        "derivative value",
    )
    interior_terms = []
    for idx, y in enumerate(Y):
        ss = y + (b - y) * u
        wss = (b - y) * wu * (ss - y) ** M / math.factorial(M)
        Pblk = np.asarray(Pfn(ss[:, None], ZT.ravel()[None, :]), dtype=float)
        Pblk = _checked(np.broadcast_to(Pblk, (len(ss), ZT.size)), "kernel value")
        G = (wss @ Pblk).reshape(ZT.shape)
        K = np.einsum("tj,tj->t", G, WTfac)
        interior_terms.append(Wy[idx] * float(Wz @ (K * ftop[idx, :])))
    interior = stable_sum(interior_terms)

    return IdentityReport.from_blocks(
        lhs, [("corner", corner), ("edge_y", edge_y), ("edge_z", edge_z), ("interior", interior)]
    )
