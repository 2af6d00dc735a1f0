"""Shared numerical kernels.

Factorial powers, composite Gauss-Legendre quadrature, symmetric PSD
testing, central-difference stencils for mixed partials, and the global
tolerance policy.  Everything here is a pure function of its inputs and is
safe to call concurrently; summations run in a fixed traversal order so
results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ContractViolation, DomainError, EvaluationError


@dataclass(frozen=True)
class TolerancePolicy:
    """Global tolerance knobs.

    ``psd_eig_floor`` is interpreted relative to the matrix scale: a
    symmetric matrix counts as PSD when its smallest eigenvalue is at least
    ``psd_eig_floor * max(1, max|entry|)``.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    psd_eig_floor: float = -1e-10

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ContractViolation(f"{name} must be finite and positive, got {value}")
        if not math.isfinite(self.psd_eig_floor):
            raise ContractViolation("psd_eig_floor must be finite")


DEFAULT_TOLERANCE = TolerancePolicy()


@dataclass(frozen=True)
class QuadratureScheme:
    """Composite Gauss-Legendre rule: ``order`` nodes on each of ``panels``
    equal-width panels.  Exact (to rounding) for polynomials of degree
    <= 2*order - 1 per panel."""

    order: int = 16
    panels: int = 8

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise ContractViolation(f"quadrature order must be an integer >= 2, got {self.order}")
        if int(self.panels) != self.panels or self.panels < 1:
            raise ContractViolation(f"panel count must be a positive integer, got {self.panels}")


DEFAULT_SCHEME = QuadratureScheme()
# Iterated integrals over rectangles cost O(nodes^4); a slimmer default
# keeps them fast while staying far below the target residuals.
DEFAULT_SCHEME_2D = QuadratureScheme(order=12, panels=2)


def stable_sum(values) -> float:
    """Exactly rounded sum in a fixed traversal order (reproducible)."""
    return math.fsum(float(v) for v in values)


def falling_factorial(x: float, k: int) -> float:
    """x * (x-1) * ... * (x-k+1); equals 1 for k = 0."""
    if k < 0:
        raise ContractViolation("falling factorial needs k >= 0")
    out = 1.0
    for r in range(k):
        out *= x - r
    return out


def factorial_power(points, k: int, i: int, exponent: int) -> float:
    """Descending product ``prod_{r<exponent} (points[k-r] - points[i])``.

    Indices are zero-based.  Returns exactly 1.0 when ``exponent`` is 0.
    Raises IndexError when the descending window would leave the grid.
    """
    pts = np.asarray(getattr(points, "points", points), dtype=float)
    n = len(pts)
    if exponent < 0:
        raise ContractViolation("exponent must be a nonnegative integer")
    if not (0 <= k < n and 0 <= i < n):
        raise IndexError(f"indices k={k}, i={i} out of range for {n} points")
    if exponent > 0 and k - exponent + 1 < 0:
        raise IndexError(f"window of length {exponent} descending from k={k} leaves the grid")
    out = 1.0
    for r in range(exponent):
        out *= pts[k - r] - pts[i]
    return out


@lru_cache(maxsize=64)
def _leggauss(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=16)
def unit_panel_nodes(scheme: QuadratureScheme):
    """Composite nodes/weights on the unit interval (0, 1)."""
    base_x, base_w = _leggauss(scheme.order)
    width = 1.0 / scheme.panels
    left = np.arange(scheme.panels) * width
    nodes = (left[:, None] + (base_x[None, :] + 1.0) * (width / 2.0)).ravel()
    weights = np.tile(base_w * (width / 2.0), scheme.panels)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_nodes(a: float, b: float, scheme: QuadratureScheme):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    u, w = unit_panel_nodes(scheme)
    return a + (b - a) * u, (b - a) * w


def _eval_checked(f: Callable, nodes: np.ndarray) -> np.ndarray:
    values = np.asarray(f(nodes), dtype=float)
    values = np.broadcast_to(values, np.broadcast_shapes(values.shape, nodes.shape)).astype(float)
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        node = nodes[tuple(bad)] if nodes.ndim else nodes
        raise EvaluationError(f"non-finite function value at node {node!r}", node=node)
    return values


def integrate_1d(f: Callable, a: float, b: float, scheme: QuadratureScheme | None = None) -> float:
    """Composite Gauss-Legendre integral of ``f`` over [a, b]."""
    if not (a < b):
        raise ContractViolation(f"integration interval needs a < b, got [{a}, {b}]")
    scheme = scheme or DEFAULT_SCHEME
    nodes, weights = panel_nodes(a, b, scheme)
    values = _eval_checked(f, nodes)
    return float(weights @ values)


def integrate_2d(f: Callable, rect, scheme: QuadratureScheme | None = None) -> float:
    """Tensor-product composite Gauss-Legendre integral over a rectangle.

    ``rect`` is ((a, b), (c, d)); ``f`` must broadcast over numpy arrays.
    """
    (a, b), (c, d) = rect
    if not (a < b and c < d):
        raise ContractViolation(f"rectangle must be nondegenerate, got {rect}")
    scheme = scheme or DEFAULT_SCHEME_2D
    ynodes, yweights = panel_nodes(a, b, scheme)
    znodes, zweights = panel_nodes(c, d, scheme)
    ymesh = ynodes[:, None]
    zmesh = znodes[None, :]
    values = np.asarray(f(ymesh, zmesh), dtype=float)
    values = np.broadcast_to(values, (len(ynodes), len(znodes)))
    if not np.all(np.isfinite(values)):
        iy, iz = np.argwhere(~np.isfinite(values))[0]
        node = (float(ynodes[iy]), float(znodes[iz]))
        raise EvaluationError(f"non-finite function value at node {node!r}", node=node)
    return float(yweights @ values @ zweights)


@dataclass(frozen=True)
class PsdReport:
    """Outcome of a positive-semidefiniteness test."""

    is_psd: bool
    min_eigenvalue: float
    eig_floor: float
    eigenvalues: tuple[float, ...]
    minor_signs: tuple[int, ...]
    minors: tuple[float, ...]

    @property
    def verdict(self) -> str:
        return "psd" if self.is_psd else "not-psd"


def psd_check(matrix, tol: TolerancePolicy | None = None) -> PsdReport:
    """Test a symmetric matrix for positive semidefiniteness.

    The verdict comes from the full symmetric eigendecomposition; the signs
    of the leading principal minors are reported as a secondary diagnostic
    only, since determinants of near-singular matrices carry no reliable
    sign information.
    """
    tol = tol or DEFAULT_TOLERANCE
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ContractViolation(f"matrix must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat))) if mat.size else 0.0)
    if float(np.max(np.abs(mat - mat.T))) > tol.abs_tol * scale:
        raise ContractViolation("matrix is not symmetric within tolerance")
    sym = 0.5 * (mat + mat.T)
    eigenvalues = np.linalg.eigvalsh(sym)
    floor = tol.psd_eig_floor * scale
    minors = []
    signs = []
    for k in range(1, sym.shape[0] + 1):
        det = float(np.linalg.det(sym[:k, :k]))
        minors.append(det)
        band = tol.abs_tol * scale**k
        signs.append(0 if abs(det) <= band else (1 if det > 0 else -1))
    return PsdReport(
        is_psd=bool(eigenvalues[0] >= floor),
        min_eigenvalue=float(eigenvalues[0]),
        eig_floor=float(floor),
        eigenvalues=tuple(float(v) for v in eigenvalues),
        minor_signs=tuple(signs),
        minors=tuple(minors),
    )


MAX_STENCIL_ORDER = 6


def default_fd_step(total_order: int, width: float = 2.0) -> float:
    """Step size balancing truncation against rounding for a
    Richardson-extrapolated central stencil of the given total order."""
    eps = float(np.finfo(float).eps)
    scale = 1.0 if not math.isfinite(width) else max(1.0, 0.5 * width)
    return max(1e-4, 2.0 * eps ** (1.0 / (total_order + 4))) * scale


def _central_stencil(k: int):
    # Binomial stencil on symmetric (half-integer for odd k) offsets.
    offsets = np.array([k / 2.0 - r for r in range(k + 1)])
    coeffs = np.array([(-1.0) ** r * math.comb(k, r) for r in range(k + 1)])
    return offsets, coeffs


def _stencil_value_2d(f, y, z, i, j, hy, hz):
    oy, cy = _central_stencil(i)
    oz, cz = _central_stencil(j)
    vals = np.asarray(f(y + oy[:, None] * hy, z + oz[None, :] * hz), dtype=float)
    vals = np.broadcast_to(vals, (len(oy), len(oz)))
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("non-finite value inside difference stencil", node=(y, z))
    return float(cy @ vals @ cz) / (hy**i * hz**j if i or j else 1.0)


def _stencil_value_1d(f, y, i, h):
    oy, cy = _central_stencil(i)
    vals = np.asarray(f(y + oy * h), dtype=float)
    vals = np.broadcast_to(vals, (len(oy),))
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("non-finite value inside difference stencil", node=y)
    return float(cy @ vals) / (h**i if i else 1.0)


def _axis_interval(domain, axis):
    if domain is None:
        return (-math.inf, math.inf)
    if axis is None:
        return tuple(domain)
    return tuple(domain[axis])


def _check_margin(x, halfwidth, interval, axis_name):
    lo, hi = interval
    if x - halfwidth < lo or x + halfwidth > hi:
        raise DomainError(
            f"difference stencil of halfwidth {halfwidth:g} around {axis_name}={x:g} "
            f"leaves the domain [{lo:g}, {hi:g}]"
        )


def numeric_partial(f: Callable, point, order, step=None, domain=None):
    """Central-difference estimate of a (mixed) partial derivative.

    ``order`` is an int for one-variable functions or a pair ``(i, j)`` for
    two variables; the total order is capped at ``MAX_STENCIL_ORDER``.  One
    Richardson extrapolation step is applied, so the stencil never extends
    farther than ``(order/2) * step`` per axis.
    """
    if domain is None:
        domain = getattr(f, "domain", None)
    if isinstance(order, (tuple, list)):
        i, j = int(order[0]), int(order[1])
        if i < 0 or j < 0:
            raise ContractViolation("derivative orders must be nonnegative")
        if i + j > MAX_STENCIL_ORDER:
            raise ContractViolation(f"total order {i + j} exceeds the stencil accuracy cap {MAX_STENCIL_ORDER}")
        y, z = float(point[0]), float(point[1])
        total = i + j
        if step is None:
            wy = _axis_interval(domain, 0)
            wz = _axis_interval(domain, 1)
            step = default_fd_step(max(total, 1), min(wy[1] - wy[0], wz[1] - wz[0]))
        hy = hz = float(step)
        if i:
            _check_margin(y, (i / 2.0) * hy, _axis_interval(domain, 0), "y")
        if j:
            _check_margin(z, (j / 2.0) * hz, _axis_interval(domain, 1), "z")
        if total == 0:
            return _stencil_value_2d(f, y, z, 0, 0, 1.0, 1.0)
        coarse = _stencil_value_2d(f, y, z, i, j, hy, hz)
        fine = _stencil_value_2d(f, y, z, i, j, hy / 2.0, hz / 2.0)
        return (4.0 * fine - coarse) / 3.0

    i = int(order)
    if i < 0:
        raise ContractViolation("derivative order must be nonnegative")
    if i > MAX_STENCIL_ORDER:
        raise ContractViolation(f"order {i} exceeds the stencil accuracy cap {MAX_STENCIL_ORDER}")
    y = float(point)
    if domain is None:
        interval = (-math.inf, math.inf)
    elif np.isscalar(domain[0]):
        interval = (float(domain[0]), float(domain[1]))
    else:
        interval = (float(domain[0][0]), float(domain[0][1]))
    if step is None:
        step = default_fd_step(max(i, 1), interval[1] - interval[0])
    h = float(step)
    if i:
        _check_margin(y, (i / 2.0) * h, interval, "y")
    if i == 0:
        return _stencil_value_1d(f, y, 0, 1.0)
    coarse = _stencil_value_1d(f, y, i, h)
    fine = _stencil_value_1d(f, y, i, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def chebyshev_probes(a: float, b: float, count: int) -> np.ndarray:
    """Chebyshev-Lobatto probe points on [a, b], endpoints included,
    sorted ascending."""
    if count < 2:
        raise ContractViolation("probe count must be at least 2")
    k = np.arange(count)
    u = np.cos(np.pi * k / (count - 1))
    return np.sort(0.5 * (a + b) + 0.5 * (b - a) * u)
