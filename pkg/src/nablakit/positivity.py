"""Positivity certification of weights and the linear functional.

A weight (vector, matrix, or kernel) makes every weighted sum or integral
of a nabla-convex function of matching order nonnegative exactly when its
boundary-block coefficients vanish and its remainder-block coefficients are
nonnegative.  This module checks those conditions (finite sums exactly,
continuum inequalities on Chebyshev probe lattices), evaluates the
rectangle functional, constructs certified kernels from Legendre
polynomials, and stress-tests certified weights against sampled function
families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .functions import FunctionSpec, tensor_product
from .grids import as_grid2d
from .identities import _fpow, _pad1, as_weight_matrix, kernel_callable
from .numerics import (
    DEFAULT_SCHEME,
    DEFAULT_SCHEME_2D,
    DEFAULT_TOLERANCE,
    QuadratureScheme,
    TolerancePolicy,
    chebyshev_probes,
    panel_nodes,
    stable_sum,
    unit_panel_nodes,
)

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConditionResult:
    """A single certified condition: an equality residual or the minimum of
    an inequality family."""

    label: str
    kind: str  # "equality" | "inequality"
    value: float
    tol: float
    passed: bool
    refute_level: bool

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "value": self.value,
            "tol": self.tol,
            "pass": self.passed,
        }


def _assess(kind: str, value: float, tol: float) -> tuple[bool, bool]:
    if kind == "equality":
        return abs(value) <= tol, abs(value) > 10.0 * tol
    return value >= -tol, value < -10.0 * tol


@dataclass(frozen=True)
class Certificate:
    """Per-condition residuals and an overall verdict.

    ``certified`` requires every equality residual within tolerance and
    every inequality minimum above minus the tolerance; a violation beyond
    ten times the tolerance refutes; anything between is inconclusive.
    Inequalities over a continuum are only probed on a finite lattice, so
    ``certified`` always means certified at the recorded probe resolution.
    """

    conditions: tuple[ConditionResult, ...]
    verdict: str
    probes: tuple[int, ...]
    tolerance: float
    notes: tuple[str, ...] = ()
    diagnostics: tuple[tuple[str, float], ...] = ()

    @classmethod
    def build(cls, raw_conditions, tol: TolerancePolicy, probes=(), notes=(), diagnostics=()) -> "Certificate":
        conditions = []
        for label, kind, value, scale in raw_conditions:
            scaled = tol.abs_tol * max(1.0, float(scale))
            ok, refute = _assess(kind, float(value), scaled)
            conditions.append(ConditionResult(label, kind, float(value), scaled, ok, refute))
        if any(c.refute_level for c in conditions):
            verdict = REFUTED
        elif all(c.passed for c in conditions):
            verdict = CERTIFIED
        else:
            verdict = INCONCLUSIVE
        return cls(
            conditions=tuple(conditions),
            verdict=verdict,
            probes=tuple(int(p) for p in probes),
            tolerance=tol.abs_tol,
            notes=tuple(notes),
            diagnostics=tuple(diagnostics),
        )

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    @property
    def worst(self) -> ConditionResult:
        def margin(c: ConditionResult) -> float:
            return (c.tol - abs(c.value)) if c.kind == "equality" else (c.value + c.tol)

        return min(self.conditions, key=margin)

    def to_json(self) -> dict:
        return {
            "conditions": [c.to_json() for c in self.conditions],
            "verdict": self.verdict,
            "tolerances": {"abs_tol": self.tolerance},
            "probes": list(self.probes),
            "notes": list(self.notes),
            "diagnostics": [[k, v] for k, v in self.diagnostics],
        }


_MOMENT_ZERO_NOTE = (
    "moment conditions include order zero: a constant of either sign has "
    "vanishing top-order differences, so its weighted value must be exactly zero"
)


# ---------------------------------------------------------------------------
# one-variable integral weights


def moment_1d(P, interval, i: int, scheme: QuadratureScheme | None = None) -> float:
    """Weighted moment ``int_a^b P(y) (b-y)**i / i! dy``."""
    a, b = float(interval[0]), float(interval[1])
    scheme = scheme or DEFAULT_SCHEME
    Pfn = kernel_callable(P, 1)
    nodes, w = panel_nodes(a, b, scheme)
    Pv = np.broadcast_to(np.asarray(Pfn(nodes), dtype=float), nodes.shape)
    return float(w @ (Pv * (b - nodes) ** i)) / math.factorial(i)


def truncated_moment_1d(P, interval, m: int, s: float, scheme: QuadratureScheme | None = None) -> float:
    """Truncated moment ``int_a^s P(y) (s-y)**m / m! dy`` (zero at s = a)."""
    a, b = float(interval[0]), float(interval[1])
    if not (a <= s <= b):
        raise ContractViolation(f"probe s={s} outside [{a}, {b}]")
    if s == a:
        return 0.0
    scheme = scheme or DEFAULT_SCHEME
    Pfn = kernel_callable(P, 1)
    u, wu = unit_panel_nodes(scheme)
    ys = a + (s - a) * u
    Pv = np.broadcast_to(np.asarray(Pfn(ys), dtype=float), ys.shape)
    return float(((s - ys) ** m * Pv) @ wu) * (s - a) / math.factorial(m)


def certify_integral_1d(
    P,
    interval,
    m: int,
    probe_count: int = 21,
    scheme: QuadratureScheme | None = None,
    tol: TolerancePolicy | None = None,
) -> Certificate:
    """Certify a one-variable kernel: moments against ``(b-y)**i`` must
    vanish for i = 0..m and the truncated moment must stay nonnegative
    along a Chebyshev probe grid of s values (endpoints included)."""
    if probe_count < 2:
        raise ContractViolation("probe count must be at least 2")
    a, b = float(interval[0]), float(interval[1])
    if not (a < b):
        raise ContractViolation(f"interval needs a < b, got [{a}, {b}]")
    if m < 0:
        raise ContractViolation("order m must be nonnegative")
    scheme = scheme or DEFAULT_SCHEME
    tol = tol or DEFAULT_TOLERANCE
    Pfn = kernel_callable(P, 1)

    nodes, w = panel_nodes(a, b, scheme)
    Pv = np.broadcast_to(np.asarray(Pfn(nodes), dtype=float), nodes.shape)
    absPv = np.abs(Pv)

    raw = []
    for i in range(m + 1):
        powvec = (b - nodes) ** i / math.factorial(i)
        value = float(w @ (Pv * powvec))
        scale = float(w @ (absPv * powvec))
        raw.append((f"moment[i={i}]", "equality", value, scale))

    u, wu = unit_panel_nodes(scheme)
    probes = chebyshev_probes(a, b, probe_count)
    worst_val = math.inf
    worst_s = probes[0]
    worst_scale = 1.0
    for s in probes:
        if s == a:
            value, scale = 0.0, 0.0
        else:
            ys = a + (s - a) * u
            Ps = np.broadcast_to(np.asarray(Pfn(ys), dtype=float), ys.shape)
            powvec = (s - ys) ** m / math.factorial(m)
            value = float((Ps * powvec) @ wu) * (s - a)
            scale = float((np.abs(Ps) * powvec) @ wu) * (s - a)
        if value < worst_val:
            worst_val, worst_s, worst_scale = value, float(s), scale
    raw.append((f"truncated-moment[s={worst_s:.6g}]", "inequality", worst_val, worst_scale))

    return Certificate.build(raw, tol, probes=(probe_count,), notes=(_MOMENT_ZERO_NOTE,))


# ---------------------------------------------------------------------------
# discrete matrix weights


def certify_double_sum(p, grid, order: tuple[int, int], tol: TolerancePolicy | None = None) -> Certificate:
    """Certify a weight matrix over a sorted rectangle of points: the three
    boundary-block coefficient families must vanish and the core
    remainder-block coefficients must be nonnegative.  All conditions are
    finite sums and are evaluated exactly."""
    grid2 = as_grid2d(grid)
    M, N = grid2.shape
    m, n = int(order[0]), int(order[1])
    if not (1 <= m <= M and 1 <= n <= N):
        raise ContractViolation(f"orders ({m}, {n}) incompatible with grid shape {(M, N)}")
    pmat = as_weight_matrix(p, (M, N))
    tol = tol or DEFAULT_TOLERANCE

    p1 = np.full((M + 1, N + 1), math.nan)
    p1[1:, 1:] = pmat
    ypad = _pad1(grid2.ygrid.points)
    zpad = _pad1(grid2.zgrid.points)

    def sum_and_scale(terms):
        vals = list(terms)
        return stable_sum(vals), stable_sum(abs(v) for v in vals)

    raw = []
    for k in range(n):
        for t in range(m):
            value, scale = sum_and_scale(
                p1[s, r] * _fpow(zpad, N, r, k) * _fpow(ypad, M, s, t)
                for s in range(1, M - t + 1)
                for r in range(1, N - k + 1)
            )
            raw.append((f"boundary-coef[k={k},t={t}]", "equality", value, scale))
    for k in range(n):
        for t in range(1, M - m + 1):
            value, scale = sum_and_scale(
                p1[s, r] * _fpow(zpad, N, r, k) * _fpow(ypad, t + m - 1, s, m - 1)
                for s in range(1, t + 1)
                for r in range(1, N - k + 1)
            )
            raw.append((f"y-remainder-coef[k={k},t={t}]", "equality", value, scale))
    for k in range(1, N - n + 1):
        for t in range(m):
            value, scale = sum_and_scale(
                p1[s, r] * _fpow(zpad, k + n - 1, r, n - 1) * _fpow(ypad, M, s, t)
                for s in range(1, M - t + 1)
                for r in range(1, k + 1)
            )
            raw.append((f"z-remainder-coef[k={k},t={t}]", "equality", value, scale))
    for k in range(1, N - n + 1):
        for t in range(1, M - m + 1):
            value, scale = sum_and_scale(
                p1[s, r] * _fpow(ypad, t + m - 1, s, m - 1) * _fpow(zpad, k + n - 1, r, n - 1)
                for s in range(1, t + 1)
                for r in range(1, k + 1)
            )
            raw.append((f"core-coef[k={k},t={t}]", "inequality", value, scale))

    return Certificate.build(raw, tol, probes=(M, N))


# ---------------------------------------------------------------------------
# two-variable kernels and the functional


@dataclass(frozen=True)
class FunctionalSpec:
    """The rectangle functional ``f -> integral of P * f`` together with
    the order at which its positivity is meant to hold."""

    kernel: object
    rect: tuple
    order: tuple[int, int]
    scheme: QuadratureScheme = field(default_factory=lambda: DEFAULT_SCHEME_2D)

    def __post_init__(self):
        (a, b), (c, d) = self.rect
        if not (float(a) < float(b) and float(c) < float(d)):
            raise ContractViolation(f"rectangle must be nondegenerate, got {self.rect}")
        M, N = self.order
        if int(M) < 0 or int(N) < 0:
            raise ContractViolation("functional orders must be nonnegative")
        object.__setattr__(self, "rect", ((float(a), float(b)), (float(c), float(d))))
        object.__setattr__(self, "order", (int(M), int(N)))


def evaluate_functional(spec: FunctionalSpec, f) -> float:
    """Quadrature value of the functional applied to ``f``."""
    Pfn = kernel_callable(spec.kernel, 2)
    ffn = f.value if isinstance(f, FunctionSpec) else f
    (a, b), (c, d) = spec.rect
    Y, Wy = panel_nodes(a, b, spec.scheme)
    Z, Wz = panel_nodes(c, d, spec.scheme)
    Pv = np.broadcast_to(np.asarray(Pfn(Y[:, None], Z[None, :]), dtype=float), (len(Y), len(Z)))
    fv = np.broadcast_to(np.asarray(ffn(Y[:, None], Z[None, :]), dtype=float), (len(Y), len(Z)))
    return float(Wy @ (Pv * fv) @ Wz)


def truncated_moment_2d(spec: FunctionalSpec, s: float, t: float) -> float:
    """Doubly truncated kernel moment
    ``int_a^s int_c^t P(y,z) (s-y)**M/M! (t-z)**N/N! dz dy``."""
    (a, b), (c, d) = spec.rect
    M, N = spec.order
    if not (a <= s <= b and c <= t <= d):
        raise ContractViolation(f"probe ({s}, {t}) outside the rectangle")
    if s == a or t == c:
        return 0.0
    Pfn = kernel_callable(spec.kernel, 2)
    u, wu = unit_panel_nodes(spec.scheme)
    ys = a + (s - a) * u
    zt = c + (t - c) * u
    Pv = np.broadcast_to(np.asarray(Pfn(ys[:, None], zt[None, :]), dtype=float), (len(ys), len(zt)))
    wy = (s - a) * wu * (s - ys) ** M / math.factorial(M)
    wz = (t - c) * wu * (t - zt) ** N / math.factorial(N)
    return float(wy @ Pv @ wz)


def certify_double_integral(
    spec: FunctionalSpec,
    probe_counts: tuple[int, int] = (9, 9),
    tol: TolerancePolicy | None = None,
) -> Certificate:
    """Certify a rectangle kernel at order (M, N): all corner moments must
    vanish, both single-axis truncated-moment families must vanish along
    their probe grids, and the doubly truncated moment must be nonnegative
    on the probe lattice."""
    ps, pt = int(probe_counts[0]), int(probe_counts[1])
    if ps < 2 or pt < 2:
        raise ContractViolation("probe counts must be at least 2 per axis")
    tol = tol or DEFAULT_TOLERANCE
    (a, b), (c, d) = spec.rect
    M, N = spec.order
    Pfn = kernel_callable(spec.kernel, 2)
    scheme = spec.scheme

    Y, Wy = panel_nodes(a, b, scheme)
    Z, Wz = panel_nodes(c, d, scheme)
    u, wu = unit_panel_nodes(scheme)
    Pfull = np.broadcast_to(np.asarray(Pfn(Y[:, None], Z[None, :]), dtype=float), (len(Y), len(Z)))
    absP = np.abs(Pfull)

    raw = []
    for i in range(M + 1):
        cy = Wy * (b - Y) ** i / math.factorial(i)
        for j in range(N + 1):
            cz = Wz * (d - Z) ** j / math.factorial(j)
            value = float(cy @ Pfull @ cz)
            scale = float(cy @ absP @ cz)
            raw.append((f"moment[i={i},j={j}]", "equality", value, scale))

    sprobes = chebyshev_probes(a, b, ps)
    tprobes = chebyshev_probes(c, d, pt)

    czj = [Wz * (d - Z) ** j / math.factorial(j) for j in range(N + 1)]
    worst_y = [(0.0, float(sprobes[0]), 0.0)] * (N + 1)
    for s in sprobes:
        if s == a:
            continue
        ys = a + (s - a) * u
        wys = (s - a) * wu * (s - ys) ** M / math.factorial(M)
        Pblk = np.broadcast_to(np.asarray(Pfn(ys[:, None], Z[None, :]), dtype=float), (len(ys), len(Z)))
        left = wys @ Pblk
        left_abs = wys @ np.abs(Pblk)
        for j in range(N + 1):
            value = float(left @ czj[j])
            scale = float(left_abs @ np.abs(czj[j]))
            if abs(value) > abs(worst_y[j][0]):
                worst_y[j] = (value, float(s), scale)
    for j, (value, s, scale) in enumerate(worst_y):
        raw.append((f"truncated-moment-y[j={j},s={s:.6g}]", "equality", value, scale))

    cyi = [Wy * (b - Y) ** i / math.factorial(i) for i in range(M + 1)]
    worst_z = [(0.0, float(tprobes[0]), 0.0)] * (M + 1)
    for t in tprobes:
        if t == c:
            continue
        zt = c + (t - c) * u
        wzt = (t - c) * wu * (t - zt) ** N / math.factorial(N)
        Pblk = np.broadcast_to(np.asarray(Pfn(Y[:, None], zt[None, :]), dtype=float), (len(Y), len(zt)))
        right = Pblk @ wzt
        right_abs = np.abs(Pblk) @ wzt
        for i in range(M + 1):
            value = float(cyi[i] @ right)
            scale = float(np.abs(cyi[i]) @ right_abs)
            if abs(value) > abs(worst_z[i][0]):
                worst_z[i] = (value, float(t), scale)
    for i, (value, t, scale) in enumerate(worst_z):
        raw.append((f"truncated-moment-z[i={i},t={t:.6g}]", "equality", value, scale))

    ZT = c + np.outer(tprobes - c, u)
    WT = (tprobes - c)[:, None] * wu[None, :] * (tprobes[:, None] - ZT) ** N / math.factorial(N)
    worst_2d = (math.inf, float(sprobes[0]), float(tprobes[0]), 1.0)
    for s in sprobes:
        if s == a:
            corner_vals = np.zeros(len(tprobes))
            corner_scales = np.zeros(len(tprobes))
        else:
            ys = a + (s - a) * u
            wys = (s - a) * wu * (s - ys) ** M / math.factorial(M)
            Pblk = np.asarray(Pfn(ys[:, None], ZT.ravel()[None, :]), dtype=float)
            Pblk = np.broadcast_to(Pblk, (len(ys), ZT.size))
            G = (wys @ Pblk).reshape(ZT.shape)
            Gabs = (wys @ np.abs(Pblk)).reshape(ZT.shape)
            corner_vals = np.einsum("tj,tj->t", G, WT)
            corner_scales = np.einsum("tj,tj->t", Gabs, WT)
        for ti, t in enumerate(tprobes):
            value = float(corner_vals[ti]) if t != c else 0.0
            if value < worst_2d[0]:
                worst_2d = (value, float(s), float(t), float(corner_scales[ti]))
    raw.append(
        (
            f"truncated-moment-2d[s={worst_2d[1]:.6g},t={worst_2d[2]:.6g}]",
            "inequality",
            worst_2d[0],
            worst_2d[3],
        )
    )

    return Certificate.build(raw, tol, probes=(ps, pt), notes=(_MOMENT_ZERO_NOTE,))


# ---------------------------------------------------------------------------
# constructive certified weights


def rodrigues_weight(M: int, interval=(-1.0, 1.0)) -> FunctionSpec:
    """Signed Legendre kernel of degree M+1 on the given interval.

    On [-1, 1] it is ``(-1)**(M+1) L_{M+1}(y)``: orthogonality kills the
    moments against ``(b-y)**i`` for i <= M, and its truncated moment has
    the closed form ``(1-s**2)**(M+1) / (2**(M+1) (M+1)!) >= 0``.  Other
    intervals are handled by the affine map onto [-1, 1].
    """
    if M < 0 or M > 10:
        raise ContractViolation("order must lie in 0..10")
    a, b = float(interval[0]), float(interval[1])
    if not (a < b):
        raise ContractViolation(f"interval needs a < b, got [{a}, {b}]")
    sign = (-1.0) ** (M + 1)
    series = np.polynomial.legendre.Legendre.basis(M + 1)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)

    def factory(i):
        base = series.deriv(i) if i else series
        coef = sign / half**i

        def ev(y):
            return coef * base((np.asarray(y, dtype=float) - mid) / half)

        return ev

    return FunctionSpec(
        name="rodrigues",
        arity=1,
        domain=(a, b),
        value=factory(0),
        partial_factory=factory,
        max_order=10**6,
        params={"M": int(M), "interval": (a, b)},
    )


def rodrigues_truncated_moment(M: int, s: float, interval=(-1.0, 1.0)) -> float:
    """Closed form of the truncated moment of :func:`rodrigues_weight`."""
    a, b = float(interval[0]), float(interval[1])
    half = 0.5 * (b - a)
    us = (s - 0.5 * (a + b)) / half
    return half ** (M + 1) * (1.0 - us * us) ** (M + 1) / (2.0 ** (M + 1) * math.factorial(M + 1))


def rodrigues_functional(
    M: int,
    N: int | None = None,
    rect=((-1.0, 1.0), (-1.0, 1.0)),
    scheme: QuadratureScheme | None = None,
) -> FunctionalSpec:
    """Tensor product of two signed Legendre kernels as a FunctionalSpec."""
    if N is None:
        N = M
    kernel = tensor_product(
        rodrigues_weight(M, rect[0]), rodrigues_weight(N, rect[1]), name="rodrigues2d"
    )
    return FunctionalSpec(kernel=kernel, rect=rect, order=(M, N), scheme=scheme or DEFAULT_SCHEME_2D)


def require_certified(certificate: Certificate, what: str = "weight") -> None:
    if certificate.verdict != CERTIFIED:
        raise ContractViolation(f"{what} is not certified (verdict: {certificate.verdict})")


# ---------------------------------------------------------------------------
# empirical stress testing


@dataclass(frozen=True)
class StressReport:
    """Minimum weighted value over a sample of functions."""

    names: tuple[str, ...]
    values: tuple[float, ...]
    min_value: float
    argmin: str

    def to_json(self) -> dict:
        return {
            "values": dict(zip(self.names, self.values)),
            "min_value": self.min_value,
            "argmin": self.argmin,
        }


def positivity_stress(target, samples, grid=None) -> StressReport:
    """Evaluate the functional (or the discrete double sum) on each sampled
    function and report the minimum.

    ``target`` is a FunctionalSpec, or a weight matrix together with the
    ``grid`` it lives on.  For a certified target the minimum must stay
    above minus the working tolerance.
    """
    names = []
    values = []
    if isinstance(target, FunctionalSpec):
        for idx, f in enumerate(samples):
            names.append(getattr(f, "name", f"sample{idx}") + f"#{idx}")
            values.append(evaluate_functional(target, f))
    else:
        if grid is None:
            raise ContractViolation("a weight matrix needs the grid it lives on")
        grid2 = as_grid2d(grid)
        pmat = as_weight_matrix(target, grid2.shape)
        yp = grid2.ygrid.points
        zp = grid2.zgrid.points
        for idx, f in enumerate(samples):
            ffn = f.value if isinstance(f, FunctionSpec) else f
            vals = np.broadcast_to(np.asarray(ffn(yp[:, None], zp[None, :]), dtype=float), grid2.shape)
            names.append(getattr(f, "name", f"sample{idx}") + f"#{idx}")
            values.append(float(np.sum(pmat * vals)))
    imin = int(np.argmin(values))
    return StressReport(
        names=tuple(names),
        values=tuple(float(v) for v in values),
        min_value=float(values[imin]),
        argmin=names[imin],
    )
