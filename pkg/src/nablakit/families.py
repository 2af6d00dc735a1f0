"""Built-in function families with exact derivatives.

One-variable families: exponential decay ``exp(-v*y)/v**m``, the base-v
power family ``v**(-y)/(ln v)**m`` with its polynomial branch at v = 1, and
the classical catalog (constant, power ratio, shifted inverse power,
negative logarithms, exp(1/y)).  Two-variable families: the additive
exponential family ``zeta``, the multiplicative power family ``phi`` on the
positive quadrant, and its shifted variant ``psi`` with user offsets.  The
two-variable power families carry a squared-logarithm branch at the integer
exponents where the ordinary denominator vanishes.

Each family declares a monotonicity claim; :func:`verify_cm_order` checks
alternating-sign derivative conditions on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolation, DomainError
from .functions import FunctionSpec, MonotonicityClaim, REAL_LINE, WHOLE_PLANE
from .grids import as_grid1d, as_grid2d
from .numerics import DEFAULT_TOLERANCE, TolerancePolicy, falling_factorial

INTEGER_SNAP_TOL = 1e-6


def _require_positive(arr, what: str):
    if np.any(np.asarray(arr) <= 0.0):
        raise DomainError(f"{what} must be positive on the requested points")


# ---------------------------------------------------------------------------
# one-variable families


def family_psi_v(v: float, m: int) -> FunctionSpec:
    """Exponential family ``exp(-v*y) / v**m`` for v > 0.

    The i-th derivative is ``(-v)**i exp(-v*y) / v**m``, so every
    alternating-sign condition holds on the whole line.
    """
    if not (v > 0.0):
        raise ContractViolation(f"parameter v must be positive, got {v}")
    if m < 0:
        raise ContractViolation("order m must be nonnegative")
    scale = v ** (-m)

    def factory(i):
        coef = (-v) ** i * scale

        def ev(y):
            return coef * np.exp(-v * y)

        return ev

    return FunctionSpec(
        name="psi_v",
        arity=1,
        domain=REAL_LINE,
        value=factory(0),
        partial_factory=factory,
        max_order=10**6,
        params={"v": float(v), "m": int(m)},
        claim=MonotonicityClaim("completely-monotonic", m, True),
    )


def family_phi_v(v: float, m: int) -> FunctionSpec:
    """Base-v power family: ``v**(-y)/(ln v)**m`` for v != 1, and the
    polynomial branch ``(-1)**m y**m / m!`` exactly at v = 1.

    The branch at v = 1 is a separate definition, not a limit: for m >= 1
    the off-branch expression diverges as v -> 1.  The alternating-sign
    claim is verified only for v > 1 (and for m = 0): for 0 < v < 1 the
    sign of ``(ln v)**(i-m)`` alternates with i, and the v = 1 polynomial
    branch fails at orders i < m with m - i odd.
    """
    if not (v > 0.0):
        raise ContractViolation(f"parameter v must be positive, got {v}")
    if m < 0:
        raise ContractViolation("order m must be nonnegative")
    if v == 1.0:

        def factory(i):
            if i > m:
                return lambda y: np.zeros_like(np.asarray(y, dtype=float))
            coef = (-1.0) ** m / math.factorial(m - i)

            def ev(y):
                return coef * np.asarray(y, dtype=float) ** (m - i)

            return ev

        note = "polynomial branch at v=1; sign conditions fail at orders i<m with m-i odd"
    else:
        lv = math.log(v)

        def factory(i):
            coef = (-lv) ** i / lv**m

            def ev(y):
                return coef * np.exp(-lv * np.asarray(y, dtype=float))

            return ev

        note = "" if v > 1.0 else "for 0<v<1 the alternating-sign conditions fail at odd i-m"
    verified = (v > 1.0) or (m == 0)
    return FunctionSpec(
        name="phi_v",
        arity=1,
        domain=(0.0, math.inf),
        value=factory(0),
        partial_factory=factory,
        max_order=10**6,
        params={"v": float(v), "m": int(m)},
        claim=MonotonicityClaim("completely-monotonic", m, verified, note=note),
    )


def _power_coef_family(name, coef_of_order, domain, params, claim, shift=0.0, power_of_order=None):
    """Family of the form coef(i) * (y + shift)**power(i)."""

    def factory(i):
        coef = coef_of_order(i)
        expo = power_of_order(i)

        def ev(y):
            base = np.asarray(y, dtype=float) + shift
            _require_positive(base, f"{name} argument")
            return coef * base**expo

        return ev

    return FunctionSpec(
        name=name,
        arity=1,
        domain=domain,
        value=factory(0),
        partial_factory=factory,
        max_order=8,
        params=params,
        claim=claim,
    )


def constant_family(c: float = 1.0) -> FunctionSpec:
    def factory(i):
        if i == 0:
            return lambda y: np.full_like(np.asarray(y, dtype=float), float(c))
        return lambda y: np.zeros_like(np.asarray(y, dtype=float))

    return FunctionSpec(
        name="constant",
        arity=1,
        domain=REAL_LINE,
        value=factory(0),
        partial_factory=factory,
        max_order=10**6,
        params={"c": float(c)},
        claim=MonotonicityClaim("completely-monotonic", 8, c >= 0.0),
    )


def power_ratio_family(alpha: float) -> FunctionSpec:
    """``alpha * y**(alpha-1)`` for 0 <= alpha <= 1 on the positive axis."""
    if not (0.0 <= alpha <= 1.0):
        raise ContractViolation("alpha must lie in [0, 1]")
    return _power_coef_family(
        "power_ratio",
        lambda i: alpha * falling_factorial(alpha - 1.0, i),
        (0.0, math.inf),
        {"alpha": float(alpha)},
        MonotonicityClaim("completely-monotonic", 8, True),
        power_of_order=lambda i: alpha - 1.0 - i,
    )


def inverse_power_family(alpha: float, beta: float) -> FunctionSpec:
    """``1 / (y + alpha**2)**beta`` for alpha, beta >= 0, y > 0."""
    if alpha < 0.0 or beta < 0.0:
        raise ContractViolation("alpha and beta must be nonnegative")
    shift = alpha * alpha
    return _power_coef_family(
        "inverse_power",
        lambda i: falling_factorial(-beta, i),
        (0.0, math.inf),
        {"alpha": float(alpha), "beta": float(beta)},
        MonotonicityClaim("completely-monotonic", 8, True),
        shift=shift,
        power_of_order=lambda i: -beta - i,
    )


def neg_log_family() -> FunctionSpec:
    """``-ln y`` on the positive axis.

    The zeroth-order sign condition only holds for y <= 1, so the verified
    claim is restricted to (0, 1]; all higher derivatives alternate
    correctly on the whole positive axis.
    """

    def factory(i):
        if i == 0:
            def ev0(y):
                y = np.asarray(y, dtype=float)
                _require_positive(y, "neg_log argument")
                return -np.log(y)

            return ev0
        coef = (-1.0) ** i * math.factorial(i - 1)

        def ev(y):
            y = np.asarray(y, dtype=float)
            _require_positive(y, "neg_log argument")
            return coef * y ** (-i)

        return ev

    return FunctionSpec(
        name="neg_log",
        arity=1,
        domain=(0.0, math.inf),
        value=factory(0),
        partial_factory=factory,
        max_order=10**6,
        params={},
        claim=MonotonicityClaim(
            "completely-monotonic", 8, True, domain=(0.0, 1.0),
            note="zeroth-order sign fails for y > 1",
        ),
    )


def neg_log_ratio_family() -> FunctionSpec:
    """``-ln(1 - 1/y)`` for y > 1 (the argument of the log is positive
    only there)."""

    def factory(i):
        if i == 0:
            def ev0(y):
                y = np.asarray(y, dtype=float)
                _require_positive(y - 1.0, "neg_log_ratio argument minus one")
                return np.log(y) - np.log(y - 1.0)

            return ev0
        coef = (-1.0) ** (i - 1) * math.factorial(i - 1)

        def ev(y):
            y = np.asarray(y, dtype=float)
            _require_positive(y - 1.0, "neg_log_ratio argument minus one")
            return coef * (y ** (-i) - (y - 1.0) ** (-i))

        return ev

    return FunctionSpec(
        name="neg_log_ratio",
        arity=1,
        domain=(1.0, math.inf),
        value=factory(0),
        partial_factory=factory,
        max_order=10**6,
        params={},
        claim=MonotonicityClaim("completely-monotonic", 8, True),
    )


def _exp_reciprocal_polys(top: int):
    # f^(i)(y) = exp(1/y) * P_i(1/y) with P_{i+1}(u) = -u^2 (P_i + P_i').
    polys = [np.polynomial.Polynomial([1.0])]
    u2 = np.polynomial.Polynomial([0.0, 0.0, -1.0])
    for _ in range(top):
        p = polys[-1]
        polys.append(u2 * (p + p.deriv()))
    return polys


_EXP_RECIP_POLYS = _exp_reciprocal_polys(8)


def exp_reciprocal_family() -> FunctionSpec:
    """``exp(1/y)`` on the positive axis."""

    def factory(i):
        poly = _EXP_RECIP_POLYS[i]

        def ev(y):
            y = np.asarray(y, dtype=float)
            _require_positive(y, "exp_reciprocal argument")
            u = 1.0 / y
            return np.exp(u) * poly(u)

        return ev

    return FunctionSpec(
        name="exp_reciprocal",
        arity=1,
        domain=(0.0, math.inf),
        value=factory(0),
        partial_factory=factory,
        max_order=8,
        params={},
        claim=MonotonicityClaim("completely-monotonic", 8, True),
    )


# ---------------------------------------------------------------------------
# two-variable families


def family_zeta_q(q: float, m: int) -> FunctionSpec:
    """Additive exponential family: ``exp(q*(y+z)) / q**(2m+2)`` for q != 0
    and the polynomial branch ``(y+z)**(2m+2) / (2m+2)!`` at q = 0.

    The mixed partial of order (m+1, m+1) is ``exp(q*(y+z))``, which is
    positive for every q, so every member generates a nonnegative
    top-order difference; the full alternating-sign ladder holds only for
    q < 0 (lower mixed orders fail it for q >= 0).
    """
    if m < 0:
        raise ContractViolation("order m must be nonnegative")
    n = 2 * m + 2
    if q != 0.0:
        scale = q ** (-n)

        def factory(i, j):
            coef = q ** (i + j) * scale

            def ev(y, z):
                return coef * np.exp(q * (np.asarray(y, dtype=float) + np.asarray(z, dtype=float)))

            return ev

    else:

        def factory(i, j):
            if i + j > n:
                return lambda y, z: np.zeros(np.broadcast_shapes(np.shape(y), np.shape(z)))
            coef = 1.0 / math.factorial(n - i - j)
            expo = n - i - j

            def ev(y, z):
                return coef * (np.asarray(y, dtype=float) + np.asarray(z, dtype=float)) ** expo

            return ev

    return FunctionSpec(
        name="zeta_q",
        arity=2,
        domain=WHOLE_PLANE,
        value=factory(0, 0),
        partial_factory=factory,
        max_order=(10**6, 10**6),
        params={"q": float(q), "m": int(m)},
        claim=MonotonicityClaim(
            "top-partial-positive", (m + 1, m + 1), True,
            note="fully alternating signs verified only for q < 0",
        ),
    )


def _poly_log_coeffs(k: int, i: int) -> dict:
    """Expansion of ``d^i/du^i [u**k (ln u)**s]`` for s = 0, 1, 2 in the
    basis ``u**(k-i) * {1, ln u, (ln u)**2}`` at a nonnegative integer k."""
    if i <= k:
        fk = falling_factorial(float(k), i)
        hs = sum(1.0 / (k - r) for r in range(i))
        h2 = sum(1.0 / (k - r) ** 2 for r in range(i))
        return {
            0: (fk, 0.0, 0.0),
            1: (fk * hs, fk, 0.0),
            2: (fk * (hs * hs - h2), 2.0 * fk * hs, fk),
        }
    g = math.factorial(k) * (-1.0) ** (i - k - 1) * math.factorial(i - k - 1)
    gp = g * sum(1.0 / (k - r) for r in range(i) if r != k)
    return {
        0: (0.0, 0.0, 0.0),
        1: (g, 0.0, 0.0),
        2: (2.0 * gp, 2.0 * g, 0.0),
    }


def _shifted_power_spec(q: float, order: int, k1: float, k2: float, name: str, params: dict) -> FunctionSpec:
    """Core of the two-variable power families: value and partials of
    ``u**q v**q / denom`` with u = y + k1, v = z - k2.

    Exponents within ``INTEGER_SNAP_TOL`` of an integer in {0, ..., order}
    are snapped onto the squared-logarithm branch: the squared denominator
    underflows catastrophically in that band.
    """
    M = int(order)
    if M < 0:
        raise ContractViolation("order must be nonnegative")
    nearest = min(range(M + 1), key=lambda k: abs(q - k))
    if abs(q - nearest) < INTEGER_SNAP_TOL:
        q = float(nearest)

    def uv(y, z):
        u = np.asarray(y, dtype=float) + k1
        v = np.asarray(z, dtype=float) - k2
        _require_positive(u, f"{name} first shifted argument")
        _require_positive(v, f"{name} second shifted argument")
        return u, v

    if q == int(q) and 0 <= q <= M:
        k = int(q)
        denom = 2.0 * (math.factorial(k) * math.factorial(M - k)) ** 2

        def factory(i, j):
            ci = _poly_log_coeffs(k, i)
            cj = _poly_log_coeffs(k, j)

            def ev(y, z):
                u, v = uv(y, z)
                lu = np.log(u)
                lv = np.log(v)
                pu = u ** float(k - i)
                pv = v ** float(k - j)
                a_i = ci[0][0] * pu
                b_i = (ci[1][0] + ci[1][1] * lu) * pu
                c_i = (ci[2][0] + ci[2][1] * lu + ci[2][2] * lu**2) * pu
                a_j = cj[0][0] * pv
                b_j = (cj[1][0] + cj[1][1] * lv) * pv
                c_j = (cj[2][0] + cj[2][1] * lv + cj[2][2] * lv**2) * pv
                return (c_i * a_j + 2.0 * b_i * b_j + a_i * c_j) / denom

            return ev

        branch = "integer"
    else:
        # Denominator as an explicit product: near-integer exponents would
        # lose precision through a gamma-ratio route.
        dprod = 1.0
        for r in range(M + 1):
            dprod *= q - r
        denom = dprod * dprod

        def factory(i, j):
            coef = falling_factorial(q, i) * falling_factorial(q, j) / denom

            def ev(y, z):
                u, v = uv(y, z)
                return coef * u ** (q - i) * v ** (q - j)

            return ev

        branch = "regular"

    domain = ((-k1, math.inf), (k2, math.inf))
    return FunctionSpec(
        name=name,
        arity=2,
        domain=domain,
        value=factory(0, 0),
        partial_factory=factory,
        max_order=(10**6, 10**6),
        params={**params, "q": float(q), "branch": branch},
        claim=MonotonicityClaim(
            "top-partial-positive", (M + 1, M + 1), True,
            note="fully alternating signs verified only for q < 0",
        ),
    )


def family_psi_q(q: float, M: int, k1: float, k2: float) -> FunctionSpec:
    """Shifted power family ``(y+k1)**q (z-k2)**q / [q(q-1)...(q-M)]**2``
    with a squared-logarithm branch at integer q in {0, ..., M}.

    Defined where y + k1 > 0 and z - k2 > 0; the top mixed partial on the
    regular branch is ``[(y+k1)(z-k2)]**(q-M-1)``.
    """
    return _shifted_power_spec(q, M, float(k1), float(k2), "psi_q", {"M": int(M), "k1": float(k1), "k2": float(k2)})


def family_phi_q_2d(q: float, m: int) -> FunctionSpec:
    """Power family ``(yz)**q / [q(q-1)...(q-m)]**2`` on the positive
    quadrant, with the squared-logarithm branch at integer q in
    {0, ..., m}; the top mixed partial on the regular branch is
    ``(yz)**(q-m-1)``."""
    return _shifted_power_spec(q, m, 0.0, 0.0, "phi_q_2d", {"m": int(m)})


# ---------------------------------------------------------------------------
# monotonicity verification


@dataclass(frozen=True)
class CmReport:
    """Outcome of an alternating-sign derivative scan."""

    ok: bool
    order: object
    worst_value: float
    worst_order: object
    worst_node: object

    @property
    def verdict(self) -> str:
        return "verified" if self.ok else "refuted"


def verify_cm_order(f: FunctionSpec, grid, order, tol: TolerancePolicy | None = None) -> CmReport:
    """Check ``(-1)**(i+j) * partial_(i,j)(node) >= -abs_tol`` for every
    grid node and every order up to the requested one (both axes for
    two-variable specs)."""
    tol = tol or DEFAULT_TOLERANCE
    worst = (math.inf, None, None)
    if f.arity == 1:
        m = int(order)
        pts = as_grid1d(grid).points
        for i in range(m + 1):
            vals = (-1.0) ** i * np.asarray(f.partial(i)(pts), dtype=float)
            vals = np.broadcast_to(vals, pts.shape)
            idx = int(np.argmin(vals))
            if vals[idx] < worst[0]:
                worst = (float(vals[idx]), i, float(pts[idx]))
    else:
        m, n = int(order[0]), int(order[1])
        grid2 = as_grid2d(grid)
        yp = grid2.ygrid.points
        zp = grid2.zgrid.points
        for i in range(m + 1):
            for j in range(n + 1):
                vals = (-1.0) ** (i + j) * np.asarray(f.partial(i, j)(yp[:, None], zp[None, :]), dtype=float)
                vals = np.broadcast_to(vals, grid2.shape)
                flat = int(np.argmin(vals))
                iy, iz = np.unravel_index(flat, grid2.shape)
                if vals[iy, iz] < worst[0]:
                    worst = (float(vals[iy, iz]), (i, j), (float(yp[iy]), float(zp[iz])))
    return CmReport(
        ok=worst[0] >= -tol.abs_tol,
        order=order,
        worst_value=worst[0],
        worst_order=worst[1],
        worst_node=worst[2],
    )


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    arity: int
    summary: str
    parameters: tuple[str, ...]
    builder: Callable

    def build(self, **params) -> FunctionSpec:
        unknown = set(params) - set(self.parameters)
        if unknown:
            raise ContractViolation(f"unknown parameter(s) {sorted(unknown)} for family '{self.name}'")
        return self.builder(**params)


class FamilyCatalog:
    """Named family constructors with parameter schemas."""

    def __init__(self, entries):
        self._entries = {e.name: e for e in entries}

    def __contains__(self, name) -> bool:
        return name in self._entries

    def __iter__(self):
        return iter(self._entries.values())

    def names(self):
        return sorted(self._entries)

    def entry(self, name: str) -> CatalogEntry:
        if name not in self._entries:
            raise ContractViolation(f"unknown family '{name}'; known: {', '.join(self.names())}")
        return self._entries[name]

    def build(self, name: str, **params) -> FunctionSpec:
        return self.entry(name).build(**params)


def family_catalog_1d() -> FamilyCatalog:
    """The classical one-variable members: constant, power ratio, shifted
    inverse power, negative logarithms, and exp(1/y)."""
    return FamilyCatalog(
        [
            CatalogEntry("constant", 1, "nonnegative constant", ("c",), constant_family),
            CatalogEntry("power_ratio", 1, "alpha * y**(alpha-1), alpha in [0,1], y > 0", ("alpha",), power_ratio_family),
            CatalogEntry("inverse_power", 1, "1/(y + alpha**2)**beta, y > 0", ("alpha", "beta"), inverse_power_family),
            CatalogEntry("neg_log", 1, "-ln y, y > 0 (sign claim verified on (0, 1])", (), neg_log_family),
            CatalogEntry("neg_log_ratio", 1, "-ln(1 - 1/y), y > 1", (), neg_log_ratio_family),
            CatalogEntry("exp_reciprocal", 1, "exp(1/y), y > 0", (), exp_reciprocal_family),
        ]
    )


def family_catalog() -> FamilyCatalog:
    """All built-in families (one- and two-variable)."""
    entries = list(family_catalog_1d())
    entries += [
        CatalogEntry("psi_v", 1, "exp(-v*y)/v**m, v > 0", ("v", "m"), family_psi_v),
        CatalogEntry("phi_v", 1, "v**(-y)/(ln v)**m with polynomial branch at v=1", ("v", "m"), family_phi_v),
        CatalogEntry("zeta_q", 2, "exp(q*(y+z))/q**(2m+2) with polynomial branch at q=0", ("q", "m"), family_zeta_q),
        CatalogEntry("phi_q_2d", 2, "(yz)**q over squared exponent products, y,z > 0", ("q", "m"), family_phi_q_2d),
        CatalogEntry("psi_q", 2, "(y+k1)**q (z-k2)**q over squared exponent products", ("q", "M", "k1", "k2"), family_psi_q),
    ]
    return FamilyCatalog(entries)
