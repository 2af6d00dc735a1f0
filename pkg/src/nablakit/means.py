"""Mean-value diagnostics and exponential-convexity tests.

Built on the rectangle functional: localization of the functional ratio
inside the range of the top mixed partial, generalized Cauchy ratios, the
two-parameter power means, Gram-matrix PSD tests over the shifted power
family, the three-point log-convexity residual, and direct quadratic-form
tests of exponential convexity.

All hypotheses here assume the functional's kernel has been certified; the
operations do not re-certify on every call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError, NotApplicableError, NumericalError
from .families import family_psi_q
from .functions import FunctionSpec, WHOLE_PLANE
from .numerics import (
    DEFAULT_TOLERANCE,
    PsdReport,
    TolerancePolicy,
    falling_factorial,
    psd_check,
    stable_sum,
)
from .positivity import Certificate, FunctionalSpec, evaluate_functional


def g0(M: int, N: int) -> FunctionSpec:
    """Reference monomial ``(-1)**(M+N) y**(M+1) z**(N+1) / ((M+1)!(N+1)!)``.

    Its (M+1, N+1) mixed partial is the constant ``(-1)**(M+N)``, so it is
    nabla-convex of order (M+1, N+1) and serves as the normalizer in the
    mean value localization.
    """
    if M < 0 or N < 0:
        raise ContractViolation("orders must be nonnegative")
    sign = (-1.0) ** (M + N)

    def factory(i, j):
        if i > M + 1 or j > N + 1:
            return lambda y, z: np.zeros(np.broadcast_shapes(np.shape(y), np.shape(z)))
        cy = 1.0 / math.factorial(M + 1 - i)
        cz = 1.0 / math.factorial(N + 1 - j)

        def ev(y, z):
            y = np.asarray(y, dtype=float)
            z = np.asarray(z, dtype=float)
            return sign * cy * cz * y ** (M + 1 - i) * z ** (N + 1 - j)

        return ev

    return FunctionSpec(
        name="g0",
        arity=2,
        domain=WHOLE_PLANE,
        value=factory(0, 0),
        partial_factory=factory,
        max_order=(10**6, 10**6),
        params={"M": int(M), "N": int(N)},
    )


@dataclass(frozen=True)
class MeanParams:
    """A certified functional plus the shift parameters of the power family.

    Defaults place the shifted arguments in the positive quadrant:
    ``k1 = 1 + |a|`` and ``k2 = c - 1`` for the rectangle [a,b] x [c,d].
    """

    functional: FunctionalSpec
    k1: float | None = None
    k2: float | None = None
    certificate: Certificate | None = None

    def __post_init__(self):
        M, N = self.functional.order
        if M != N:
            raise ContractViolation("the power-family diagnostics need a square order (M == N)")
        if self.certificate is not None and not self.certificate.certified:
            raise ContractViolation(f"functional is not certified (verdict: {self.certificate.verdict})")

    @property
    def order(self) -> int:
        return self.functional.order[0]

    @property
    def shifts(self) -> tuple[float, float]:
        (a, _), (c, _) = self.functional.rect
        k1 = 1.0 + abs(a) if self.k1 is None else float(self.k1)
        k2 = c - 1.0 if self.k2 is None else float(self.k2)
        return k1, k2


@dataclass(frozen=True)
class GramSpec:
    """Exponent list for the Gram matrix of functional values over the
    shifted power family."""

    exponents: tuple[float, ...]
    params: MeanParams

    def __post_init__(self):
        exps = tuple(float(q) for q in self.exponents)
        if len(exps) < 1:
            raise ContractViolation("need at least one exponent")
        if not all(math.isfinite(q) for q in exps):
            raise ContractViolation("exponents must be finite")
        object.__setattr__(self, "exponents", exps)


@dataclass(frozen=True)
class BracketReport:
    """A ratio together with the numerical range that must contain it."""

    ratio: float
    lo: float
    hi: float
    bracketed: bool
    witness: tuple[float, float]
    numerator: float
    denominator: float

    def to_json(self) -> dict:
        return {
            "ratio": self.ratio,
            "range": [self.lo, self.hi],
            "bracketed": self.bracketed,
            "witness": list(self.witness),
            "numerator": self.numerator,
            "denominator": self.denominator,
        }


def _rect_grid(rect, shape):
    (a, b), (c, d) = rect
    ys = np.linspace(a, b, int(shape[0]))
    zs = np.linspace(c, d, int(shape[1]))
    return ys, zs


def mvt_localize(
    functional: FunctionalSpec,
    f: FunctionSpec,
    grid_shape: tuple[int, int] = (41, 41),
    tol: TolerancePolicy | None = None,
) -> BracketReport:
    """Localize the functional value of f inside the range of its top
    mixed partial.

    For a certified kernel the functional sees only the top partial, so
    ``(-1)**(M+N) * L(f) / L(g0)`` must lie in the closed numerical range
    of ``f_(M+1,N+1)`` (for even M+N the sign factor is 1 and the ratio is
    plain ``L(f)/L(g0)``).  The report carries the grid point whose partial
    value comes nearest to attaining the ratio.
    """
    tol = tol or DEFAULT_TOLERANCE
    M, N = functional.order
    if not f.has_partial((M + 1, N + 1)):
        raise ContractViolation(f"{f.name} must expose the ({M + 1}, {N + 1}) partial")
    lam_f = evaluate_functional(functional, f)
    lam_g = evaluate_functional(functional, g0(M, N))
    if abs(lam_g) <= tol.abs_tol:
        raise NumericalError(f"degenerate functional: normalizer value {lam_g:.3e} is below tolerance")
    ratio = (-1.0) ** (M + N) * lam_f / lam_g
    ys, zs = _rect_grid(functional.rect, grid_shape)
    vals = np.broadcast_to(
        np.asarray(f.partial(M + 1, N + 1)(ys[:, None], zs[None, :]), dtype=float),
        (len(ys), len(zs)),
    )
    lo, hi = float(np.min(vals)), float(np.max(vals))
    iy, iz = np.unravel_index(int(np.argmin(np.abs(vals - ratio))), vals.shape)
    return BracketReport(
        ratio=float(ratio),
        lo=lo,
        hi=hi,
        bracketed=bool(lo - tol.abs_tol <= ratio <= hi + tol.abs_tol),
        witness=(float(ys[iy]), float(zs[iz])),
        numerator=float(lam_f),
        denominator=float(lam_g),
    )


def cauchy_ratio(
    functional: FunctionalSpec,
    f: FunctionSpec,
    g: FunctionSpec,
    grid_shape: tuple[int, int] = (41, 41),
    tol: TolerancePolicy | None = None,
) -> BracketReport:
    """Ratio of two functional values, bracketed by the range of the ratio
    of top partials over grid points where the denominator partial is
    bounded away from zero."""
    tol = tol or DEFAULT_TOLERANCE
    M, N = functional.order
    for spec in (f, g):
        if not spec.has_partial((M + 1, N + 1)):
            raise ContractViolation(f"{spec.name} must expose the ({M + 1}, {N + 1}) partial")
    lam_f = evaluate_functional(functional, f)
    lam_g = evaluate_functional(functional, g)
    if abs(lam_g) <= tol.abs_tol * max(1.0, abs(lam_f)):
        raise NumericalError("denominator functional value is zero within tolerance")
    ratio = lam_f / lam_g
    ys, zs = _rect_grid(functional.rect, grid_shape)
    fv = np.broadcast_to(
        np.asarray(f.partial(M + 1, N + 1)(ys[:, None], zs[None, :]), dtype=float), (len(ys), len(zs))
    )
    gv = np.broadcast_to(
        np.asarray(g.partial(M + 1, N + 1)(ys[:, None], zs[None, :]), dtype=float), (len(ys), len(zs))
    )
    floor = 1e-8 * float(np.max(np.abs(gv)))
    mask = np.abs(gv) >= floor
    if not np.any(mask):
        raise NumericalError("denominator partial vanishes on the whole localization grid")
    ratios = fv[mask] / gv[mask]
    lo, hi = float(np.min(ratios)), float(np.max(ratios))
    span = max(1.0, abs(lo), abs(hi))
    kept = np.argwhere(mask)
    best = int(np.argmin(np.abs(ratios - ratio)))
    iy, iz = kept[best]
    return BracketReport(
        ratio=float(ratio),
        lo=lo,
        hi=hi,
        bracketed=bool(lo - tol.abs_tol * span <= ratio <= hi + tol.abs_tol * span),
        witness=(float(ys[iy]), float(zs[iz])),
        numerator=float(lam_f),
        denominator=float(lam_g),
    )


_EXCLUDED_GAP = 1e-12


def _power_product(x: float, M: int) -> float:
    # (x+1) x (x-1) ... (x-M+1): M+1 factors starting at x+1
    return falling_factorial(x + 1.0, M + 1)


def power_mean(functional: FunctionalSpec, p: float, q: float, tol: TolerancePolicy | None = None) -> float:
    """Two-exponent mean of the product coordinate.

    Solves ``(eta*zeta)**(p-q) = D(q)**2 L((yz)**(p+1)) / (D(p)**2
    L((yz)**(q+1)))`` for ``eta*zeta``, where D(x) is the length-(M+1)
    falling product starting at x+1; the exponents -1, 0, ..., M-1 are
    excluded since they annihilate D.  The result is checked against the
    range of y*z over the rectangle (which requires the rectangle to sit in
    the open positive quadrant).
    """
    tol = tol or DEFAULT_TOLERANCE
    M, N = functional.order
    if M != N:
        raise ContractViolation("power_mean needs a square order (M == N)")
    (a, b), (c, d) = functional.rect
    if a <= 0.0 or c <= 0.0:
        raise ContractViolation("power_mean needs the rectangle in the open positive quadrant")
    if p == q:
        raise ContractViolation("exponents must differ")
    for x in (p, q):
        if any(abs(x - e) < _EXCLUDED_GAP for e in range(-1, M)):
            raise ContractViolation(f"exponent {x} is excluded (would annihilate the derivative product)")

    def product_power(expo):
        def ev(y, z):
            return (np.asarray(y, dtype=float) * np.asarray(z, dtype=float)) ** expo

        return ev

    lam_p = evaluate_functional(functional, product_power(p + 1.0))
    lam_q = evaluate_functional(functional, product_power(q + 1.0))
    dp = _power_product(p, M)
    dq = _power_product(q, M)
    rhs = (dq * dq * lam_p) / (dp * dp * lam_q)
    if not (rhs > 0.0) or not math.isfinite(rhs):
        raise NumericalError(f"power-mean ratio is not positive and finite: {rhs!r}")
    value = rhs ** (1.0 / (p - q))
    lo, hi = a * c, b * d
    slack = tol.abs_tol * max(1.0, hi)
    if not (lo - slack <= value <= hi + slack):
        raise NumericalError(f"mean value {value:.12g} falls outside the product range [{lo:.12g}, {hi:.12g}]")
    return float(value)


def lambda_psi(functional: FunctionalSpec, q: float, k1: float | None = None, k2: float | None = None) -> float:
    """Functional value of the shifted power family member with exponent q.

    Exponents within 1e-6 of an integer in {0, ..., M} use the
    squared-logarithm branch exactly (the off-branch denominator squares
    away all precision there).
    """
    M, N = functional.order
    if M != N:
        raise ContractViolation("the shifted power family needs a square order (M == N)")
    (a, _), (c, _) = functional.rect
    k1 = 1.0 + abs(a) if k1 is None else float(k1)
    k2 = c - 1.0 if k2 is None else float(k2)
    psi = family_psi_q(q, M, k1, k2)
    return evaluate_functional(functional, psi)


def _lambda_psi_from_params(params: MeanParams):
    k1, k2 = params.shifts

    def lam(q: float) -> float:
        return lambda_psi(params.functional, q, k1, k2)

    return lam


def m_st_mean(params: MeanParams, s: float, t: float) -> float:
    """Two-parameter mean over the shifted power family:
    ``(L(s)/L(t))**(1/(s-t))`` for s != t, and the logarithmic-derivative
    branch ``exp(L'(s)/L(s))`` at s = t (central difference in the
    exponent, one Richardson step)."""
    lam = _lambda_psi_from_params(params)
    if s == t:
        ls = lam(s)
        if not ls > 0.0:
            raise NumericalError(f"functional value at exponent {s} must be positive, got {ls:.3e}")
        h = 1e-4
        d_h = (lam(s + h) - lam(s - h)) / (2.0 * h)
        d_h2 = (lam(s + h / 2.0) - lam(s - h / 2.0)) / h
        deriv = (4.0 * d_h2 - d_h) / 3.0
        return float(math.exp(deriv / ls))
    ls, lt = lam(s), lam(t)
    if not (ls > 0.0 and lt > 0.0):
        raise NumericalError(f"functional values must be positive, got {ls:.3e} and {lt:.3e}")
    return float(math.exp((math.log(ls) - math.log(lt)) / (s - t)))


def gram_test(spec: GramSpec, tol: TolerancePolicy | None = None) -> tuple[Certificate, PsdReport]:
    """Assemble the matrix of functional values at pairwise-averaged
    exponents and test it for positive semidefiniteness.

    Returns the certificate (driven by the smallest eigenvalue) and the
    full PSD report; the leading principal minors ride along as
    diagnostics only.
    """
    tol = tol or DEFAULT_TOLERANCE
    lam = _lambda_psi_from_params(spec.params)
    exps = spec.exponents
    m = len(exps)
    G = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            G[i, j] = G[j, i] = lam(0.5 * (exps[i] + exps[j]))
    report = psd_check(G, tol)
    scale = max(1.0, float(np.max(np.abs(G))))
    raw = [("gram-min-eigenvalue", "inequality", report.min_eigenvalue, scale)]
    diagnostics = tuple((f"leading-minor[{k + 1}]", det) for k, det in enumerate(report.minors))
    cert = Certificate.build(
        raw,
        tol,
        probes=(m,),
        notes=("minor determinants are diagnostics only; the verdict uses the eigenvalue floor",),
        diagnostics=diagnostics,
    )
    return cert, report


def lyapunov_check(params: MeanParams, r: float, s: float, t: float) -> float:
    """Three-point log-convexity residual
    ``(t-s) ln L(r) + (s-r) ln L(t) - (t-r) ln L(s)``, which must be
    nonnegative (within tolerance) when ``q -> L(q)`` is log-convex.

    Raises :class:`NotApplicableError` when any of the three functional
    values fails to be positive: log-convexity presupposes positivity, so
    the check is inapplicable rather than failed.
    """
    if not (r < s < t):
        raise ContractViolation(f"need r < s < t, got {r}, {s}, {t}")
    lam = _lambda_psi_from_params(params)
    values = {x: lam(x) for x in (r, s, t)}
    nonpos = {x: v for x, v in values.items() if not v > 0.0}
    if nonpos:
        raise NotApplicableError(f"nonpositive functional values at exponents {sorted(nonpos)}")
    return float(
        (t - s) * math.log(values[r]) + (s - r) * math.log(values[t]) - (t - r) * math.log(values[s])
    )


def expconv_sequence_test(omega: FunctionSpec, rhos, ys) -> float:
    """Quadratic form ``sum_{i,j} rho_i rho_j omega((y_i + y_j)/2)``; it is
    nonnegative for every exponentially convex omega."""
    if omega.arity != 1:
        raise ContractViolation("omega must be a one-variable spec")
    rho = np.asarray(rhos, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if len(rho) != len(y):
        raise ContractViolation("coefficients and points must have equal length")
    mids = 0.5 * (y[:, None] + y[None, :])
    lo, hi = omega.domain
    if np.any(mids < lo) or np.any(mids > hi):
        raise DomainError("a pairwise midpoint leaves the domain of omega")
    vals = np.broadcast_to(np.asarray(omega.value(mids), dtype=float), mids.shape)
    return stable_sum((rho[:, None] * rho[None, :] * vals).ravel())
