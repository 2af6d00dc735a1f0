"""Evaluable functions with exact derivatives.

A :class:`FunctionSpec` bundles a vectorized evaluator with closed-form
(partial) derivatives up to a declared order.  Specs can also be built from
tabulated samples (spline-backed) or wrapped so that missing derivative
orders fall back to central-difference stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import CapabilityError, ContractViolation
from .numerics import numeric_partial

REAL_LINE = (-math.inf, math.inf)
WHOLE_PLANE = (REAL_LINE, REAL_LINE)


@dataclass(frozen=True)
class MonotonicityClaim:
    """What a family asserts about its sign structure, and how much of the
    assertion survives direct derivative checks."""

    kind: str  # "completely-monotonic" or "top-partial-positive"
    order: object  # int for one variable, (m, n) for two
    verified: bool
    domain: object = None  # sub-domain where the claim is verified, if narrower
    note: str = ""


@dataclass(frozen=True)
class FunctionSpec:
    """A function of one or two variables with exact derivatives.

    ``partial_factory(i)`` (arity 1) or ``partial_factory(i, j)`` (arity 2)
    must return a vectorized callable for every order up to ``max_order``.
    """

    name: str
    arity: int
    domain: tuple
    value: Callable
    partial_factory: Callable | None = None
    max_order: object = 0
    params: dict = field(default_factory=dict)
    claim: MonotonicityClaim | None = None

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ContractViolation("arity must be 1 or 2")

    def __call__(self, *args):
        if len(args) != self.arity:
            raise ContractViolation(f"{self.name} takes {self.arity} argument(s), got {len(args)}")
        scalar = all(np.isscalar(a) or np.ndim(a) == 0 for a in args)
        out = self.value(*[np.asarray(a, dtype=float) for a in args])
        return float(out) if scalar else np.asarray(out, dtype=float)

    def _order_ok(self, order) -> bool:
        if self.arity == 1:
            cap = self.max_order if np.isscalar(self.max_order) else min(self.max_order)
            return order <= cap
        i, j = order
        if np.isscalar(self.max_order):
            return i <= self.max_order and j <= self.max_order
        return i <= self.max_order[0] and j <= self.max_order[1]

    def has_partial(self, *order) -> bool:
        if len(order) == 1 and isinstance(order[0], (tuple, list)):
            order = tuple(order[0])
        if self.arity == 1:
            i = int(order[0])
            return i == 0 or (self.partial_factory is not None and self._order_ok(i))
        i, j = int(order[0]), int(order[1])
        if (i, j) == (0, 0):
            return True
        return self.partial_factory is not None and self._order_ok((i, j))

    def partial(self, i: int, j: int | None = None) -> Callable:
        """Vectorized evaluator of the derivative of the given order."""
        if self.arity == 1:
            if j is not None:
                raise ContractViolation(f"{self.name} is a one-variable function")
            if i == 0:
                return self.value
            if self.partial_factory is None or not self._order_ok(i):
                raise CapabilityError(f"{self.name} does not expose derivative order {i}")
            return self.partial_factory(i)
        if j is None:
            raise ContractViolation(f"{self.name} is a two-variable function; pass both orders")
        if (i, j) == (0, 0):
            return self.value
        if self.partial_factory is None or not self._order_ok((i, j)):
            raise CapabilityError(f"{self.name} does not expose partial order ({i}, {j})")
        return self.partial_factory(i, j)

    def partial_at(self, point, order) -> float:
        """Derivative of the given order evaluated at one point."""
        if self.arity == 1:
            return float(self.partial(int(order))(np.asarray(point, dtype=float)))
        i, j = order
        y, z = point
        return float(self.partial(i, j)(np.asarray(y, dtype=float), np.asarray(z, dtype=float)))

    def with_numeric_fallback(self, step=None) -> "FunctionSpec":
        """Answer any derivative order, falling back to central differences
        beyond the exactly known ones (opt-in; stencil accuracy applies)."""
        spec = self

        if spec.arity == 1:

            def factory(i):
                if spec.partial_factory is not None and spec._order_ok(i):
                    return spec.partial_factory(i)
                return np.vectorize(
                    lambda y: numeric_partial(spec, y, i, step=step, domain=spec.domain)
                )

            cap = 6
        else:

            def factory(i, j):
                if spec.partial_factory is not None and spec._order_ok((i, j)):
                    return spec.partial_factory(i, j)
                return np.vectorize(
                    lambda y, z: numeric_partial(spec, (y, z), (i, j), step=step, domain=spec.domain)
                )

            cap = (6, 6)
        return replace(spec, partial_factory=factory, max_order=cap)


def from_callable(
    fn: Callable,
    arity: int = 1,
    domain=None,
    name: str = "callable",
    derivatives: Callable | None = None,
    max_order=0,
    params: dict | None = None,
    vectorized: bool = True,
) -> FunctionSpec:
    """Wrap a plain callable.  ``derivatives`` is a partial factory with the
    same convention as :class:`FunctionSpec`."""
    if domain is None:
        domain = REAL_LINE if arity == 1 else WHOLE_PLANE
    value = fn if vectorized else np.vectorize(fn)
    return FunctionSpec(
        name=name,
        arity=arity,
        domain=domain,
        value=value,
        partial_factory=derivatives,
        max_order=max_order,
        params=params or {},
    )


def polynomial_spec(coeffs, domain=REAL_LINE, name: str = "polynomial") -> FunctionSpec:
    """One-variable polynomial (coefficients in increasing degree) with
    exact derivatives of every order."""
    poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))

    def factory(i):
        return poly.deriv(i) if i else poly

    return FunctionSpec(
        name=name,
        arity=1,
        domain=domain,
        value=poly,
        partial_factory=factory,
        max_order=10**6,
        params={"coeffs": tuple(float(c) for c in np.asarray(coeffs, dtype=float))},
    )


def polynomial_spec_2d(coeffs, domain=WHOLE_PLANE, name: str = "polynomial2d") -> FunctionSpec:
    """Two-variable polynomial; ``coeffs[i, j]`` multiplies ``y**i * z**j``."""
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))

    def factory(i, j):
        d = np.polynomial.polynomial.polyder(np.polynomial.polynomial.polyder(c, i, axis=0), j, axis=1) if (i or j) else c

        def ev(y, z, d=d):
            return np.polynomial.polynomial.polyval2d(y, z, d)

        return ev

    return FunctionSpec(
        name=name,
        arity=2,
        domain=domain,
        value=factory(0, 0),
        partial_factory=factory,
        max_order=(10**6, 10**6),
        params={"shape": c.shape},
    )


def tensor_product(f: FunctionSpec, g: FunctionSpec, name: str | None = None) -> FunctionSpec:
    """Separable two-variable spec ``(y, z) -> f(y) * g(z)``."""
    if f.arity != 1 or g.arity != 1:
        raise ContractViolation("tensor_product needs two one-variable specs")

    def value(y, z):
        return f.value(y) * g.value(z)

    def factory(i, j):
        fy = f.partial(i)
        gz = g.partial(j)

        def ev(y, z):
            return np.asarray(fy(y), dtype=float) * np.asarray(gz(z), dtype=float)

        return ev

    fcap = f.max_order if np.isscalar(f.max_order) else min(f.max_order)
    gcap = g.max_order if np.isscalar(g.max_order) else min(g.max_order)
    return FunctionSpec(
        name=name or f"{f.name}*{g.name}",
        arity=2,
        domain=(f.domain, g.domain),
        value=value,
        partial_factory=factory if f.partial_factory is not None and g.partial_factory is not None else None,
        max_order=(fcap, gcap),
        params={"factors": (f.name, g.name)},
    )


def from_samples(points, values, name: str = "sampled") -> FunctionSpec:
    """Cubic-spline interpolant of tabulated one-variable data; derivatives
    available up to order 3."""
    from scipy.interpolate import CubicSpline

    pts = np.asarray(points, dtype=float)
    spline = CubicSpline(pts, np.asarray(values, dtype=float))
    derivs = {i: spline.derivative(i) for i in (1, 2, 3)}

    def factory(i):
        return derivs[i]

    return FunctionSpec(
        name=name,
        arity=1,
        domain=(float(pts[0]), float(pts[-1])),
        value=spline,
        partial_factory=factory,
        max_order=3,
        params={"samples": len(pts)},
    )


def from_samples_2d(ypoints, zpoints, values, name: str = "sampled2d") -> FunctionSpec:
    """Bicubic-spline interpolant of tabulated two-variable data; partials
    available up to order (3, 3)."""
    from scipy.interpolate import RectBivariateSpline

    yp = np.asarray(ypoints, dtype=float)
    zp = np.asarray(zpoints, dtype=float)
    spline = RectBivariateSpline(yp, zp, np.asarray(values, dtype=float), kx=3, ky=3, s=0)

    def make(i, j):
        def ev(y, z):
            yb, zb = np.broadcast_arrays(np.asarray(y, dtype=float), np.asarray(z, dtype=float))
            return spline(yb.ravel(), zb.ravel(), dx=i, dy=j, grid=False).reshape(yb.shape)

        return ev

    return FunctionSpec(
        name=name,
        arity=2,
        domain=((float(yp[0]), float(yp[-1])), (float(zp[0]), float(zp[-1]))),
        value=make(0, 0),
        partial_factory=make,
        max_order=(3, 3),
        params={"samples": (len(yp), len(zp))},
    )
