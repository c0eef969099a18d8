"""Composite Gauss-Legendre quadrature and running-integral helpers.

Everything downstream (certificate constants, boundary lifts, energy
integrals) funnels through this module so that quadrature resolution is
controlled in one place.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial.legendre import leggauss


def gauss_panels(a: float, b: float, panels: int, points: int):
    """Nodes and weights of composite Gauss-Legendre on [a, b].

    Returns (nodes, weights) as flat arrays of length panels*points,
    nodes ascending. Exact for polynomials of degree <= 2*points - 1 on
    each panel.
    """
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    xi, wi = leggauss(points)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    weights = (half[:, None] * wi[None, :]).ravel()
    return nodes, weights


def integrate(f, a: float, b: float, panels: int = 8, points: int = 4) -> float:
    """Composite Gauss-Legendre approximation of the integral of f over [a, b]."""
    if b == a:
        return 0.0
    nodes, weights = gauss_panels(a, b, panels, points)
    return float(np.dot(weights, np.asarray(f(nodes), dtype=float)))


class CumulativeIntegral:
    """Running integral F(y) = int_0^y f(xi) dxi on a fixed panel grid.

    The integrand is evaluated once per panel at Gauss nodes; prefix sums
    give F at panel edges exactly (within the panel rule). Arbitrary y are
    handled by a fresh Gauss rule on the partial panel, so evaluation cost
    is O(points) per query after O(panels*points) setup.
    """

    def __init__(self, f, span: float, panels: int = 64, points: int = 6):
        self.f = f
        self.span = float(span)
        self.panels = int(panels)
        self.points = int(points)
        self.edges = np.linspace(0.0, self.span, self.panels + 1)
        nodes, weights = gauss_panels(0.0, self.span, self.panels, self.points)
        vals = weights * np.asarray(f(nodes), dtype=float)
        per_panel = vals.reshape(self.panels, self.points).sum(axis=1)
        self.prefix = np.concatenate([[0.0], np.cumsum(per_panel)])
        self._xi, self._wi = leggauss(self.points)

    def upto(self, y):
        """F(y) for scalar or array y in [0, span]."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        idx = np.clip(np.searchsorted(self.edges, y_arr, side="right") - 1, 0, self.panels - 1)
        lo = self.edges[idx]
        half = 0.5 * (y_arr - lo)
        mid = lo + half
        pts = mid[:, None] + half[:, None] * self._xi[None, :]
        fv = np.asarray(self.f(pts.ravel()), dtype=float).reshape(pts.shape)
        partial = (half[:, None] * self._wi[None, :] * fv).sum(axis=1)
        out = self.prefix[idx] + partial
        return float(out[0]) if np.isscalar(y) or np.ndim(y) == 0 else out

    @property
    def total(self) -> float:
        """Integral over the whole span."""
        return float(self.prefix[-1])

    def from_y_to_end(self, y):
        """int_y^span f, computed as total - upto(y)."""
        return self.total - self.upto(y)


def kernel_integral_upto(f, span, panels=64, points=6):
    """Return a callable y -> int_0^y (y - xi) f(xi) dxi.

    Separates the kernel: int_0^y (y-xi) f = y*int_0^y f - int_0^y xi*f,
    so two running integrals suffice.
    """
    c0 = CumulativeIntegral(f, span, panels, points)
    c1 = CumulativeIntegral(lambda x: x * np.asarray(f(x), dtype=float), span, panels, points)

    def eval_at(y):
        return np.asarray(y, dtype=float) * c0.upto(y) - c1.upto(y)

    return eval_at


def kernel_integral_tail(f, span, panels=64, points=6):
    """Return a callable y -> int_y^span (xi - y) f(xi) dxi."""
    c0 = CumulativeIntegral(f, span, panels, points)
    c1 = CumulativeIntegral(lambda x: x * np.asarray(f(x), dtype=float), span, panels, points)

    def eval_at(y):
        return c1.from_y_to_end(y) - np.asarray(y, dtype=float) * c0.from_y_to_end(y)

    return eval_at


def cheb_fit(f, a: float, b: float, degree: int = 24):
    """Least-squares Chebyshev fit of f on [a, b] (sampled at 2*degree+9 points)."""
    n = 2 * degree + 9
    # Chebyshev points mapped to [a, b]; clustered at the ends, which keeps
    # the boundary-derivative evaluations well conditioned.
    k = np.arange(n)
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * k / (n - 1))
    x = np.sort(x)
    t = (2.0 * x - (a + b)) / (b - a)
    coef = npcheb.chebfit(t, np.asarray(f(x), dtype=float), degree)
    return coef


def cheb_derivative(f, a: float, b: float, degree: int = 24, order: int = 1):
    """Differentiate f on [a, b] via a Chebyshev fit; returns a callable.

    Exact (to round-off) when f is a polynomial of degree <= `degree`;
    spectrally accurate for smooth f.
    """
    coef = cheb_fit(f, a, b, degree)
    dcoef = npcheb.chebder(coef, order, scl=2.0 / (b - a))

    def eval_at(y):
        t = (2.0 * np.asarray(y, dtype=float) - (a + b)) / (b - a)
        return npcheb.chebval(t, dcoef)

    return eval_at
