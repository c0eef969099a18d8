"""Spanwise coefficient profiles with exact essential sup/inf.

A profile is stored as a piecewise polynomial in the physical coordinate y
on [0, span]. Constants and global polynomials are single pieces; sampled
data becomes piecewise linear. Products of profiles stay in the class, so
composite coefficients such as eta_w(y)*EI(y) keep exact L-infinity bounds
(piecewise-polynomial extrema are computed from derivative roots, not from
sampling).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class SpatialProfile:
    """Piecewise-polynomial coefficient function on [0, span]."""

    kind: str
    span: float
    breaks: tuple = field(repr=False)
    coeffs: tuple = field(repr=False)  # per-piece coefficients, ascending powers of y

    # -- constructors ---------------------------------------------------

    @staticmethod
    def constant(value: float, span: float) -> "SpatialProfile":
        return SpatialProfile("constant", float(span), (0.0, float(span)),
                              (np.array([float(value)]),))

    @staticmethod
    def polynomial(coeffs, span: float) -> "SpatialProfile":
        """p(y) = sum coeffs[i] * y**i on [0, span]."""
        c = np.trim_zeros(np.asarray(coeffs, dtype=float), trim="b")
        if c.size == 0:
            c = np.array([0.0])
        return SpatialProfile("polynomial", float(span), (0.0, float(span)), (c,))

    @staticmethod
    def linear(root_value: float, tip_value: float, span: float) -> "SpatialProfile":
        """Linear taper from the clamped root to the tip."""
        slope = (tip_value - root_value) / float(span)
        return SpatialProfile.polynomial([root_value, slope], span)

    @staticmethod
    def piecewise_linear(positions, values) -> "SpatialProfile":
        ys = np.asarray(positions, dtype=float)
        vs = np.asarray(values, dtype=float)
        if ys.ndim != 1 or ys.size < 2 or ys.size != vs.size:
            raise ValueError("piecewise-linear profile needs matching 1-d sample arrays")
        if np.any(np.diff(ys) <= 0):
            raise ValueError("sample positions must be strictly increasing")
        if ys[0] != 0.0:
            raise ValueError("samples must start at y = 0")
        pieces = []
        for i in range(ys.size - 1):
            slope = (vs[i + 1] - vs[i]) / (ys[i + 1] - ys[i])
            pieces.append(np.array([vs[i] - slope * ys[i], slope]))
        return SpatialProfile("piecewise-linear", float(ys[-1]), tuple(ys), tuple(pieces))

    @staticmethod
    def from_function(f, span: float, n_nodes: int = 64) -> "SpatialProfile":
        """Sample an arbitrary closed form into a piecewise-linear profile."""
        ys = np.linspace(0.0, float(span), int(n_nodes))
        return SpatialProfile.piecewise_linear(ys, np.asarray(f(ys), dtype=float))

    # -- evaluation -----------------------------------------------------

    def __call__(self, y):
        return self.evaluate(y)

    def evaluate(self, y):
        """Profile value at y (scalar or array), y must lie in [0, span]."""
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        slack = _DOMAIN_SLACK * max(1.0, self.span)
        if np.any(y_arr < -slack) or np.any(y_arr > self.span + slack):
            raise ValueError(f"position outside [0, {self.span}]")
        y_arr = np.clip(y_arr, 0.0, self.span)
        breaks = np.asarray(self.breaks)
        idx = np.clip(np.searchsorted(breaks, y_arr, side="right") - 1, 0, len(self.coeffs) - 1)
        out = np.empty_like(y_arr)
        for i in range(len(self.coeffs)):
            sel = idx == i
            if np.any(sel):
                out[sel] = npoly.polyval(y_arr[sel], self.coeffs[i])
        return float(out[0]) if np.isscalar(y) or np.ndim(y) == 0 else out

    # -- bounds ---------------------------------------------------------

    def essential_bounds(self):
        """(inf, sup) over [0, span], exact for the stored piecewise polynomial."""
        lo = np.inf
        hi = -np.inf
        breaks = np.asarray(self.breaks)
        for i, c in enumerate(self.coeffs):
            a, b = breaks[i], breaks[i + 1]
            cand = [a, b]
            if c.size > 2:
                roots = npoly.polyroots(npoly.polyder(c))
                for r in roots:
                    if abs(r.imag) < 1e-12 and a < r.real < b:
                        cand.append(r.real)
            vals = npoly.polyval(np.asarray(cand, dtype=float), c)
            lo = min(lo, float(vals.min()))
            hi = max(hi, float(vals.max()))
        return lo, hi

    @property
    def inf(self) -> float:
        return self.essential_bounds()[0]

    @property
    def sup(self) -> float:
        return self.essential_bounds()[1]

    @property
    def abs_sup(self) -> float:
        """Essential supremum of |p|."""
        lo, hi = self.essential_bounds()
        return max(abs(lo), abs(hi))

    # -- algebra ----------------------------------------------------------

    def product(self, other: "SpatialProfile") -> "SpatialProfile":
        """Pointwise product, exact as a piecewise polynomial."""
        if abs(self.span - other.span) > _DOMAIN_SLACK * max(1.0, self.span):
            raise ValueError("profiles live on different spans")
        breaks = np.union1d(np.asarray(self.breaks), np.asarray(other.breaks))
        pieces = []
        for i in range(breaks.size - 1):
            mid = 0.5 * (breaks[i] + breaks[i + 1])
            ca = self._piece_at(mid)
            cb = other._piece_at(mid)
            pieces.append(npoly.polymul(ca, cb))
        kind = "constant" if (self.kind == other.kind == "constant") else \
            "polynomial" if breaks.size == 2 else "piecewise-polynomial"
        return SpatialProfile(kind, self.span, tuple(breaks), tuple(pieces))

    def _piece_at(self, y: float):
        breaks = np.asarray(self.breaks)
        i = int(np.clip(np.searchsorted(breaks, y, side="right") - 1, 0, len(self.coeffs) - 1))
        return self.coeffs[i]


def evaluate_profile(p: SpatialProfile, y):
    return p.evaluate(y)


def essential_bounds(p: SpatialProfile):
    return p.essential_bounds()


def product_bounds(p: SpatialProfile, q: SpatialProfile):
    """Essential bounds of the pointwise product y -> p(y) q(y)."""
    return p.product(q).essential_bounds()
