"""Physical wing description, boundary feedback law, disturbances and ICs.

The wing is a clamped-free beam/shaft pair on [0, l]: bending displacement
w(y, t) follows an Euler-Bernoulli equation with Kelvin-Voigt damping,
twisting phi(y, t) a wave equation with the same damping mechanism, and
the two couple through linear spanwise aerodynamic coefficients. A tip
store (mass m_s, inertia J_s) sits at y = l, where flap force and moment
actuate the structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .profiles import SpatialProfile

_PHYSICAL_FIELDS = ("rho", "Iw", "EI", "GJ", "eta_w", "eta_phi")
_AERO_FIELDS = ("alpha_w", "beta_w", "gamma_w", "alpha_phi", "beta_phi", "gamma_phi")


@dataclass(frozen=True)
class WingModel:
    """Structural, damping and aerodynamic description of the wing."""

    span: float
    rho: SpatialProfile       # mass per unit span
    Iw: SpatialProfile        # rotary inertia per unit span
    EI: SpatialProfile        # bending stiffness
    GJ: SpatialProfile        # torsional stiffness
    eta_w: SpatialProfile     # bending Kelvin-Voigt coefficient
    eta_phi: SpatialProfile   # torsional Kelvin-Voigt coefficient
    alpha_w: SpatialProfile
    beta_w: SpatialProfile
    gamma_w: SpatialProfile
    alpha_phi: SpatialProfile
    beta_phi: SpatialProfile
    gamma_phi: SpatialProfile
    m_s: float                # tip store mass
    J_s: float                # tip store inertia

    def __post_init__(self):
        if self.span <= 0:
            raise ValueError("span must be positive")
        if self.m_s <= 0 or self.J_s <= 0:
            raise ValueError("tip store mass and inertia must be positive")
        for name in _PHYSICAL_FIELDS + _AERO_FIELDS:
            p = getattr(self, name)
            if abs(p.span - self.span) > 1e-12 * max(1.0, self.span):
                raise ValueError(f"profile {name} spans {p.span}, wing spans {self.span}")
        for name in _PHYSICAL_FIELDS:
            lo, _ = getattr(self, name).essential_bounds()
            if lo <= 0:
                raise ValueError(f"essential infimum of {name} must be positive, got {lo}")

    def stiffness_scaled(self, factor: float) -> "WingModel":
        """Copy with EI and GJ multiplied by `factor`."""
        scale = SpatialProfile.constant(factor, self.span)
        return self.replace(EI=self.EI.product(scale), GJ=self.GJ.product(scale))

    def replace(self, **kw) -> "WingModel":
        from dataclasses import replace as _replace
        return _replace(self, **kw)


def default_model() -> WingModel:
    """Documented default wing: 2 m tapered span, light internal damping.

    Mass and stiffness taper linearly toward the tip (30 % and 50 % drop
    respectively) so the nonhomogeneous machinery is exercised. Aerodynamic
    coefficients are small constants; the shipped magnitudes leave the
    stability certificate feasible, which `certificates.feasibility_search`
    verifies rather than assumes. Aerodynamic units are a modeling choice
    and are flagged as such in emitted reports.
    """
    l = 2.0
    return WingModel(
        span=l,
        rho=SpatialProfile.linear(10.0, 7.0, l),
        Iw=SpatialProfile.linear(0.5, 0.35, l),
        EI=SpatialProfile.linear(150.0, 75.0, l),
        GJ=SpatialProfile.linear(100.0, 50.0, l),
        eta_w=SpatialProfile.constant(0.02, l),
        eta_phi=SpatialProfile.constant(0.02, l),
        alpha_w=SpatialProfile.constant(0.05, l),
        beta_w=SpatialProfile.constant(-0.02, l),
        gamma_w=SpatialProfile.constant(0.01, l),
        alpha_phi=SpatialProfile.constant(0.1, l),
        beta_phi=SpatialProfile.constant(0.1, l),
        gamma_phi=SpatialProfile.constant(0.05, l),
        m_s=1.0,
        J_s=0.1,
    )


def flutter_prone_model() -> WingModel:
    """Heavier build of the default wing with destabilizing aerodynamics.

    Used by the demonstration scenarios: mass, inertia and both stiffness
    profiles are scaled four-fold (same mode placement, four times less
    sensitivity to a fixed-amplitude tip disturbance) while the internal
    damping is cut to a level the velocity couplings overpower. Open loop
    the response oscillates and grows; with tip feedback it damps out.
    """
    base = default_model()
    l = base.span
    four = SpatialProfile.constant(4.0, l)
    return base.replace(
        rho=base.rho.product(four),
        Iw=base.Iw.product(four),
        EI=base.EI.product(four),
        GJ=base.GJ.product(four),
        m_s=4.0 * base.m_s,
        J_s=4.0 * base.J_s,
        eta_w=SpatialProfile.constant(0.001, l),
        eta_phi=SpatialProfile.constant(0.001, l),
        gamma_w=SpatialProfile.constant(0.03, l),
        beta_phi=SpatialProfile.constant(0.2, l),
    )


@dataclass(frozen=True)
class ControlLaw:
    """Tip feedback gains and the position-feedback weights eps1, eps2.

    The flap force/moment cancel the tip-store inertia and apply
    -k [rate + eps * position] at the tip in each axis.
    """

    k1: float
    k2: float
    eps1: float
    eps2: float

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0:
            raise ValueError("gains k1, k2 must be nonnegative")
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1, eps2 must be strictly positive")

    @property
    def eps_max(self) -> float:
        return max(self.eps1, self.eps2)


@dataclass(frozen=True)
class DisturbanceSpec:
    """Twice-differentiable scalar input pair (u1, u2) with analytic rates."""

    kind: str
    u1: Callable[[float], float]
    u2: Callable[[float], float]
    u1dot: Callable[[float], float]
    u2dot: Callable[[float], float]
    sup_U: float       # upper bound on sup_t ||U(t)||_2
    sup_Udot: float    # upper bound on sup_t ||dU/dt||_2

    def U(self, t):
        return np.array([self.u1(t), self.u2(t)])

    def Udot(self, t):
        return np.array([self.u1dot(t), self.u2dot(t)])


def _p1(t):
    return 3.0 * np.cos(0.2 * np.pi * t) * np.sin(np.pi * t) * np.cos(3 * np.pi * t)


def _p1dot(t):
    a, b, c = 0.2 * np.pi, np.pi, 3 * np.pi
    return 3.0 * (-a * np.sin(a * t) * np.sin(b * t) * np.cos(c * t)
                  + b * np.cos(a * t) * np.cos(b * t) * np.cos(c * t)
                  - c * np.cos(a * t) * np.sin(b * t) * np.sin(c * t))


def _p2(t):
    return np.sin(0.2 * np.pi * t) * np.cos(np.pi * t) * np.sin(3 * np.pi * t)


def _p2dot(t):
    a, b, c = 0.2 * np.pi, np.pi, 3 * np.pi
    return (a * np.cos(a * t) * np.cos(b * t) * np.sin(c * t)
            - b * np.sin(a * t) * np.sin(b * t) * np.sin(c * t)
            + c * np.sin(a * t) * np.cos(b * t) * np.cos(c * t))


# Amplitude bounds: |p1| <= 3, |p2| <= 1, |p1'| <= 3*(0.2+1+3)*pi, |p2'| <= 4.2*pi.
_P1DOT_SUP = 3.0 * 4.2 * math.pi
_P2DOT_SUP = 4.2 * math.pi


def zero_disturbance() -> DisturbanceSpec:
    zf = lambda t: np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
    return DisturbanceSpec("zero", zf, zf, zf, zf, 0.0, 0.0)


def persistent_disturbance(scale: float = 1.0) -> DisturbanceSpec:
    """Sustained multi-tone force/moment pair acting at the wing tip."""
    s = float(scale)
    return DisturbanceSpec(
        "persistent",
        lambda t: s * _p1(t), lambda t: s * _p2(t),
        lambda t: s * _p1dot(t), lambda t: s * _p2dot(t),
        sup_U=s * math.hypot(3.0, 1.0),
        sup_Udot=s * math.hypot(_P1DOT_SUP, _P2DOT_SUP),
    )


def vanishing_disturbance(rate: float = 0.5, scale: float = 1.0) -> DisturbanceSpec:
    """Persistent pair modulated by exp(-rate * t)."""
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    s, r = float(scale), float(rate)
    env = lambda t: np.exp(-r * t)
    return DisturbanceSpec(
        "exponentially-vanishing",
        lambda t: s * env(t) * _p1(t),
        lambda t: s * env(t) * _p2(t),
        lambda t: s * env(t) * (_p1dot(t) - r * _p1(t)),
        lambda t: s * env(t) * (_p2dot(t) - r * _p2(t)),
        sup_U=s * math.hypot(3.0, 1.0),
        sup_Udot=s * math.hypot(_P1DOT_SUP + 3.0 * r, _P2DOT_SUP + r),
    )


def custom_disturbance(u1, u1dot, u2, u2dot, sup_U=np.inf, sup_Udot=np.inf) -> DisturbanceSpec:
    return DisturbanceSpec("custom", u1, u2, u1dot, u2dot, float(sup_U), float(sup_Udot))


def derivative_consistency_error(dist: DisturbanceSpec, times, h: float):
    """Max mismatch between analytic rates and central differences at `times`."""
    t = np.asarray(times, dtype=float)
    e1 = np.abs(dist.u1dot(t) - (dist.u1(t + h) - dist.u1(t - h)) / (2 * h))
    e2 = np.abs(dist.u2dot(t) - (dist.u2(t + h) - dist.u2(t - h)) / (2 * h))
    return float(max(e1.max(), e2.max()))


@dataclass(frozen=True)
class InitialCondition:
    """Initial bending/twist displacement and rate fields on [0, span].

    Slope callables feed the Hermite value+slope interpolation; when
    omitted they are recovered by a five-point central difference.
    """

    w0: Callable
    wt0: Callable
    phi0: Callable
    phit0: Callable
    w0_slope: Optional[Callable] = None
    wt0_slope: Optional[Callable] = None

    def slope_w0(self, span):
        return self.w0_slope if self.w0_slope is not None else _fd_slope(self.w0, span)

    def slope_wt0(self, span):
        return self.wt0_slope if self.wt0_slope is not None else _fd_slope(self.wt0, span)

    def check_root_constraints(self, span, tol=1e-9):
        """Clamped root: w0(0) = w0'(0) = 0 and phi0(0) = 0."""
        s = self.slope_w0(span)
        vals = (float(self.w0(0.0)), float(s(0.0)), float(self.phi0(0.0)))
        if any(abs(v) > tol for v in vals):
            raise ValueError(f"initial condition violates clamped-root constraints: {vals}")


def _fd_slope(f, span, rel_h=1e-6):
    h = rel_h * span

    def slope(y):
        y_arr = np.asarray(y, dtype=float)
        yl = np.clip(y_arr - h, 0.0, span)
        yr = np.clip(y_arr + h, 0.0, span)
        return (np.asarray(f(yr)) - np.asarray(f(yl))) / (yr - yl)

    return slope


def zero_initial_condition() -> InitialCondition:
    z = lambda y: np.zeros_like(np.asarray(y, dtype=float)) if np.ndim(y) else 0.0
    return InitialCondition(z, z, z, z, w0_slope=z, wt0_slope=z)


def bent_twisted_initial_condition(l: float) -> InitialCondition:
    """Cubic bending / quadratic twist release from rest.

    w0(y) = y^2 (y - 3 l) / (40 l^2), phi0(y) = 2 pi y^2 / (45 l^2); both
    rates start at zero.
    """
    z = lambda y: np.zeros_like(np.asarray(y, dtype=float)) if np.ndim(y) else 0.0
    return InitialCondition(
        w0=lambda y: y ** 2 * (y - 3 * l) / (40 * l ** 2),
        wt0=z,
        phi0=lambda y: 2 * np.pi * y ** 2 / (45 * l ** 2),
        phit0=z,
        w0_slope=lambda y: (3 * y ** 2 - 6 * l * y) / (40 * l ** 2),
        wt0_slope=z,
    )
