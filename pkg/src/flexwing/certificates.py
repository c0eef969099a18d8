"""Closed-form stability-certificate constants and the feasibility search.

The certified decay rate comes out of an inequality system in eight slack
parameters r1..r8 plus the feedback weights eps1, eps2. All constants are
algebraic in the essential sup/inf of the wing profiles, so a search point
costs a handful of flops; the derivative-free coordinate search below just
sweeps that algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import ControlLaw, WingModel
from .quadrature import CumulativeIntegral, gauss_panels, integrate

_PI2 = math.pi ** 2
_PI4 = math.pi ** 4
STRICTNESS = 1e-12  # "> 0" is accepted only above this margin

R_BOX = (1e-3, 1e3)
EPS_FLOOR = 1e-6
SEARCH_STARTS = 16
SEARCH_ITERATIONS = 200
SEARCH_SHRINK = 0.5


@dataclass(frozen=True)
class CertificateParameters:
    """Slack vector r1..r8 and the feedback weights of a certificate point."""

    r: tuple
    eps1: float
    eps2: float

    def __post_init__(self):
        if len(self.r) != 8 or any(v <= 0 for v in self.r):
            raise ValueError("r must hold eight strictly positive entries")
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1, eps2 must be strictly positive")

    @property
    def eps_max(self) -> float:
        return max(self.eps1, self.eps2)


class EssentialBounds:
    """Scalar sup/inf data the certificate formulas consume."""

    def __init__(self, model: WingModel):
        self.l = model.span
        self.rho_inf, self.rho_sup = model.rho.essential_bounds()
        self.Iw_inf, self.Iw_sup = model.Iw.essential_bounds()
        self.EI_inf, self.EI_sup = model.EI.essential_bounds()
        self.GJ_inf, self.GJ_sup = model.GJ.essential_bounds()
        self.eta_w_sup = model.eta_w.sup
        self.eta_phi_sup = model.eta_phi.sup
        self.etaEI_inf = model.eta_w.product(model.EI).inf
        self.etaGJ_inf = model.eta_phi.product(model.GJ).inf
        self.a_w = model.alpha_w.abs_sup
        self.b_w = model.beta_w.abs_sup
        self.g_w = model.gamma_w.abs_sup
        self.a_phi = model.alpha_phi.abs_sup
        self.b_phi = model.beta_phi.abs_sup
        self.g_phi = model.gamma_phi.abs_sup

    def as_dict(self) -> dict:
        keys = ("l", "rho_inf", "rho_sup", "Iw_inf", "Iw_sup", "EI_inf", "EI_sup",
                "GJ_inf", "GJ_sup", "eta_w_sup", "eta_phi_sup", "etaEI_inf",
                "etaGJ_inf", "a_w", "b_w", "g_w", "a_phi", "b_phi", "g_phi")
        return {k: getattr(self, k) for k in keys}


def compute_Km(model: WingModel, bounds: Optional[EssentialBounds] = None) -> float:
    """Norm-equivalence constant bounding the eps cross terms.

    Km = max( sqrt(rho_sup), 16 l^4 sqrt(rho_sup) / (pi^4 EI_inf),
              sqrt(Iw_sup),  4 l^2 sqrt(Iw_sup) / (pi^2 GJ_inf) ).
    """
    b = bounds or EssentialBounds(model)
    if min(b.rho_inf, b.Iw_inf, b.EI_inf, b.GJ_inf) <= 0:
        raise ValueError("Km needs strictly positive essential infima")
    l4, l2 = b.l ** 4, b.l ** 2
    return max(
        math.sqrt(b.rho_sup),
        16.0 * l4 * math.sqrt(b.rho_sup) / (_PI4 * b.EI_inf),
        math.sqrt(b.Iw_sup),
        4.0 * l2 * math.sqrt(b.Iw_sup) / (_PI2 * b.GJ_inf),
    )


def compute_eps_stars(model: WingModel, bounds: Optional[EssentialBounds] = None):
    """Dissipativity limits on eps1 and eps2."""
    b = bounds or EssentialBounds(model)
    l4, l2 = b.l ** 4, b.l ** 2
    eps1_star = 4.0 * _PI4 * b.etaEI_inf / (64.0 * l4 * b.rho_sup + _PI4 * b.eta_w_sup * b.etaEI_inf)
    eps2_star = 4.0 * _PI2 * b.etaGJ_inf / (16.0 * l2 * b.Iw_sup + _PI2 * b.eta_phi_sup * b.etaGJ_inf)
    return eps1_star, eps2_star


def eps_admissible_limits(model: WingModel, bounds: Optional[EssentialBounds] = None):
    """Open upper limits min(eps_i_star, 1/Km) for each feedback weight."""
    b = bounds or EssentialBounds(model)
    km = compute_Km(model, b)
    e1s, e2s = compute_eps_stars(model, b)
    return min(e1s, 1.0 / km), min(e2s, 1.0 / km)


def compute_lambdas(model: WingModel, params: CertificateParameters,
                    bounds: Optional[EssentialBounds] = None):
    """The six certificate coefficients lambda_1..lambda_6."""
    b = bounds or EssentialBounds(model)
    r1, r2, r3, r4, r5, r6, r7, r8 = params.r
    e1, e2 = params.eps1, params.eps2
    l4, l2 = b.l ** 4, b.l ** 2
    sq_rho = math.sqrt(b.rho_sup)
    sq_rho_geo = math.sqrt(b.rho_sup * b.rho_inf)
    sq_Iw = math.sqrt(b.Iw_sup)

    lam1 = e1 * (1.0 - math.sqrt(b.eta_w_sup) / (2.0 * r1)
                 - (8.0 * l4 * b.rho_sup / (_PI4 * b.EI_inf))
                 * (b.a_w / r4 + b.b_w / r5 + b.g_w / (sq_rho * r3)))
    lam2 = (b.g_w
            + (sq_rho_geo * b.a_w + e2 * b.Iw_sup * b.g_phi) / (2.0 * math.sqrt(b.rho_inf) * r6)
            + e1 * sq_rho * b.g_w * r3 / 2.0
            + (sq_rho * b.b_w / math.sqrt(b.Iw_inf)
               + sq_Iw * b.g_phi / math.sqrt(b.rho_inf)) / (2.0 * r7))
    lam3 = 1.0 - e1 * (16.0 * l4 * b.rho_sup / (_PI4 * b.etaEI_inf)
                       + math.sqrt(b.eta_w_sup) * r1 / 2.0)
    lam4 = (e2 * (1.0 - math.sqrt(b.eta_phi_sup) / (2.0 * r2))
            - (4.0 * l2 / (_PI2 * b.GJ_inf))
            * ((sq_rho_geo * b.a_w + e2 * b.Iw_sup * b.g_phi) * r6 / (2.0 * math.sqrt(b.rho_inf))
               + sq_Iw * (b.a_phi + e2 * b.b_phi) / (2.0 * r8)
               + e1 * b.rho_sup * b.a_w * r4 / 2.0
               + e2 * b.Iw_sup * b.a_phi))
    lam5 = (b.b_phi
            + (sq_rho * b.b_w / math.sqrt(b.Iw_inf)
               + sq_Iw * b.g_phi / math.sqrt(b.rho_inf)) * r7 / 2.0
            + sq_Iw * (b.a_phi + e2 * b.b_phi) * r8 / 2.0
            + e1 * b.rho_sup * b.b_w * r5 / (2.0 * b.Iw_inf))
    lam6 = 1.0 - e2 * (4.0 * l2 * b.Iw_sup / (_PI2 * b.etaGJ_inf)
                       + math.sqrt(b.eta_phi_sup) * r2 / 2.0)
    return lam1, lam2, lam3, lam4, lam5, lam6


def decay_margins(model: WingModel, params: CertificateParameters,
                  bounds: Optional[EssentialBounds] = None):
    """Bending/torsion decay margins paired with the lambdas.

    Returns (lambdas, c_bend, c_twist) with
    c_bend  = pi^4 etaEI_inf lam3 / (16 l^4 rho_sup) - lam2,
    c_twist = pi^2 etaGJ_inf lam6 / (4 l^2 Iw_sup)  - lam5.
    """
    b = bounds or EssentialBounds(model)
    lams = compute_lambdas(model, params, b)
    c_bend = _PI4 * b.etaEI_inf * lams[2] / (16.0 * b.l ** 4 * b.rho_sup) - lams[1]
    c_twist = _PI2 * b.etaGJ_inf * lams[5] / (4.0 * b.l ** 2 * b.Iw_sup) - lams[4]
    return lams, c_bend, c_twist


def constraint_vector(model: WingModel, params: CertificateParameters,
                      bounds: Optional[EssentialBounds] = None):
    """The eight inequality values (lambda_1..6, c_bend, c_twist)."""
    lams, c_bend, c_twist = decay_margins(model, params, bounds)
    return np.array(list(lams) + [c_bend, c_twist])


def certificate_margin(vec) -> float:
    """Feasibility margin of an inequality vector; certifies iff > 0.

    Strict positivity is required of lambda_1, lambda_3, lambda_4,
    lambda_6 and both decay margins. lambda_2 and lambda_5 are sums of
    nonnegative terms (they vanish identically when the coupling
    coefficients they weigh are zero) and participate through the decay
    margins, so they are only checked against going negative.
    """
    strict = min(vec[0], vec[2], vec[3], vec[5], vec[6], vec[7])
    guard = min(vec[1], vec[4])
    return float(min(strict, strict if guard >= 0.0 else guard))


def check_certificate(model: WingModel, params: CertificateParameters,
                      bounds: Optional[EssentialBounds] = None) -> bool:
    """True iff the certificate inequality system holds at `params`.

    Raises if the eps precondition 0 < eps_i < min(eps_i_star, 1/Km) fails,
    echoing the violated limit.
    """
    b = bounds or EssentialBounds(model)
    hi1, hi2 = eps_admissible_limits(model, b)
    if not params.eps1 < hi1:
        raise ValueError(f"eps1 = {params.eps1} must lie below min(eps1_star, 1/Km) = {hi1}")
    if not params.eps2 < hi2:
        raise ValueError(f"eps2 = {params.eps2} must lie below min(eps2_star, 1/Km) = {hi2}")
    return certificate_margin(constraint_vector(model, params, b)) > STRICTNESS


def decay_rate(model: WingModel, params: CertificateParameters,
               bounds: Optional[EssentialBounds] = None):
    """(mu_m, Lambda) at a certificate point; meaningful when feasible."""
    b = bounds or EssentialBounds(model)
    lams, c_bend, c_twist = decay_margins(model, params, b)
    mu_m = 2.0 * min(lams[0], c_bend, lams[3], c_twist)
    km = compute_Km(model, b)
    lam = mu_m / (1.0 + params.eps_max * km)
    return mu_m, lam


@dataclass
class UltimateBounds:
    """Long-run bounds under a bounded disturbance of given sup norms."""

    sup_U: float
    sup_Udot: float
    state: float      # limsup of the energy-space state norm
    bending: float    # limsup of ||w(., t)||_inf
    bending_slope: float
    twist: float      # limsup of ||phi(., t)||_inf


@dataclass
class CertificateReport:
    """Everything the feasibility search decided, in reproducible form.

    The stored essential bounds are sufficient to re-evaluate every
    constant from its closed form.
    """

    feasible: bool
    Km: float
    eps1_star: float
    eps2_star: float
    eps1_limit: float
    eps2_limit: float
    k1: float
    k2: float
    lambdas: tuple = ()
    c_bend: float = float("nan")
    c_twist: float = float("nan")
    margin: float = float("-inf")
    mu_m: float = float("nan")
    Lambda: float = float("nan")
    K_E: float = float("nan")
    norm_B: float = float("nan")
    norm_AdB: float = float("nan")
    witness_params: Optional[CertificateParameters] = None
    essential_bounds: dict = field(default_factory=dict)
    ultimate: Optional[UltimateBounds] = None
    seed: int = 0
    starts: int = SEARCH_STARTS
    iterations: int = SEARCH_ITERATIONS
    notes: tuple = (
        "aerodynamic coefficient units are a modeling choice; see model docs",
        "lambda formulas transcribed verbatim from their displayed closed forms",
    )


def _score(vec: np.ndarray, eps_max: float, km: float):
    """Search score: any certifying point beats any violating one."""
    margin = certificate_margin(vec)
    if margin > STRICTNESS:
        mu = 2.0 * min(vec[0], vec[6], vec[3], vec[7])
        return mu / (1.0 + eps_max * km), margin
    return margin - 1e6, margin


def _coordinate_descent(fun, x0, lo, hi, step0, iterations):
    """Box-constrained coordinate search with step halving; maximizes fun.

    Each sweep probes +/- step on every coordinate and keeps the better
    probe when it improves; the step halves after a sweep with no accepted
    move.
    """
    x = np.clip(np.array(x0, dtype=float), lo, hi)
    best = fun(x)
    step = np.array(step0, dtype=float)
    for _ in range(iterations):
        improved = False
        for i in range(x.size):
            cand_val, cand_x = best, None
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[i] = np.clip(trial[i] + sgn * step[i], lo[i], hi[i])
                if trial[i] == x[i]:
                    continue
                val = fun(trial)
                if val > cand_val:
                    cand_val, cand_x = val, trial
            if cand_x is not None:
                x, best = cand_x, cand_val
                improved = True
        if not improved:
            step *= SEARCH_SHRINK
            if np.all(step < 1e-14):
                break
    return x, best


def feasibility_search(model: WingModel, gains=(0.0, 0.0),
                       seed: int = 0, fixed_eps: Optional[tuple] = None,
                       starts: int = SEARCH_STARTS,
                       iterations: int = SEARCH_ITERATIONS) -> CertificateReport:
    """Maximize the certified decay rate over (r1..r8, eps1, eps2).

    Multistart coordinate search in log space; deterministic for a fixed
    seed. Gains k1, k2 do not enter the inequalities but are recorded and
    used for the input-operator norms. `fixed_eps` pins the feedback
    weights and searches the slack vector only.
    """
    b = EssentialBounds(model)
    km = compute_Km(model, b)
    e1s, e2s = compute_eps_stars(model, b)
    hi1, hi2 = min(e1s, 1.0 / km), min(e2s, 1.0 / km)
    if min(hi1, hi2) <= EPS_FLOOR:
        raise ValueError(
            f"admissible eps interval degenerates below the search floor "
            f"{EPS_FLOOR} (limits {hi1}, {hi2}); the internal damping is too "
            "small for any certifiable feedback weight")
    k1, k2 = float(gains[0]), float(gains[1])

    if fixed_eps is not None:
        fe1, fe2 = fixed_eps
        if not (0.0 < fe1 < hi1):
            raise ValueError(f"eps1 = {fe1} must lie in (0, {hi1})")
        if not (0.0 < fe2 < hi2):
            raise ValueError(f"eps2 = {fe2} must lie in (0, {hi2})")

    lo = np.array([math.log(R_BOX[0])] * 8
                  + [math.log(EPS_FLOOR)] * 2)
    hi = np.array([math.log(R_BOX[1])] * 8
                  + [math.log(hi1 * (1.0 - 1e-6)), math.log(hi2 * (1.0 - 1e-6))])
    if fixed_eps is not None:
        lo[8] = hi[8] = math.log(fixed_eps[0])
        lo[9] = hi[9] = math.log(fixed_eps[1])

    def params_of(x):
        v = np.exp(x)
        return CertificateParameters(tuple(v[:8]), float(v[8]), float(v[9]))

    def objective(x):
        p = params_of(x)
        return _score(constraint_vector(model, p, b), p.eps_max, km)[0]

    rng = np.random.default_rng(seed)
    width = hi - lo
    step0 = np.maximum(width / 8.0, 1e-12)
    # Structured starts pin the feedback weights at fixed fractions of their
    # admissible limits with unit slack; random starts draw the slack
    # log-uniformly over the box and the weights log-uniformly over the top
    # three decades (tiny eps always certifies but with a useless rate).
    eps_lo_start = np.maximum(lo[8:], hi[8:] - math.log(1e3))
    structured = [(0.5, 0.5), (0.25, 0.25), (0.75, 0.25), (0.25, 0.75),
                  (0.5, 0.125), (0.125, 0.5)]
    best_x, best_val = None, -np.inf
    for s in range(starts):
        x0 = lo + rng.random(lo.size) * width
        if s < len(structured):
            x0[:8] = 0.0  # unit slack
            frac = structured[s]
            x0[8] = hi[8] + math.log(frac[0])
            x0[9] = hi[9] + math.log(frac[1])
            x0 = np.clip(x0, lo, hi)
        else:
            x0[8:] = eps_lo_start + rng.random(2) * (hi[8:] - eps_lo_start)
        x, val = _coordinate_descent(objective, x0, lo, hi, step0, iterations)
        if val > best_val:
            best_x, best_val = x, val
    # local refinement from the incumbent with a fine initial step
    best_x, best_val = _coordinate_descent(objective, best_x, lo, hi,
                                           np.maximum(width / 256.0, 1e-13),
                                           iterations // 2)

    params = params_of(best_x)
    vec = constraint_vector(model, params, b)
    margin = certificate_margin(vec)
    feasible = margin > STRICTNESS
    report = CertificateReport(
        feasible=feasible, Km=km, eps1_star=e1s, eps2_star=e2s,
        eps1_limit=hi1, eps2_limit=hi2, k1=k1, k2=k2,
        lambdas=tuple(vec[:6]), c_bend=float(vec[6]), c_twist=float(vec[7]),
        margin=margin, essential_bounds=b.as_dict(),
        witness_params=params, seed=seed, starts=starts, iterations=iterations,
    )
    if feasible:
        mu_m, lam = decay_rate(model, params, b)
        report.mu_m = mu_m
        report.Lambda = lam
        em = params.eps_max
        report.K_E = math.sqrt((1.0 + km * em) / (1.0 - km * em))
        used_law = ControlLaw(k1, k2, params.eps1, params.eps2)
        report.norm_B = compute_norm_B(model, used_law)
        report.norm_AdB = compute_norm_AdB(model, used_law)
    return report


# -- input-operator norms ----------------------------------------------


def lift_denominators(model: WingModel, law: ControlLaw, panels: int = 96, points: int = 6):
    """b1 = 1 + k1 eps1 int (l-y)^2/EI, b2 = 1 + k2 eps2 int 1/GJ."""
    l = model.span
    I_EI = integrate(lambda y: (l - y) ** 2 / model.EI(y), 0.0, l, panels, points)
    I_GJ = integrate(lambda y: 1.0 / model.GJ(y), 0.0, l, panels, points)
    b1 = 1.0 + law.k1 * law.eps1 * I_EI
    b2 = 1.0 + law.k2 * law.eps2 * I_GJ
    return b1, b2, I_EI, I_GJ


def compute_norm_B(model: WingModel, law: ControlLaw, panels: int = 96, points: int = 6) -> float:
    """Operator norm of the boundary-input lift into the energy space."""
    b1, b2, I_EI, I_GJ = lift_denominators(model, law, panels, points)
    return max(math.sqrt(I_EI) / b1, math.sqrt(I_GJ) / b2)


def compute_norm_AdB(model: WingModel, law: ControlLaw, panels: int = 96, points: int = 6) -> float:
    """Norm of the generator applied to the lift; zero iff both twist-force
    couplings alpha_w, alpha_phi vanish."""
    b1, b2, _, _ = lift_denominators(model, law, panels, points)
    l = model.span
    inner = CumulativeIntegral(lambda y: 1.0 / model.GJ(y), l, panels, points)
    nodes, weights = gauss_panels(0.0, l, panels, points)
    g = inner.upto(nodes)
    dens = (model.rho(nodes) * model.alpha_w(nodes) ** 2
            + model.Iw(nodes) * model.alpha_phi(nodes) ** 2)
    val = float(np.dot(weights, dens * g ** 2))
    return math.sqrt(val) / b2


def ultimate_bounds(report: CertificateReport, sup_U: float, sup_Udot: float) -> UltimateBounds:
    """Limsup bounds on state norm and displacements under bounded inputs.

    state <= (||B|| + 2 K_E/Lambda ||AdB||) sup||U|| + (2 K_E/Lambda) ||B|| sup||dU/dt||;
    the displacement bounds chain through uniform-norm interpolation
    inequalities with prefactors 4 l^{3/2}/(pi^{3/2} EI_inf^{1/2}) (bending),
    2 l^{1/2}/(pi^{1/2} EI_inf^{1/2}) (bending slope) and
    2 l^{1/2}/(pi^{1/2} GJ_inf^{1/2}) (twist).
    """
    if not report.feasible:
        raise ValueError("ultimate bounds need a feasible certificate")
    if sup_U < 0 or sup_Udot < 0:
        raise ValueError("disturbance sup norms must be nonnegative")
    two_ke = 2.0 * report.K_E / report.Lambda
    state = (report.norm_B + two_ke * report.norm_AdB) * sup_U + two_ke * report.norm_B * sup_Udot
    l = report.essential_bounds["l"]
    ei = report.essential_bounds["EI_inf"]
    gj = report.essential_bounds["GJ_inf"]
    pref_f = 4.0 * l ** 1.5 / (math.pi ** 1.5 * math.sqrt(ei))
    pref_fp = 2.0 * math.sqrt(l) / (math.sqrt(math.pi) * math.sqrt(ei))
    pref_h = 2.0 * math.sqrt(l) / (math.sqrt(math.pi) * math.sqrt(gj))
    return UltimateBounds(sup_U, sup_Udot, state,
                          pref_f * state, pref_fp * state, pref_h * state)


def transient_state_bound(report: CertificateReport, initial_norm: float,
                          sup_U: float, sup_Udot: float, t):
    """Time-dependent bound on the state norm under a bounded disturbance.

    K_E ||X0 - B U(0)|| exp(-Lambda t / 2) plus the long-run terms; the
    convolution tails are bounded by 2/Lambda.
    """
    if not report.feasible:
        raise ValueError("transient bound needs a feasible certificate")
    ub = ultimate_bounds(report, sup_U, sup_Udot)
    t_arr = np.asarray(t, dtype=float)
    return report.K_E * initial_norm * np.exp(-0.5 * report.Lambda * t_arr) + ub.state
