import math

import numpy as np
import pytest

from flexwing import certificates as cert
from flexwing.model import ControlLaw, default_model
from flexwing.profiles import SpatialProfile

PI2 = math.pi ** 2
PI4 = math.pi ** 4


def unit_model(l=1.0):
    c = lambda v: SpatialProfile.constant(v, l)
    return default_model().replace(
        span=l, rho=c(1.0), Iw=c(1.0), EI=c(1.0), GJ=c(1.0),
        eta_w=c(1.0), eta_phi=c(1.0),
        alpha_w=c(0.0), beta_w=c(0.0), gamma_w=c(0.0),
        alpha_phi=c(0.0), beta_phi=c(0.0), gamma_phi=c(0.0))


def zero_aero(model):
    z = SpatialProfile.constant(0.0, model.span)
    return model.replace(alpha_w=z, beta_w=z, gamma_w=z,
                         alpha_phi=z, beta_phi=z, gamma_phi=z)


# -- independent re-implementation of the certificate algebra ------------
# Straight transcription working from a dict of scalar bounds; kept
# deliberately separate from the library code paths.

def lambdas_oracle(b, r, e1, e2):
    l4 = b["l"] ** 4
    l2 = b["l"] ** 2
    out = {}
    out[1] = e1 * (1 - math.sqrt(b["eta_w_sup"]) / (2 * r[1])
                   - (8 * l4 * b["rho_sup"] / (PI4 * b["EI_inf"]))
                   * (b["a_w"] / r[4] + b["b_w"] / r[5]
                      + b["g_w"] / (math.sqrt(b["rho_sup"]) * r[3])))
    out[2] = (b["g_w"]
              + (math.sqrt(b["rho_sup"] * b["rho_inf"]) * b["a_w"]
                 + e2 * b["Iw_sup"] * b["g_phi"]) / (2 * math.sqrt(b["rho_inf"]) * r[6])
              + e1 * math.sqrt(b["rho_sup"]) * b["g_w"] * r[3] / 2
              + (math.sqrt(b["rho_sup"]) * b["b_w"] / math.sqrt(b["Iw_inf"])
                 + math.sqrt(b["Iw_sup"]) * b["g_phi"] / math.sqrt(b["rho_inf"])) / (2 * r[7]))
    out[3] = 1 - e1 * (16 * l4 * b["rho_sup"] / (PI4 * b["etaEI_inf"])
                       + math.sqrt(b["eta_w_sup"]) * r[1] / 2)
    out[4] = (e2 * (1 - math.sqrt(b["eta_phi_sup"]) / (2 * r[2]))
              - (4 * l2 / (PI2 * b["GJ_inf"]))
              * ((math.sqrt(b["rho_sup"] * b["rho_inf"]) * b["a_w"]
                  + e2 * b["Iw_sup"] * b["g_phi"]) * r[6] / (2 * math.sqrt(b["rho_inf"]))
                 + math.sqrt(b["Iw_sup"]) * (b["a_phi"] + e2 * b["b_phi"]) / (2 * r[8])
                 + e1 * b["rho_sup"] * b["a_w"] * r[4] / 2
                 + e2 * b["Iw_sup"] * b["a_phi"]))
    out[5] = (b["b_phi"]
              + (math.sqrt(b["rho_sup"]) * b["b_w"] / math.sqrt(b["Iw_inf"])
                 + math.sqrt(b["Iw_sup"]) * b["g_phi"] / math.sqrt(b["rho_inf"])) * r[7] / 2
              + math.sqrt(b["Iw_sup"]) * (b["a_phi"] + e2 * b["b_phi"]) * r[8] / 2
              + e1 * b["rho_sup"] * b["b_w"] * r[5] / (2 * b["Iw_inf"]))
    out[6] = 1 - e2 * (4 * l2 * b["Iw_sup"] / (PI2 * b["etaGJ_inf"])
                       + math.sqrt(b["eta_phi_sup"]) * r[2] / 2)
    return [out[i] for i in range(1, 7)]


def test_Km_unit_profiles():
    m = unit_model(1.0)
    expected = max(1.0, 16.0 / PI4, 1.0, 4.0 / PI2)
    assert cert.compute_Km(m) == pytest.approx(expected, abs=1e-15)
    assert expected == 1.0  # 16/pi^4 ~ 0.1642, 4/pi^2 ~ 0.4053


def test_Km_span_two():
    m = unit_model(2.0)
    assert cert.compute_Km(m) == pytest.approx(256.0 / PI4, rel=1e-14)


def test_Km_stiffness_scaling():
    m = unit_model(2.0)
    b1 = cert.EssentialBounds(m)
    b4 = cert.EssentialBounds(m.stiffness_scaled(4.0))
    # sqrt terms unchanged, stiffness-divided terms shrink four-fold
    t1 = 16 * 16 * math.sqrt(b1.rho_sup) / (PI4 * b1.EI_inf)
    t4 = 16 * 16 * math.sqrt(b4.rho_sup) / (PI4 * b4.EI_inf)
    assert t4 == pytest.approx(t1 / 4.0, rel=1e-14)
    assert b4.rho_sup == b1.rho_sup


def test_eps_stars_unit_profiles():
    m = unit_model(1.0)
    e1s, e2s = cert.compute_eps_stars(m)
    assert e1s == pytest.approx(4 * PI4 / (64 + PI4), rel=1e-14)
    assert e2s == pytest.approx(4 * PI2 / (16 + PI2), rel=1e-14)


def test_eps2_star_stiff_torsion_limit():
    # as inf(eta_phi GJ) grows with eta_phi_sup fixed, eps2* -> 4/eta_phi_sup
    m = unit_model(1.0)
    big = m.replace(GJ=SpatialProfile.constant(1e9, 1.0))
    _, e2s = cert.compute_eps_stars(big)
    assert e2s == pytest.approx(4.0, rel=1e-6)


def test_lambdas_zero_aero_case():
    m = zero_aero(unit_model(1.0))
    params = cert.CertificateParameters((1.0,) * 8, 0.1, 0.1)
    lams = cert.compute_lambdas(m, params)
    assert lams[1] == 0.0  # every term carries an aero factor
    assert lams[4] == 0.0
    assert lams[2] == pytest.approx(1.0 - 0.1 * (16.0 / PI4 + 0.5), rel=1e-14)


def test_lambdas_match_independent_transcription(model, certificate):
    params = certificate.witness_params
    b = cert.EssentialBounds(model).as_dict()
    r = {i + 1: params.r[i] for i in range(8)}
    expected = lambdas_oracle(b, r, params.eps1, params.eps2)
    got = cert.compute_lambdas(model, params)
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-15)


def test_report_is_self_describing(certificate):
    # reported lambdas reproducible from the stored essential bounds alone
    params = certificate.witness_params
    r = {i + 1: params.r[i] for i in range(8)}
    expected = lambdas_oracle(certificate.essential_bounds, r, params.eps1, params.eps2)
    assert np.allclose(certificate.lambdas, expected, rtol=1e-12, atol=1e-15)


def test_check_zero_aero_small_eps_large_r():
    m = zero_aero(default_model())
    params = cert.CertificateParameters((10.0,) * 8, 1e-3, 1e-3)
    assert cert.check_certificate(m, params) is True


def test_check_eps_precondition_reported():
    m = default_model()
    hi1, _ = cert.eps_admissible_limits(m)
    params = cert.CertificateParameters((1.0,) * 8, hi1 * 1.01, 1e-3)
    with pytest.raises(ValueError, match="eps1"):
        cert.check_certificate(m, params)


def test_heavy_aero_infeasible_on_grid():
    m = default_model().replace(alpha_w=SpatialProfile.constant(5e4, 2.0))
    hi1, hi2 = cert.eps_admissible_limits(m)
    grid = np.geomspace(1e-3, 1e3, 7)
    found = False
    for r_common in grid:
        for e1 in np.geomspace(1e-6, hi1 * 0.999, 5):
            for e2 in np.geomspace(1e-6, hi2 * 0.999, 5):
                p = cert.CertificateParameters((r_common,) * 8, e1, e2)
                if cert.check_certificate(m, p):
                    found = True
    assert not found
    rep = cert.feasibility_search(m, seed=0, starts=4, iterations=60)
    assert rep.feasible is False
    assert rep.margin < 0


def test_feasibility_default_model(certificate):
    assert certificate.feasible is True
    assert certificate.Lambda > 0
    assert certificate.K_E >= 1.0
    assert certificate.witness_params.eps_max * certificate.Km < 1.0
    vec = list(certificate.lambdas) + [certificate.c_bend, certificate.c_twist]
    assert min(vec) > 0


def test_feasibility_zero_aero():
    rep = cert.feasibility_search(zero_aero(default_model()), seed=0,
                                  starts=6, iterations=80)
    assert rep.feasible is True
    assert rep.Lambda > 0


def test_feasibility_zero_aero_grid_cross_check():
    # an independent coarse grid scan also finds certifying points
    m = zero_aero(default_model())
    hi1, hi2 = cert.eps_admissible_limits(m)
    hits = 0
    for r_common in np.geomspace(1e-2, 1e2, 5):
        for e1 in np.geomspace(1e-4, hi1 * 0.99, 4):
            for e2 in np.geomspace(1e-4, hi2 * 0.99, 4):
                p = cert.CertificateParameters((r_common,) * 8, e1, e2)
                if cert.check_certificate(m, p):
                    hits += 1
    assert hits > 0


def test_reported_rate_internally_consistent(model, certificate):
    lams = certificate.lambdas
    mu = 2.0 * min(lams[0], certificate.c_bend, lams[3], certificate.c_twist)
    lam = mu / (1.0 + certificate.witness_params.eps_max * certificate.Km)
    assert certificate.mu_m == pytest.approx(mu, rel=1e-12)
    assert certificate.Lambda == pytest.approx(lam, rel=1e-12)


def test_stiffness_monotonicity(model):
    for c in (1.0, 2.0, 4.0, 8.0):
        rep = cert.feasibility_search(model.stiffness_scaled(c), gains=(10.0, 4.0),
                                      seed=0, starts=6, iterations=80)
        assert rep.feasible, f"stiffness factor {c} lost feasibility"


def test_norm_B_unit_profiles_no_feedback():
    m = unit_model(1.0)
    law = ControlLaw(0.0, 0.0, 0.1, 0.1)
    # branches sqrt(1/3) and 1
    assert cert.compute_norm_B(m, law) == pytest.approx(1.0, abs=1e-12)


def test_norm_B_torsion_feedback_discount():
    m = unit_model(1.0)
    law = ControlLaw(0.0, 30.0, 0.1, 0.1)  # k2 eps2 = 3, b2 = 4
    # second branch 1/4, first branch sqrt(1/3)
    assert cert.compute_norm_B(m, law) == pytest.approx(math.sqrt(1.0 / 3.0), abs=1e-12)


def test_norm_B_monotone_in_EI():
    m = unit_model(1.0)
    law = ControlLaw(1.0, 0.0, 0.1, 0.1)
    stiffer = m.replace(EI=SpatialProfile.constant(2.0, 1.0))
    b1a, _, ia, _ = cert.lift_denominators(m, law)
    b1b, _, ib, _ = cert.lift_denominators(stiffer, law)
    assert math.sqrt(ib) / b1b < math.sqrt(ia) / b1a


def test_norm_AdB_zero_twist_force_couplings():
    m = zero_aero(default_model())
    law = ControlLaw(10.0, 4.0, 0.01, 0.01)
    assert cert.compute_norm_AdB(m, law) == 0.0


def test_norm_AdB_unit_case():
    m = unit_model(1.0).replace(alpha_w=SpatialProfile.constant(1.0, 1.0),
                                alpha_phi=SpatialProfile.constant(1.0, 1.0))
    law = ControlLaw(0.0, 0.0, 0.1, 0.1)
    # integrand (1+1) * y^2 -> sqrt(2/3)
    assert cert.compute_norm_AdB(m, law) == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)


def test_norms_stable_under_quadrature_refinement(model, certified_law):
    nb = cert.compute_norm_B(model, certified_law, panels=96)
    nb2 = cert.compute_norm_B(model, certified_law, panels=192)
    assert abs(nb - nb2) < 1e-8
    na = cert.compute_norm_AdB(model, certified_law, panels=96)
    na2 = cert.compute_norm_AdB(model, certified_law, panels=192)
    assert abs(na - na2) < 1e-8


def test_ultimate_bounds_zero_disturbance(certificate):
    ub = cert.ultimate_bounds(certificate, 0.0, 0.0)
    assert ub.state == 0.0
    assert ub.bending == 0.0
    assert ub.twist == 0.0


def test_ultimate_bounds_linear_scaling(certificate):
    a = cert.ultimate_bounds(certificate, 1.0, 2.0)
    b = cert.ultimate_bounds(certificate, 3.0, 6.0)
    assert b.state == pytest.approx(3.0 * a.state, rel=1e-12)
    assert b.bending == pytest.approx(3.0 * a.bending, rel=1e-12)


def test_ultimate_bounds_reproduced_from_report(certificate):
    # independent evaluation of the bound formula from reported constants
    sup_u = math.sqrt(10.0)
    sup_ud = 4.2 * math.pi * math.sqrt(10.0)
    ub = cert.ultimate_bounds(certificate, sup_u, sup_ud)
    two_ke = 2.0 * certificate.K_E / certificate.Lambda
    state = ((certificate.norm_B + two_ke * certificate.norm_AdB) * sup_u
             + two_ke * certificate.norm_B * sup_ud)
    assert ub.state == pytest.approx(state, rel=1e-12)
    assert np.isfinite(ub.state) and ub.state > 0
    l = certificate.essential_bounds["l"]
    ei = certificate.essential_bounds["EI_inf"]
    assert ub.bending == pytest.approx(4 * l ** 1.5 / (math.pi ** 1.5 * math.sqrt(ei)) * state,
                                       rel=1e-12)


def test_ultimate_bounds_need_feasible_certificate():
    m = default_model().replace(alpha_w=SpatialProfile.constant(5e4, 2.0))
    rep = cert.feasibility_search(m, seed=0, starts=2, iterations=40)
    with pytest.raises(ValueError):
        cert.ultimate_bounds(rep, 1.0, 1.0)


def test_fixed_eps_search_validates_box():
    m = default_model()
    hi1, _ = cert.eps_admissible_limits(m)
    with pytest.raises(ValueError, match="eps1"):
        cert.feasibility_search(m, fixed_eps=(hi1 * 2.0, 1e-3))


def test_search_deterministic(model):
    a = cert.feasibility_search(model, gains=(10.0, 4.0), seed=0, starts=4, iterations=60)
    b = cert.feasibility_search(model, gains=(10.0, 4.0), seed=0, starts=4, iterations=60)
    assert a.Lambda == b.Lambda
    assert a.witness_params.r == b.witness_params.r


def test_search_rejects_degenerate_eps_interval():
    m = default_model()
    tiny = SpatialProfile.constant(1e-12, m.span)
    with pytest.raises(ValueError, match="degenerates"):
        cert.feasibility_search(m.replace(eta_w=tiny, eta_phi=tiny))


def test_search_consistent_on_random_tapered_models():
    # whatever the search returns must satisfy its own contracts
    rng = np.random.default_rng(17)
    for _ in range(6):
        l = rng.uniform(1.0, 3.0)
        taper = rng.uniform(0.5, 1.0)
        m = default_model().replace(
            span=l,
            rho=SpatialProfile.linear(rng.uniform(2, 20), rng.uniform(2, 20) * taper, l),
            Iw=SpatialProfile.linear(rng.uniform(0.2, 2), rng.uniform(0.2, 2) * taper, l),
            EI=SpatialProfile.linear(rng.uniform(50, 500), rng.uniform(50, 500) * taper, l),
            GJ=SpatialProfile.linear(rng.uniform(30, 300), rng.uniform(30, 300) * taper, l),
            eta_w=SpatialProfile.constant(rng.uniform(0.005, 0.05), l),
            eta_phi=SpatialProfile.constant(rng.uniform(0.005, 0.05), l),
            alpha_w=SpatialProfile.constant(rng.uniform(-0.05, 0.05), l),
            beta_w=SpatialProfile.constant(rng.uniform(-0.02, 0.02), l),
            gamma_w=SpatialProfile.constant(rng.uniform(-0.01, 0.01), l),
            alpha_phi=SpatialProfile.constant(rng.uniform(-0.1, 0.1), l),
            beta_phi=SpatialProfile.constant(rng.uniform(-0.1, 0.1), l),
            gamma_phi=SpatialProfile.constant(rng.uniform(-0.05, 0.05), l))
        rep = cert.feasibility_search(m, gains=(5.0, 2.0), seed=0,
                                      starts=4, iterations=60)
        if not rep.feasible:
            continue
        p = rep.witness_params
        assert cert.check_certificate(m, p)
        assert p.eps1 < rep.eps1_limit and p.eps2 < rep.eps2_limit
        mu, lam = cert.decay_rate(m, p)
        assert rep.Lambda == pytest.approx(lam, rel=1e-12)
        assert rep.K_E >= 1.0


def test_transient_bound_settles_to_ultimate(certificate):
    ub = cert.ultimate_bounds(certificate, 2.0, 3.0)
    bound = cert.transient_state_bound(certificate, 1.5, 2.0, 3.0,
                                       np.array([0.0, 1.0, 1e6]))
    assert bound[0] == pytest.approx(certificate.K_E * 1.5 + ub.state, rel=1e-12)
    assert bound[1] < bound[0]
    assert bound[2] == pytest.approx(ub.state, rel=1e-12)
