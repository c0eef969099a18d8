import os

import numpy as np
import pytest

from flexwing import cli
from flexwing.config import SCENARIOS, ConfigError, parse_config
from flexwing.reporting import parse_report


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(args):
    return cli.main(args)


def load_csv(path):
    with open(path) as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    return np.array([[float(v) for v in ln.split(",")] for ln in rows[1:]])


# -- config parsing -------------------------------------------------------

def test_parse_default_scenario():
    cfg = parse_config(SCENARIOS["default-certify"])
    assert cfg.scenario == "default-certify"
    assert cfg.model.span == 2.0
    assert cfg.eps_auto
    assert cfg.disturbance.kind == "persistent"


def test_unknown_key_rejected():
    bad = SCENARIOS["zero"].replace("[mesh]", "[mesh]\nbananas = 7")
    with pytest.raises(ConfigError, match="bananas"):
        parse_config(bad)


def test_unknown_section_rejected():
    bad = SCENARIOS["zero"] + "\n[turbo]\nboost = 1\n"
    with pytest.raises(ConfigError, match="turbo"):
        parse_config(bad)


def test_bad_profile_rejected():
    bad = SCENARIOS["zero"].replace("rho_kg_per_m = linear 10.0 7.0",
                                    "rho_kg_per_m = wavelet 3")
    with pytest.raises(ConfigError, match="rho_kg_per_m"):
        parse_config(bad)


def test_missing_span_rejected():
    bad = SCENARIOS["zero"].replace("span_m = 2.0\n", "")
    with pytest.raises(ConfigError, match="span_m"):
        parse_config(bad)


def test_bad_disturbance_kind_rejected():
    bad = SCENARIOS["zero"].replace("kind = zero", "kind = gusts", 1)
    with pytest.raises(ConfigError, match="gusts"):
        parse_config(bad)


def test_pwl_profile_parses():
    cfg_text = SCENARIOS["zero"].replace(
        "rho_kg_per_m = linear 10.0 7.0",
        "rho_kg_per_m = pwl 0.0:10.0 1.0:8.0 2.0:7.0")
    cfg = parse_config(cfg_text)
    assert cfg.model.rho(1.0) == pytest.approx(8.0)


def test_demo_scenario_config_matches_library_model():
    from flexwing.model import flutter_prone_model
    cfg = parse_config(SCENARIOS["demo-open-loop"])
    ref = flutter_prone_model()
    ys = np.linspace(0.0, ref.span, 9)
    for name in ("rho", "Iw", "EI", "GJ", "eta_w", "eta_phi",
                 "alpha_w", "beta_w", "gamma_w", "alpha_phi", "beta_phi", "gamma_phi"):
        assert np.allclose(getattr(cfg.model, name)(ys), getattr(ref, name)(ys),
                           rtol=1e-12), name
    assert cfg.model.m_s == ref.m_s and cfg.model.J_s == ref.J_s


# -- certify ----------------------------------------------------------------

def test_certify_default_feasible(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIOS["default-certify"])
    out = str(tmp_path / "out")
    assert run_cli(["certify", "--config", cfg, "--out", out]) == cli.EXIT_OK
    rep = parse_report(os.path.join(out, "certificate_report.txt"))
    assert rep["feasible"] is True
    assert rep["Lambda"] > 0
    assert rep["bound_state_norm"] > 0  # ultimate bounds present


def test_certify_heavy_aero_infeasible(tmp_path):
    text = SCENARIOS["default-certify"].replace(
        "alpha_w_per_s2 = constant 0.05", "alpha_w_per_s2 = constant 50000.0")
    cfg = write_cfg(tmp_path, text)
    out = str(tmp_path / "out")
    assert run_cli(["certify", "--config", cfg, "--out", out]) == cli.EXIT_INFEASIBLE
    rep = parse_report(os.path.join(out, "certificate_report.txt"))
    assert rep["feasible"] is False
    assert rep["margin"] < 0


def test_certify_eps_above_limit_rejected(tmp_path, capsys):
    text = SCENARIOS["default-certify"].replace(
        "eps = auto", "eps1 = 0.5\neps2 = 0.1")  # eps1 far above the limit
    cfg = write_cfg(tmp_path, text)
    out = str(tmp_path / "out")
    assert run_cli(["certify", "--config", cfg, "--out", out]) == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "eps1" in err and "0.5" in err  # echoes the offending value and bound


def test_certify_zero_aero_feasible(tmp_path):
    text = SCENARIOS["default-certify"]
    for key in ("alpha_w_per_s2", "beta_w_per_s", "gamma_w_per_s",
                "alpha_phi_per_s2", "beta_phi_per_s", "gamma_phi_per_s"):
        import re
        text = re.sub(rf"{key} = constant [-0-9.]+", f"{key} = constant 0.0", text)
    cfg = write_cfg(tmp_path, text)
    out = str(tmp_path / "out")
    assert run_cli(["certify", "--config", cfg, "--out", out]) == cli.EXIT_OK


# -- simulate ----------------------------------------------------------------

def test_simulate_zero_scenario_flat(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIOS["zero"])
    out = str(tmp_path / "out")
    assert run_cli(["simulate", "--config", cfg, "--out", out]) == cli.EXIT_OK
    data = load_csv(os.path.join(out, "trajectory.csv"))
    assert np.all(data[:, 1:] == 0.0)
    for fn in ("trajectory.csv", "bending_snapshots.csv", "twist_snapshots.csv",
               "energy.svg", "bending_snapshots.svg", "twist_snapshots.svg",
               "tip_traces.svg"):
        assert os.path.exists(os.path.join(out, fn))


def test_simulate_outputs_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIOS["demo-closed-loop-perturbed"]
                    .replace("t_end_s = 40.0", "t_end_s = 1.0"))
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert run_cli(["simulate", "--config", cfg, "--out", out1]) == cli.EXIT_OK
    assert run_cli(["simulate", "--config", cfg, "--out", out2]) == cli.EXIT_OK
    for fn in ("trajectory.csv", "bending_snapshots.csv", "twist_snapshots.csv"):
        a = open(os.path.join(out1, fn), "rb").read()
        b = open(os.path.join(out2, fn), "rb").read()
        assert a == b


def test_simulate_requires_mild_flag_for_incompatible_ic(tmp_path, capsys):
    text = SCENARIOS["demo-closed-loop-perturbed"].replace(
        "mild_solution = true", "mild_solution = false").replace(
        "t_end_s = 40.0", "t_end_s = 0.5")
    cfg = write_cfg(tmp_path, text)
    out = str(tmp_path / "out")
    assert run_cli(["simulate", "--config", cfg, "--out", out]) == cli.EXIT_USAGE
    assert "--mild-solution" in capsys.readouterr().err
    # explicit flag overrides
    assert run_cli(["simulate", "--config", cfg, "--out", out,
                    "--mild-solution"]) == cli.EXIT_OK


def test_simulate_divergence_exit_code(tmp_path, monkeypatch):
    from flexwing import simulation as sim

    def boom(*a, **k):
        raise sim.SimulationDiverged(7, 0.007)

    monkeypatch.setattr(sim, "simulate", boom)
    cfg = write_cfg(tmp_path, SCENARIOS["zero"])
    out = str(tmp_path / "out")
    assert run_cli(["simulate", "--config", cfg, "--out", out]) == cli.EXIT_DIVERGED


def test_provenance_headers_everywhere(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIOS["zero"])
    out = str(tmp_path / "out")
    run_cli(["simulate", "--config", cfg, "--out", out])
    for fn in os.listdir(out):
        with open(os.path.join(out, fn), "r", encoding="utf-8") as fh:
            head = fh.read(400)
        assert "flexwing 0.1.0" in head, fn
        assert "config sha256" in head, fn


# -- verify ----------------------------------------------------------------

def test_verify_default_passes(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIOS["default-certify"])
    out = str(tmp_path / "out")
    assert run_cli(["verify", "--config", cfg, "--out", out]) == cli.EXIT_OK
    rep = parse_report(os.path.join(out, "verification_report.txt"))
    assert rep["failures"] == 0
    assert rep["boundary-lift-identity.status"] == "pass"


def test_verify_skips_witness_without_torsion_gain(tmp_path):
    text = SCENARIOS["default-certify"].replace("k2 = 4.0", "k2 = 0.0")
    cfg = write_cfg(tmp_path, text)
    out = str(tmp_path / "out")
    assert run_cli(["verify", "--config", cfg, "--out", out]) == cli.EXIT_OK
    rep = parse_report(os.path.join(out, "verification_report.txt"))
    assert rep["witness-unit-value.status"] == "skip"


def test_verify_rejects_open_loop(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SCENARIOS["demo-open-loop"])
    out = str(tmp_path / "out")
    assert run_cli(["verify", "--config", cfg, "--out", out]) == cli.EXIT_USAGE


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    from flexwing import verification as verif
    real = verif.run_verification

    def rigged(*a, **k):
        checks = real(*a, **k)
        checks[0] = verif.Check(checks[0].name, "fail", 1.0, 0.0, "rigged")
        return checks

    monkeypatch.setattr(cli.verif, "run_verification", rigged)
    cfg = write_cfg(tmp_path, SCENARIOS["default-certify"])
    out = str(tmp_path / "out")
    assert run_cli(["verify", "--config", cfg, "--out", out]) == cli.EXIT_VERIFY_FAILED


# -- converge ----------------------------------------------------------------

def test_converge_orders(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIOS["default-certify"])
    out = str(tmp_path / "out")
    assert run_cli(["converge", "--config", cfg, "--out", out]) == cli.EXIT_OK
    text = open(os.path.join(out, "convergence.txt")).read()
    assert "table = spatial" in text and "table = temporal" in text
    # parse observed orders from the spatial rows
    lines = [ln for ln in text.splitlines() if ln and ln[0].isdigit()]
    spатial = None
    orders = []
    for ln in lines:
        parts = ln.split(",")
        if len(parts) == 3 and parts[2] != "nan":
            orders.append(float(parts[2]))
    assert all(o >= 1.9 for o in orders)


def test_usage_error_on_bad_config_path():
    assert run_cli(["certify", "--config", "/nonexistent.cfg",
                    "--out", "/tmp/x"]) == cli.EXIT_USAGE


def test_usage_error_on_unparsable_config(tmp_path):
    cfg = write_cfg(tmp_path, "this is not a config\n")
    assert run_cli(["certify", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_USAGE
