"""Report and CSV writers.

Every file starts with a provenance header (tool version, config hash,
certified decay rate when one exists). Numbers are written with repr so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import os

import numpy as np

from . import __version__
from .certificates import CertificateReport


def provenance_lines(config_hash: str, Lambda=None, comment: str = "#"):
    lines = [f"{comment} flexwing {__version__}",
             f"{comment} config sha256: {config_hash}"]
    if Lambda is not None and np.isfinite(Lambda):
        lines.append(f"{comment} certificate Lambda: {_fmt(Lambda)} 1/s")
    return lines


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_certificate_report(path, report: CertificateReport, config_hash: str):
    """Machine-parsable key = value dump of every certificate constant."""
    lines = provenance_lines(config_hash, report.Lambda if report.feasible else None)
    kv = [("feasible", report.feasible),
          ("margin", report.margin),
          ("Km", report.Km),
          ("eps1_star", report.eps1_star),
          ("eps2_star", report.eps2_star),
          ("eps1_limit", report.eps1_limit),
          ("eps2_limit", report.eps2_limit),
          ("k1", report.k1),
          ("k2", report.k2)]
    if report.witness_params is not None:
        kv += [(f"r{i + 1}", v) for i, v in enumerate(report.witness_params.r)]
        kv += [("eps1", report.witness_params.eps1), ("eps2", report.witness_params.eps2)]
    kv += [(f"lambda{i + 1}", v) for i, v in enumerate(report.lambdas)]
    kv += [("c_bend", report.c_bend), ("c_twist", report.c_twist)]
    if report.feasible:
        kv += [("mu_m", report.mu_m), ("Lambda", report.Lambda), ("K_E", report.K_E),
               ("norm_B", report.norm_B), ("norm_AdB", report.norm_AdB)]
    if report.ultimate is not None:
        ub = report.ultimate
        kv += [("sup_U", ub.sup_U), ("sup_Udot", ub.sup_Udot),
               ("bound_state_norm", ub.state), ("bound_bending_sup", ub.bending),
               ("bound_bending_slope_sup", ub.bending_slope), ("bound_twist_sup", ub.twist)]
    kv += [(f"bound.{k}", v) for k, v in sorted(report.essential_bounds.items())]
    kv += [("search.seed", report.seed), ("search.starts", report.starts),
           ("search.iterations", report.iterations)]
    lines += [f"{k} = {_fmt(v)}" for k, v in kv]
    lines += [f"# note: {n}" for n in report.notes]
    _write(path, lines)


def parse_report(path) -> dict:
    """Read back a key = value report (provenance and notes skipped)."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if val in ("true", "false"):
                out[key] = val == "true"
            else:
                try:
                    out[key] = float(val)
                except ValueError:
                    out[key] = val
    return out


def write_trajectory_csv(path, traj, config_hash: str, Lambda=None):
    lines = provenance_lines(config_hash, Lambda)
    lines.append("t,E_H1,E_H2,w_tip,phi_tip,u1,u2")
    for i in range(traj.times.size):
        lines.append(",".join(_fmt(v) for v in (
            traj.times[i], traj.E[i], traj.E2[i], traj.w_tip[i], traj.phi_tip[i],
            traj.u1[i], traj.u2[i])))
    _write(path, lines)


def write_snapshots_csv(path, times, positions, matrix, config_hash: str, Lambda=None):
    """Field history: rows = times, columns = grid positions."""
    lines = provenance_lines(config_hash, Lambda)
    lines.append("t," + ",".join(_fmt(p) for p in positions))
    for i, t in enumerate(times):
        lines.append(_fmt(t) + "," + ",".join(_fmt(v) for v in matrix[i]))
    _write(path, lines)


def write_verification_report(path, checks, config_hash: str, Lambda=None):
    lines = provenance_lines(config_hash, Lambda)
    n_fail = sum(1 for c in checks if c.status == "fail")
    lines.append(f"checks = {len(checks)}")
    lines.append(f"failures = {n_fail}")
    for c in checks:
        lines.append(f"{c.name}.status = {c.status}")
        lines.append(f"{c.name}.residual = {_fmt(c.residual)}")
        lines.append(f"{c.name}.tolerance = {_fmt(c.tolerance)}")
        if c.detail:
            lines.append(f"# {c.name}: {c.detail}")
    _write(path, lines)


def write_convergence_table(path, spatial_rows, temporal_rows, exact_error,
                            config_hash: str):
    """Tabulated refinement study.

    spatial_rows: (elements, energy_error, observed_order or nan)
    temporal_rows: (dt, tip_trace_error, observed_order or nan)
    """
    lines = provenance_lines(config_hash)
    lines.append("table = spatial")
    lines.append("elements,energy_norm_error,observed_order")
    for n, err, order in spatial_rows:
        lines.append(f"{n},{_fmt(err)},{_fmt(order) if np.isfinite(order) else 'nan'}")
    lines.append("table = temporal")
    lines.append("dt_s,tip_trace_rel_l2_error,observed_order")
    for dt, err, order in temporal_rows:
        lines.append(f"{_fmt(dt)},{_fmt(err)},{_fmt(order) if np.isfinite(order) else 'nan'}")
    lines.append(f"constant_coefficient_static_error = {_fmt(exact_error)}")
    _write(path, lines)


def _write(path, lines):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
