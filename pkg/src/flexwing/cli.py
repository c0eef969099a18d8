"""Batch command-line front end.

    flexwing certify   --config cfg --out dir [--seed N]
    flexwing simulate  --config cfg --out dir [--seed N] [--mild-solution]
    flexwing verify    --config cfg --out dir [--seed N]
    flexwing converge  --config cfg --out dir [--seed N]

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
certificate, 3 verification failure, 4 simulation divergence.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import certificates as cert
from . import fem, plots, reporting
from . import simulation as sim
from . import verification as verif
from .config import ConfigError, RunConfig, load_config
from .model import ControlLaw
from .quadrature import cheb_derivative
from .verification import FieldFn, LiftedState

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY_FAILED = 3
EXIT_DIVERGED = 4


def _resolve_law(cfg: RunConfig, seed: int):
    """Control law and (optional) certificate for a closed-loop run.

    `eps = auto` takes the feasibility-search optimum; explicit eps values
    are validated against the admissible box and certified with the slack
    search only.
    """
    if cfg.mode == "open-loop":
        return None, None
    gains = (cfg.k1, cfg.k2)
    if cfg.eps_auto:
        report = cert.feasibility_search(cfg.model, gains, seed=seed)
        if not report.feasible:
            return None, report
        p = report.witness_params
        return ControlLaw(cfg.k1, cfg.k2, p.eps1, p.eps2), report
    law = cfg.law
    try:
        report = cert.feasibility_search(cfg.model, gains, seed=seed,
                                         fixed_eps=(law.eps1, law.eps2))
    except ValueError:
        report = None  # eps outside the certified box: run uncertified
    return law, report


def _initial_state_boundary_data(cfg: RunConfig, law: ControlLaw):
    """Tip boundary data carried by the initial condition fields."""
    l = cfg.model.span
    ic = cfg.initial
    st = LiftedState(
        l,
        FieldFn(ic.w0, ic.slope_w0(l), cheb_derivative(ic.w0, 0.0, l, order=2)),
        FieldFn(ic.wt0, ic.slope_wt0(l), cheb_derivative(ic.wt0, 0.0, l, order=2)),
        FieldFn(ic.phi0, cheb_derivative(ic.phi0, 0.0, l, order=1)),
        FieldFn(ic.phit0, cheb_derivative(ic.phit0, 0.0, l, order=1)),
    )
    return verif.boundary_functional(cfg.model, law, st)


def cmd_certify(cfg: RunConfig, out: str, seed: int) -> int:
    gains = (cfg.k1, cfg.k2)
    try:
        if cfg.eps_auto or cfg.law is None:
            report = cert.feasibility_search(cfg.model, gains, seed=seed)
        else:
            report = cert.feasibility_search(cfg.model, gains, seed=seed,
                                             fixed_eps=(cfg.law.eps1, cfg.law.eps2))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report.feasible and cfg.disturbance.sup_U < np.inf:
        report.ultimate = cert.ultimate_bounds(report, cfg.disturbance.sup_U,
                                               cfg.disturbance.sup_Udot)
    path = os.path.join(out, "certificate_report.txt")
    reporting.write_certificate_report(path, report, cfg.config_hash)
    if report.feasible:
        print(f"certificate feasible: Lambda = {report.Lambda:.6g} 1/s "
              f"(eps1 = {report.witness_params.eps1:.6g}, eps2 = {report.witness_params.eps2:.6g})")
        print(f"report written to {path}")
        return EXIT_OK
    print(f"certificate infeasible: best margin = {report.margin:.6g}")
    print(f"report written to {path}")
    return EXIT_INFEASIBLE


def cmd_simulate(cfg: RunConfig, out: str, seed: int, mild_flag: bool) -> int:
    law, report = _resolve_law(cfg, seed)
    if cfg.mode == "closed-loop" and law is None:
        print(f"error: eps = auto but the certificate search is infeasible "
              f"(margin {report.margin:.6g}); set eps1/eps2 explicitly", file=sys.stderr)
        return EXIT_INFEASIBLE
    if cfg.mode == "closed-loop" and report is None:
        print("note: eps1/eps2 lie outside the certified box; simulating "
              "without a decay certificate", file=sys.stderr)
    mild = mild_flag or cfg.mild_solution
    if cfg.mode == "closed-loop" and not mild:
        bdata = _initial_state_boundary_data(cfg, law)
        u0 = cfg.disturbance.U(0.0)
        res = float(np.max(np.abs(bdata - u0)))
        if res > 1e-6 * (1.0 + float(np.max(np.abs(u0)))):
            print("error: initial condition is incompatible with the boundary "
                  f"data at t = 0 (residual {res:.3g}); classic-solution semantics "
                  "do not apply. Pass --mild-solution to integrate anyway.",
                  file=sys.stderr)
            return EXIT_USAGE

    mesh = fem.Mesh.uniform(cfg.model.span, cfg.elements)
    system = fem.assemble(cfg.model, law, mesh, cfg.mode)
    scfg = sim.SimulationConfig(t_end=cfg.t_end, dt=cfg.dt, integrator=cfg.integrator,
                                output_stride=cfg.output_stride)
    try:
        traj = sim.simulate(system, cfg.initial, cfg.disturbance, scfg)
    except sim.SimulationDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED

    Lambda = report.Lambda if (report is not None and report.feasible) else None
    os.makedirs(out, exist_ok=True)
    reporting.write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj,
                                   cfg.config_hash, Lambda)
    reporting.write_snapshots_csv(os.path.join(out, "bending_snapshots.csv"),
                                  traj.times, traj.snapshot_positions,
                                  traj.w_snapshots, cfg.config_hash, Lambda)
    reporting.write_snapshots_csv(os.path.join(out, "twist_snapshots.csv"),
                                  traj.times, traj.snapshot_positions,
                                  traj.phi_snapshots, cfg.config_hash, Lambda)
    figures = plots.render_run(traj, out, reporting.provenance_lines(cfg.config_hash, Lambda))
    print(f"scenario {cfg.scenario!r}: {traj.times.size} output samples, "
          f"E(0) = {traj.E[0]:.6g}, E(end) = {traj.E[-1]:.6g}")
    print(f"wrote trajectory.csv, snapshot CSVs and {len(figures)} figures to {out}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: str, seed: int) -> int:
    if cfg.mode == "open-loop":
        print("error: verify needs a closed-loop configuration (the identities "
              "under test involve the feedback law)", file=sys.stderr)
        return EXIT_USAGE
    law, report = _resolve_law(cfg, seed)
    if law is None:
        print(f"error: eps = auto but the certificate search is infeasible "
              f"(margin {report.margin:.6g})", file=sys.stderr)
        return EXIT_INFEASIBLE
    certificate = report if (report is not None and report.feasible) else None
    checks = verif.run_verification(cfg.model, law, seed=seed, certificate=certificate)
    path = os.path.join(out, "verification_report.txt")
    Lambda = certificate.Lambda if certificate is not None else None
    reporting.write_verification_report(path, checks, cfg.config_hash, Lambda)
    n_fail = sum(1 for c in checks if c.status == "fail")
    for c in checks:
        print(f"  {c.name:32s} {c.status:5s} residual = {c.residual:.3e}"
              + (f"  ({c.detail})" if c.status != "pass" and c.detail else ""))
    print(f"{len(checks)} checks, {n_fail} failures; report written to {path}")
    return EXIT_OK if n_fail == 0 else EXIT_VERIFY_FAILED


def cmd_converge(cfg: RunConfig, out: str, seed: int) -> int:
    law, report = _resolve_law(cfg, seed)
    model = cfg.model
    span = model.span

    # spatial study: static bending under unit tip load, energy-norm error
    # against a once-more-refined reference
    meshes = [8, 16, 32, 64]
    ref_n = 128
    solutions = {}
    for n in meshes + [ref_n]:
        mesh = fem.Mesh.uniform(span, n)
        system = fem.assemble(model, law, mesh, cfg.mode if law else "open-loop")
        d = system.dofs
        Kb = system.K_elastic[d.bend_slice, d.bend_slice]
        F = np.zeros(d.n_bend)
        F[d.tip_w] = 1.0
        solutions[n] = (mesh, np.linalg.solve(Kb, F))
    from .quadrature import gauss_panels
    nodes, weights = gauss_panels(0.0, span, 256, 4)
    ref_mesh, ref_sol = solutions[ref_n]
    ev_ref = fem.FieldEvaluator(ref_mesh)
    ref_curv = ev_ref.bending(np.concatenate([ref_sol, np.zeros(ref_n)]), nodes, deriv=2)
    spatial_rows = []
    prev_err = None
    for n in meshes:
        mesh, sol = solutions[n]
        ev = fem.FieldEvaluator(mesh)
        curv = ev.bending(np.concatenate([sol, np.zeros(n)]), nodes, deriv=2)
        err = float(np.sqrt(np.dot(weights, model.EI(nodes) * (curv - ref_curv) ** 2)))
        order = np.log2(prev_err / err) if prev_err else float("nan")
        spatial_rows.append((n, err, order))
        prev_err = err

    # temporal study: Newmark against the matrix-exponential reference
    mesh8 = fem.Mesh.uniform(span, 8)
    sys8 = fem.assemble(model, law, mesh8, cfg.mode if law else "open-loop")
    temporal_rows = []
    prev_err = None
    for dt in (4e-3, 2e-3, 1e-3):
        scfg = sim.SimulationConfig(t_end=min(cfg.t_end, 10.0), dt=dt,
                                    output_stride=max(1, int(round(0.02 / dt))))
        tn = sim.simulate(sys8, cfg.initial, cfg.disturbance, scfg)
        te = sim.propagate_expm(sys8, cfg.initial, cfg.disturbance, scfg)
        num = np.sqrt(np.trapezoid((tn.w_tip - te.w_tip) ** 2, tn.times))
        den = np.sqrt(np.trapezoid(te.w_tip ** 2, te.times))
        err = float(num / den) if den > 0 else float(num)
        order = np.log2(prev_err / err) if prev_err else float("nan")
        temporal_rows.append((dt, err, order))
        prev_err = err

    # cubic exactness: constant-coefficient static solve vs the closed form
    from .profiles import SpatialProfile
    const_model = model.replace(
        EI=SpatialProfile.constant(1.0, span), rho=SpatialProfile.constant(1.0, span))
    mesh_c = fem.Mesh.uniform(span, 8)
    sys_c = fem.assemble(const_model, law, mesh_c, cfg.mode if law else "open-loop")
    d = sys_c.dofs
    Kb = sys_c.K_elastic[d.bend_slice, d.bend_slice]
    F = np.zeros(d.n_bend)
    F[d.tip_w] = 1.0
    sol = np.linalg.solve(Kb, F)
    ev = fem.FieldEvaluator(mesh_c)
    ys = np.linspace(0.0, span, 257)
    exact = ys ** 2 * (3 * span - ys) / 6.0
    exact_err = float(np.max(np.abs(
        ev.bending(np.concatenate([sol, np.zeros(8)]), ys) - exact)))

    path = os.path.join(out, "convergence.txt")
    reporting.write_convergence_table(path, spatial_rows, temporal_rows, exact_err,
                                      cfg.config_hash)
    print("spatial (elements, energy error, order):")
    for row in spatial_rows:
        print(f"  {row[0]:4d}  {row[1]:.6e}  {row[2]:.3f}" if np.isfinite(row[2])
              else f"  {row[0]:4d}  {row[1]:.6e}  -")
    print("temporal (dt, tip-trace error, order):")
    for row in temporal_rows:
        print(f"  {row[0]:.0e}  {row[1]:.6e}  {row[2]:.3f}" if np.isfinite(row[2])
              else f"  {row[0]:.0e}  {row[1]:.6e}  -")
    print(f"constant-coefficient static error: {exact_err:.3e}")
    print(f"table written to {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flexwing",
        description="Simulate and certify a boundary-controlled flexible wing.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("certify", "evaluate the stability certificate and ultimate bounds"),
            ("simulate", "integrate the wing and write traces, snapshots and figures"),
            ("verify", "run the analytic-identity check suite"),
            ("converge", "mesh and time-step refinement study")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a run configuration")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="search/check seed")
        if name == "simulate":
            p.add_argument("--mild-solution", action="store_true",
                           help="integrate even when the initial condition is "
                                "incompatible with the boundary data at t = 0")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    os.makedirs(args.out, exist_ok=True)
    try:
        if args.command == "certify":
            return cmd_certify(cfg, args.out, args.seed)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.out, args.seed, args.mild_solution)
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args.seed)
        if args.command == "converge":
            return cmd_converge(cfg, args.out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError("unreachable")


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
