"""Figure rendering for simulation runs (SVG, one file per figure)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _inject_provenance(path, provenance_lines):
    """Place the provenance as an XML comment right after the declaration."""
    with open(path, "r", encoding="utf-8") as fh:
        content = fh.read()
    comment = "<!--\n" + "\n".join(line.lstrip("# ") for line in provenance_lines) + "\n-->\n"
    head, sep, tail = content.partition("?>\n")
    if sep:
        content = head + sep + comment + tail
    else:
        content = comment + content
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)


def _save(fig, path, provenance):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    _inject_provenance(path, provenance)


def render_energy(traj, path, provenance, title="Energy history"):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(traj.times, traj.E, "b-", label="E(t)")
    ax.plot(traj.times, traj.E2, "r--", label="augmented E(t)")
    positive = traj.E[traj.E > 0]
    if positive.size and positive.min() > 0 and traj.E.max() / positive.min() > 1e3:
        ax.set_yscale("log")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("energy [J]")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    _save(fig, path, provenance)


def render_snapshots(traj, which, path, provenance, n_curves=9):
    """Spanwise field profiles at evenly spaced output times."""
    if which == "bending":
        mat, label = traj.w_snapshots, "w(y, t) [m]"
    else:
        mat, label = traj.phi_snapshots, "phi(y, t) [rad]"
    idx = np.unique(np.linspace(0, traj.times.size - 1, n_curves).astype(int))
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    cmap = plt.get_cmap("viridis")
    for j, i in enumerate(idx):
        ax.plot(traj.snapshot_positions, mat[i], color=cmap(j / max(1, len(idx) - 1)),
                label=f"t = {traj.times[i]:.2f} s")
    ax.set_xlabel("y [m]")
    ax.set_ylabel(label)
    ax.set_title(f"{'Bending' if which == 'bending' else 'Twist'} snapshots")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    _save(fig, path, provenance)


def render_tip_traces(traj, path, provenance):
    fig, axes = plt.subplots(2, 1, figsize=(6.4, 5.6), sharex=True)
    axes[0].plot(traj.times, traj.w_tip, "b-")
    axes[0].set_ylabel("w(l, t) [m]")
    axes[1].plot(traj.times, traj.phi_tip, "r-")
    axes[1].set_ylabel("phi(l, t) [rad]")
    axes[1].set_xlabel("t [s]")
    axes[0].set_title("Tip displacement traces")
    fig.tight_layout()
    _save(fig, path, provenance)


def render_run(traj, out_dir, provenance):
    """All figures for one simulation run; returns the file list."""
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "energy": os.path.join(out_dir, "energy.svg"),
        "bending": os.path.join(out_dir, "bending_snapshots.svg"),
        "twist": os.path.join(out_dir, "twist_snapshots.svg"),
        "tips": os.path.join(out_dir, "tip_traces.svg"),
    }
    render_energy(traj, files["energy"], provenance)
    render_snapshots(traj, "bending", files["bending"], provenance)
    render_snapshots(traj, "twist", files["twist"], provenance)
    render_tip_traces(traj, files["tips"], provenance)
    return files
