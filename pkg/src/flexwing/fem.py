"""Conforming Galerkin discretization of the coupled bending/twist wing.

Bending uses cubic Hermite elements (value + slope per node, C1 across
elements) so the fourth-order operator is handled in weak form; torsion
uses linear Lagrange elements. The clamped root eliminates w, w', phi at
y = 0. Tip conditions differ by mode:

open loop     tip store inertia enters the mass matrix and the load map
              carries the raw tip force/moment pair;
closed loop   the feedback cancels the store inertia exactly, the rate
              gains k1, k2 land in the damping matrix and k1*eps1, k2*eps2
              in the stiffness matrix (tip value dofs only; the moment
              condition at the tip is homogeneous), and the load map
              carries the residual disturbance pair.

All element integrals use a fixed Gauss rule per element, so linearly
tapered coefficient profiles are integrated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .model import ControlLaw, InitialCondition, WingModel
from .quadrature import gauss_panels

GAUSS_POINTS_PER_ELEMENT = 4


@dataclass(frozen=True)
class Mesh:
    """Strictly increasing node positions 0 = y_0 < ... < y_N = span."""

    nodes: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.nodes, dtype=float)
        if n.ndim != 1 or n.size < 2 or n[0] != 0.0 or np.any(np.diff(n) <= 0):
            raise ValueError("mesh nodes must strictly increase from 0")
        object.__setattr__(self, "nodes", n)

    @staticmethod
    def uniform(span: float, n_elements: int) -> "Mesh":
        return Mesh(np.linspace(0.0, float(span), int(n_elements) + 1))

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def span(self) -> float:
        return float(self.nodes[-1])


class DofMap:
    """Global numbering after root elimination.

    Bending dofs come first, (value, slope) per free node; twist values
    follow. For N elements: 2N bending dofs, N twist dofs.
    """

    def __init__(self, mesh: Mesh):
        n = mesh.n_elements
        self.n_elements = n
        self.n_bend = 2 * n
        self.n_twist = n
        self.n_total = 3 * n

    def bend_value(self, node: int) -> int:
        if node < 1:
            raise ValueError("root bending dofs are eliminated")
        return 2 * (node - 1)

    def bend_slope(self, node: int) -> int:
        return self.bend_value(node) + 1

    def twist_value(self, node: int) -> int:
        if node < 1:
            raise ValueError("root twist dof is eliminated")
        return self.n_bend + (node - 1)

    @property
    def tip_w(self) -> int:
        return self.bend_value(self.n_elements)

    @property
    def tip_w_slope(self) -> int:
        return self.bend_slope(self.n_elements)

    @property
    def tip_phi(self) -> int:
        return self.twist_value(self.n_elements)

    @property
    def bend_slice(self) -> slice:
        return slice(0, self.n_bend)

    @property
    def twist_slice(self) -> slice:
        return slice(self.n_bend, self.n_total)


def hermite_shapes(s: np.ndarray, h: float):
    """Cubic Hermite values and y-second-derivatives at local s in [0, 1]."""
    N = np.stack([
        1.0 - 3.0 * s ** 2 + 2.0 * s ** 3,
        h * (s - 2.0 * s ** 2 + s ** 3),
        3.0 * s ** 2 - 2.0 * s ** 3,
        h * (s ** 3 - s ** 2),
    ])
    d2 = np.stack([
        (-6.0 + 12.0 * s) / h ** 2,
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / h ** 2,
        (-2.0 + 6.0 * s) / h,
    ])
    return N, d2


def hermite_d1(s: np.ndarray, h: float):
    """Cubic Hermite first y-derivatives at local s."""
    return np.stack([
        (-6.0 * s + 6.0 * s ** 2) / h,
        1.0 - 4.0 * s + 3.0 * s ** 2,
        (6.0 * s - 6.0 * s ** 2) / h,
        3.0 * s ** 2 - 2.0 * s,
    ])


def lagrange_shapes(s: np.ndarray, h: float):
    """Linear Lagrange values and y-derivatives at local s."""
    L = np.stack([1.0 - s, s])
    d1 = np.stack([np.full_like(s, -1.0 / h), np.full_like(s, 1.0 / h)])
    return L, d1


@dataclass
class DiscreteSystem:
    """Assembled second-order system M x'' + C x' + K x = F(t).

    `M_energy`/`K_elastic` hold the distributed mass and elastic stiffness
    only (no tip store, no feedback, no aerodynamic terms); they evaluate
    the physical energy quadratic form regardless of mode.
    """

    mesh: Mesh
    dofs: DofMap
    mode: str  # "open-loop" | "closed-loop"
    model: WingModel
    law: Optional[ControlLaw]
    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    M_energy: np.ndarray = field(repr=False)
    K_elastic: np.ndarray = field(repr=False)

    def load_vector(self, q1: float, q2: float) -> np.ndarray:
        """Nodal load for the input pair (tip force channel, tip moment channel)."""
        F = np.zeros(self.dofs.n_total)
        F[self.dofs.tip_w] = q1
        F[self.dofs.tip_phi] = q2
        return F

    @property
    def load_columns(self) -> np.ndarray:
        cols = np.zeros((self.dofs.n_total, 2))
        cols[self.dofs.tip_w, 0] = 1.0
        cols[self.dofs.tip_phi, 1] = 1.0
        return cols

    def export_matrices(self, directory):
        """Write M, C, K in Matrix Market form for debugging."""
        import os
        from scipy.io import mmwrite
        os.makedirs(directory, exist_ok=True)
        for name, mat in (("M", self.M), ("C", self.C), ("K", self.K)):
            mmwrite(os.path.join(directory, f"{name}.mtx"), np.asarray(mat))


def _element_blocks(model: WingModel, mesh: Mesh):
    """Per-element integrals of every bilinear form, via fixed Gauss rules."""
    xi, wi = gauss_panels(0.0, 1.0, 1, GAUSS_POINTS_PER_ELEMENT)
    out = []
    for e in range(mesh.n_elements):
        a, b = mesh.nodes[e], mesh.nodes[e + 1]
        h = b - a
        y = a + xi * h
        w = wi * h
        N, N2 = hermite_shapes(xi, h)
        L, L1 = lagrange_shapes(xi, h)

        def form(rows, cols, coeff):
            return np.einsum("iq,jq,q->ij", rows, cols, coeff * w)

        rho = model.rho(y)
        Iw = model.Iw(y)
        EI = model.EI(y)
        GJ = model.GJ(y)
        etaEI = model.eta_w(y) * EI
        etaGJ = model.eta_phi(y) * GJ
        out.append({
            "m_bb": form(N, N, rho),
            "k_bb": form(N2, N2, EI),
            "c_bb_kv": form(N2, N2, etaEI),
            "m_tt": form(L, L, Iw),
            "k_tt": form(L1, L1, GJ),
            "c_tt_kv": form(L1, L1, etaGJ),
            "k_bt": form(N, L, -rho * model.alpha_w(y)),
            "c_bt": form(N, L, -rho * model.beta_w(y)),
            "c_bb_aero": form(N, N, -rho * model.gamma_w(y)),
            "k_tt_aero": form(L, L, -Iw * model.alpha_phi(y)),
            "c_tt_aero": form(L, L, -Iw * model.beta_phi(y)),
            "c_tb": form(L, N, -Iw * model.gamma_phi(y)),
        })
    return out


def assemble(model: WingModel, law: Optional[ControlLaw], mesh: Mesh,
             mode: str = "closed-loop") -> DiscreteSystem:
    """Assemble mass/damping/stiffness for the requested loop mode."""
    if mode not in ("open-loop", "closed-loop"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "closed-loop" and law is None:
        raise ValueError("closed-loop assembly needs a control law")
    if abs(mesh.span - model.span) > 1e-12 * max(1.0, model.span):
        raise ValueError("mesh span does not match the wing span")

    dofs = DofMap(mesh)
    n = dofs.n_total
    M = np.zeros((n, n))
    C = np.zeros((n, n))
    K = np.zeros((n, n))
    M_energy = np.zeros((n, n))
    K_elastic = np.zeros((n, n))

    blocks = _element_blocks(model, mesh)
    for e, blk in enumerate(blocks):
        # local-to-global with eliminated root dofs marked -1
        gb = np.array([-1, -1, dofs.bend_value(1), dofs.bend_slope(1)]) if e == 0 else \
            np.array([dofs.bend_value(e), dofs.bend_slope(e),
                      dofs.bend_value(e + 1), dofs.bend_slope(e + 1)])
        gt = np.array([-1, dofs.twist_value(1)]) if e == 0 else \
            np.array([dofs.twist_value(e), dofs.twist_value(e + 1)])

        def scatter(target, rows, cols, local):
            for i, gi in enumerate(rows):
                if gi < 0:
                    continue
                for j, gj in enumerate(cols):
                    if gj < 0:
                        continue
                    target[gi, gj] += local[i, j]

        scatter(M, gb, gb, blk["m_bb"])
        scatter(M_energy, gb, gb, blk["m_bb"])
        scatter(K, gb, gb, blk["k_bb"])
        scatter(K_elastic, gb, gb, blk["k_bb"])
        scatter(C, gb, gb, blk["c_bb_kv"])
        scatter(M, gt, gt, blk["m_tt"])
        scatter(M_energy, gt, gt, blk["m_tt"])
        scatter(K, gt, gt, blk["k_tt"])
        scatter(K_elastic, gt, gt, blk["k_tt"])
        scatter(C, gt, gt, blk["c_tt_kv"])
        scatter(K, gb, gt, blk["k_bt"])
        scatter(C, gb, gt, blk["c_bt"])
        scatter(C, gb, gb, blk["c_bb_aero"])
        scatter(K, gt, gt, blk["k_tt_aero"])
        scatter(C, gt, gt, blk["c_tt_aero"])
        scatter(C, gt, gb, blk["c_tb"])

    if mode == "open-loop":
        M[dofs.tip_w, dofs.tip_w] += model.m_s
        M[dofs.tip_phi, dofs.tip_phi] += model.J_s
    else:
        C[dofs.tip_w, dofs.tip_w] += law.k1
        K[dofs.tip_w, dofs.tip_w] += law.k1 * law.eps1
        C[dofs.tip_phi, dofs.tip_phi] += law.k2
        K[dofs.tip_phi, dofs.tip_phi] += law.k2 * law.eps2

    try:
        sla.cholesky(M, lower=True)
    except sla.LinAlgError as exc:
        raise ValueError("mass matrix is not positive definite (degenerate mesh?)") from exc

    return DiscreteSystem(mesh, dofs, mode, model, law, M, C, K, M_energy, K_elastic)


def interpolate(ic: InitialCondition, mesh: Mesh):
    """Nodal interpolation of an initial condition; returns (x0, v0)."""
    span = mesh.span
    ic.check_root_constraints(span)
    dofs = DofMap(mesh)
    x0 = np.zeros(dofs.n_total)
    v0 = np.zeros(dofs.n_total)
    w_s = ic.slope_w0(span)
    wt_s = ic.slope_wt0(span)
    for node in range(1, mesh.n_elements + 1):
        y = mesh.nodes[node]
        x0[dofs.bend_value(node)] = ic.w0(y)
        x0[dofs.bend_slope(node)] = w_s(y)
        x0[dofs.twist_value(node)] = ic.phi0(y)
        v0[dofs.bend_value(node)] = ic.wt0(y)
        v0[dofs.bend_slope(node)] = wt_s(y)
        v0[dofs.twist_value(node)] = ic.phit0(y)
    return x0, v0


def first_order_form(sys: DiscreteSystem):
    """State operator A and input map B of z' = A z + B q(t), z = (x, x')."""
    n = sys.dofs.n_total
    Minv_K = sla.solve(sys.M, sys.K, assume_a="pos")
    Minv_C = sla.solve(sys.M, sys.C, assume_a="pos")
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -Minv_K
    A[n:, n:] = -Minv_C
    B = np.zeros((2 * n, 2))
    B[n:, :] = sla.solve(sys.M, sys.load_columns)
    return A, B


class FieldEvaluator:
    """Pointwise evaluation of the FE fields and their derivatives."""

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.dofs = DofMap(mesh)

    def _locate(self, y):
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        nodes = self.mesh.nodes
        e = np.clip(np.searchsorted(nodes, y_arr, side="right") - 1, 0, self.mesh.n_elements - 1)
        h = nodes[e + 1] - nodes[e]
        s = (y_arr - nodes[e]) / h
        return y_arr, e, s, h

    def _bend_dofs(self, x):
        """Element-wise (4, n_elements) bending dof table incl. clamped root."""
        full = np.concatenate([[0.0, 0.0], np.asarray(x)[self.dofs.bend_slice]])
        tab = np.empty((4, self.mesh.n_elements))
        for e in range(self.mesh.n_elements):
            tab[:, e] = full[2 * e: 2 * e + 4]
        return tab

    def _twist_dofs(self, x):
        full = np.concatenate([[0.0], np.asarray(x)[self.dofs.twist_slice]])
        tab = np.empty((2, self.mesh.n_elements))
        for e in range(self.mesh.n_elements):
            tab[:, e] = full[e: e + 2]
        return tab

    def bending(self, x, y, deriv: int = 0):
        """w, w' or w'' of the bending field with dof vector x, at y."""
        y_arr, e, s, h = self._locate(y)
        tab = self._bend_dofs(x)[:, e]
        if deriv == 0:
            sh = np.stack([1 - 3 * s ** 2 + 2 * s ** 3, h * (s - 2 * s ** 2 + s ** 3),
                           3 * s ** 2 - 2 * s ** 3, h * (s ** 3 - s ** 2)])
        elif deriv == 1:
            sh = hermite_d1(s, h)
        elif deriv == 2:
            sh = np.stack([(-6 + 12 * s) / h ** 2, (-4 + 6 * s) / h,
                           (6 - 12 * s) / h ** 2, (-2 + 6 * s) / h])
        else:
            raise ValueError("deriv must be 0, 1 or 2")
        out = np.sum(sh * tab, axis=0)
        return float(out[0]) if np.ndim(y) == 0 else out

    def twist(self, x, y, deriv: int = 0):
        """phi or phi' of the twist field with dof vector x, at y."""
        y_arr, e, s, h = self._locate(y)
        tab = self._twist_dofs(x)[:, e]
        if deriv == 0:
            sh = np.stack([1 - s, s])
        elif deriv == 1:
            sh = np.stack([-1.0 / h, 1.0 / h])
        else:
            raise ValueError("deriv must be 0 or 1")
        out = np.sum(sh * tab, axis=0)
        return float(out[0]) if np.ndim(y) == 0 else out
