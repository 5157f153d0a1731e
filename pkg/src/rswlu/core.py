"""Deterministic rotating shallow water tendencies on the mesh."""

__all__ = [
    'State',
    'PhysParams',
    'potential_vorticity',
    'vorticity_flux',
    'kinetic_energy_cell',
    'det_tendency',
    'continuity_tendency',
]

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import ERROR, DegenerateDepth, DimensionMismatch
from . import ops

EPS_H = 1.0e-6  # m


@dataclass(frozen=True, eq=False)
class State:
    """normal velocity V [m/s] on edges and depth h [m] on cells"""

    V: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'V', np.asarray(self.V, dtype=float))
        object.__setattr__(self, 'h', np.asarray(self.h, dtype=float))

    def check(self, m):
        if self.V.shape != (m.n_edges,) or self.h.shape != (m.n_cells,):
            ERROR(
                f"state shapes V{self.V.shape} h{self.h.shape} do not fit"
                f" {m}",
                DimensionMismatch,
            )
        return self

    def copy(self):
        return State(self.V.copy(), self.h.copy())

    @classmethod
    def rest(cls, m, depth: float):
        return cls(np.zeros(m.n_edges), np.full(m.n_cells, float(depth)))


@dataclass(frozen=True, eq=False)
class PhysParams:
    g: float = 9.80616  # m/s2
    planet_rotation: float = 7.292e-5  # 1/s
    eta_b: Optional[np.ndarray] = None  # bottom topography per cell [m]
    eps_h: float = EPS_H

    def __post_init__(self):
        if not (np.isfinite(self.g) and self.g > 0):
            ERROR(f"gravity must be positive, got {self.g}", ValueError)
        if not np.isfinite(self.planet_rotation):
            ERROR("planet rotation must be finite", ValueError)

    def coriolis(self, m):
        """f = 2 Omega sin(lat) at the dual vertices"""
        return 2.0 * self.planet_rotation * m.vertices[:, 2]

    def topography(self, m):
        if self.eta_b is None:
            return np.zeros(m.n_cells)
        return np.asarray(self.eta_b, dtype=float)


# -------------------------------------------------------------


def _check_depth(h, eps, where):
    low = h <= eps
    if np.any(low):
        ix = int(np.argmax(low))
        ERROR(
            f"degenerate {where} depth {h[ix]:.3e} m at index {ix}"
            f" ({int(low.sum())} locations <= {eps:g} m)",
            DegenerateDepth,
        )


def potential_vorticity(m, s: State, p: PhysParams):
    """q = (curl V + f) / h_z on the dual cells"""
    h_dual = ops.dual_average_cell_scalar(m, s.h)
    _check_depth(h_dual, p.eps_h, 'dual')
    return (ops.curl(m, s.V) + p.coriolis(m)) / h_dual


def vorticity_flux(m, c, V, h):
    """Vorticity-weighted flux of V across each edge.

    For every edge, each dual end z gathers from both cells the other edge
    of that cell touching z, weighted by |z & T| / (2 Omega), by the mean
    depth of the two cells across the pair, and by |e_k| times the flux
    leaving the cell. The z_minus group enters with +c, the z_plus group
    with -c, divided by h bar |e~|.
    """
    hbar = ops.edge_mean_depth(m, h)
    k = m.vort_edge
    outer = m.edge_cells[:, ::-1]  # cell across e, seen from slot i | j
    depth = 0.5 * (h[outer][:, None, :] + h[m.vort_outer])
    flux = m.vort_weight * depth * m.primal_edge_len[k] * m.vort_sign * V[k]
    G = flux.sum(axis=2)
    return (c[m.dual_minus] * G[:, 0] - c[m.dual_plus] * G[:, 1]) / (
        hbar * m.dual_edge_len
    )


def kinetic_energy_cell(m, V):
    """K_i = sum over the edges of T_i of |e~||e| V^2 / (4 Omega_i)"""
    return m.ops.kinetic @ (V * V)


def det_tendency(m, s: State, p: PhysParams):
    """physical momentum tendency per edge [m/s2]"""
    hbar = ops.edge_mean_depth(m, s.h)
    _check_depth(hbar, p.eps_h, 'edge')
    eta = ops.curl(m, s.V) + p.coriolis(m)
    _check_depth(ops.dual_average_cell_scalar(m, s.h), p.eps_h, 'dual')
    return (
        vorticity_flux(m, eta, s.V, s.h)
        - ops.grad_n(m, kinetic_energy_cell(m, s.V))
        - p.g * ops.grad_n(m, s.h + p.topography(m))
    )


def continuity_tendency(m, s: State):
    """-div(h bar V) per cell [m/s]"""
    return -ops.div(m, ops.edge_mean_depth(m, s.h) * s.V)
