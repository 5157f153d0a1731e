"""Mimetic operators on the icosahedral mesh.

Cell fields have one value per triangle, edge fields one value per edge for
the stored orientation i -> j, dual fields one value per dual cell. Every
linear operator is assembled once per mesh as a CSR matrix.
"""

__all__ = [
    'Operators',
    'grad_n',
    'grad_t',
    'div',
    'curl',
    'reconstruct_velocity',
    'dual_average_cell_scalar',
    'dual_average_vector',
    'edge_mean_depth',
    'edge_partial_derivatives',
    'edge_gradient',
    'cell_average',
    'normal_component',
    'edge_inner',
]

import numpy as np
from scipy import sparse

from .func.geometry import tangent


def _csr(rows, cols, vals, shape):
    return sparse.csr_matrix(
        (np.ravel(vals), (np.ravel(rows), np.ravel(cols))), shape=shape
    )


class Operators:
    """sparse operator matrices of one mesh"""

    def __init__(self, m):
        nc, ne, nd = m.n_cells, m.n_edges, m.n_duals
        e = np.arange(ne)
        i, j = m.edge_cells.T
        le, lde = m.primal_edge_len, m.dual_edge_len

        self.grad_n = _csr(
            np.r_[e, e], np.r_[j, i], np.r_[1 / lde, -1 / lde], (ne, nc)
        )
        self.grad_t = _csr(
            np.r_[e, e],
            np.r_[m.dual_minus, m.dual_plus],
            np.r_[1 / le, -1 / le],
            (ne, nd),
        )

        rows = np.repeat(np.arange(nc), 3)
        edges = m.cell_edges.ravel()
        flux = m.cell_edge_sign.ravel() * le[edges]
        area = np.repeat(m.cell_area, 3)
        self.div = _csr(rows, edges, flux / area, (nc, ne))

        circ = np.r_[lde, -lde] / m.dual_area[np.r_[m.dual_minus, m.dual_plus]]
        self.curl = _csr(
            np.r_[m.dual_minus, m.dual_plus], np.r_[e, e], circ, (nd, ne)
        )

        duals = m.faces.ravel()
        self.dual_average = _csr(
            duals,
            rows,
            m.overlap_area.ravel() / m.dual_area[duals],
            (nd, nc),
        )
        self.edge_mean = _csr(
            np.r_[e, e], np.r_[i, j], np.full(2 * ne, 0.5), (ne, nc)
        )

        # edge -> cell average with weights |e||e~|/4, normalized per cell
        w = (le * lde)[m.cell_edges]
        w = w / w.sum(axis=1, keepdims=True)
        self.cell_average = _csr(rows, edges, w, (nc, ne))

        # u_i = (1/Omega_i) sum_k s |e_k| (x_k - x_i) V_k, one matrix per axis
        R = m.sphere_radius
        xe, xc = m.edge_midpoint[m.cell_edges], m.cell_circumcenter[:, None]
        arm = R * (xe - xc)
        coef = (m.cell_edge_sign * le[m.cell_edges] / m.cell_area[:, None])
        self.reconstruct = [
            _csr(rows, edges, coef * arm[..., k], (nc, ne)) for k in range(3)
        ]
        self.inner_weight = le * lde
        # sum over the cell edges of |e~||e| X / (4 Omega_i)
        self.kinetic = _csr(
            rows, edges, (le * lde)[edges] / (4.0 * area), (nc, ne)
        )
        self.mesh = m


# -------------------------------------------------------------


def grad_n(m, F):
    """(F_j - F_i) / |e~| per edge"""
    return m.ops.grad_n @ F


def grad_t(m, G):
    """(G_minus - G_plus) / |e| per edge"""
    return m.ops.grad_t @ G


def div(m, V):
    """(1/Omega_i) sum of outward |e| V over the cell boundary"""
    return m.ops.div @ V


def curl(m, V):
    """circulation of V around each dual cell, per unit dual area"""
    return m.ops.curl @ V


def reconstruct_velocity(m, V):
    """cell vectors from edge normal components, tangent at circumcenters"""
    u = np.stack([op @ V for op in m.ops.reconstruct], axis=-1)
    return tangent(u, m.cell_circumcenter)


def dual_average_cell_scalar(m, h):
    """h_z = sum over incident cells of |z & T_i| / |z| h_i"""
    return m.ops.dual_average @ h


def dual_average_vector(m, u):
    """area-weighted dual average of cell vectors, tangent at dual vertices"""
    return tangent(m.ops.dual_average @ u, m.vertices)


def edge_mean_depth(m, h):
    """h bar: (h_i + h_j) / 2 per edge"""
    return m.ops.edge_mean @ h


def edge_partial_derivatives(m, Fn, Ft):
    """Cartesian partials at edges, (ne, 3): Fn n + Ft t"""
    return (
        np.asarray(Fn)[:, None] * m.edge_normal
        + np.asarray(Ft)[:, None] * m.edge_tangent
    )


def edge_gradient(m, F):
    """tangential gradient of a cell field at the edge midpoints, (ne, 3)"""
    F = np.asarray(F, dtype=float)
    anchored = F - F[0] if F.size else F
    return edge_partial_derivatives(
        m,
        grad_n(m, F),
        grad_t(m, dual_average_cell_scalar(m, anchored)),
    )


def cell_average(m, X):
    """average edge values (scalar or row vectors) onto cells"""
    return m.ops.cell_average @ X


def normal_component(m, u):
    """project edge-midpoint vectors (ne, 3) onto the edge normals"""
    return np.sum(np.asarray(u) * m.edge_normal, axis=-1)


def edge_inner(m, a, b):
    """edge inner product with the compatible weights |e||e~|"""
    return float(np.sum(m.ops.inner_weight * a * b))
