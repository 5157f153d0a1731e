"""Icosahedral triangular mesh of the sphere with its circumcentric dual."""

__all__ = [
    'Mesh',
    'Check',
    'ValidationReport',
    'build_icosahedral_mesh',
    'validate_mesh',
    'icosahedron',
    'bisect',
]

from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import List, NamedTuple

import numpy as np
import pandas as pd
from scipy import sparse

from . import ERROR, ConfigError, ResourceExhausted, logger
from .func.geometry import arc, circumcenter, normalize, signed_area
from .func.mesh import MeshFunc

MAX_LEVEL = 8
EARTH_RADIUS = 6.371229e6  # m


def icosahedron():
    """regular icosahedron, a vertex at each pole, faces counterclockwise"""
    lat = np.arctan(0.5)
    k = np.arange(5)
    upper = np.c_[
        np.cos(lat) * np.cos(0.4 * np.pi * k),
        np.cos(lat) * np.sin(0.4 * np.pi * k),
        np.full(5, np.sin(lat)),
    ]
    lower = np.c_[
        np.cos(lat) * np.cos(0.4 * np.pi * (k + 0.5)),
        np.cos(lat) * np.sin(0.4 * np.pi * (k + 0.5)),
        np.full(5, -np.sin(lat)),
    ]
    verts = np.vstack([[0.0, 0.0, 1.0], upper, lower, [0.0, 0.0, -1.0]])

    U, L, k1 = 1 + k, 6 + k, (k + 1) % 5
    faces = np.vstack(
        [
            np.c_[np.zeros(5, int), U, 1 + k1],
            np.c_[U, L, 1 + k1],
            np.c_[L, 6 + k1, 1 + k1],
            np.c_[np.full(5, 11), 6 + k1, L],
        ]
    )
    return verts, faces


def _edges(faces):
    """Number edges by first appearance in the face walk (local 01, 12, 20).

    Returns (edge id per face-local edge, sorted vertex pair per edge).
    """
    pairs = np.sort(faces[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
    uniq, first, inverse = np.unique(
        pairs, axis=0, return_index=True, return_inverse=True
    )
    order = np.argsort(first, kind='stable')
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    edge_id = rank[np.asarray(inverse).reshape(-1)].reshape(-1, 3)
    return edge_id, uniq[order]


def bisect(verts, faces):
    """Split every triangle into four, new vertices projected to the sphere"""
    edge_id, edge_vertices = _edges(faces)
    mids = normalize(verts[edge_vertices[:, 0]] + verts[edge_vertices[:, 1]])
    m = len(verts) + edge_id  # m01, m12, m20
    a, b, c = faces.T
    children = np.stack(
        [
            np.c_[a, m[:, 0], m[:, 2]],
            np.c_[m[:, 0], b, m[:, 1]],
            np.c_[m[:, 2], m[:, 1], c],
            np.c_[m[:, 0], m[:, 1], m[:, 2]],
        ],
        axis=1,
    ).reshape(-1, 3)
    return np.vstack([verts, mids]), children


# -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Mesh(MeshFunc):
    """Primal triangles T_i, circumcentric dual cells, and edges.

    Positions are unit vectors, lengths and areas are in metres on the
    sphere of ``sphere_radius``. Dual cell z is centred on ``vertices[z]``.
    Each edge e joins cells ``edge_cells[e] = (i, j)`` with i < j; its
    normal points from T_i to T_j, its tangent t satisfies n x t = r, and
    ``dual_minus[e]`` is the dual vertex at the +t end.
    """

    refinement_level: int
    sphere_radius: float
    vertices: np.ndarray
    faces: np.ndarray
    cell_circumcenter: np.ndarray
    cell_area: np.ndarray
    edge_vertices: np.ndarray
    edge_cells: np.ndarray
    dual_minus: np.ndarray
    dual_plus: np.ndarray
    edge_midpoint: np.ndarray
    edge_normal: np.ndarray
    edge_tangent: np.ndarray
    primal_edge_len: np.ndarray
    dual_edge_len: np.ndarray
    cell_edges: np.ndarray
    cell_edge_sign: np.ndarray
    # (cell, corner): |z & T| of the dual at faces[cell, corner]
    overlap_area: np.ndarray
    dual_area: np.ndarray
    # vorticity-flux pairs, indexed (edge, minus|plus, cell i|j)
    vort_edge: np.ndarray = field(repr=False)
    vort_sign: np.ndarray = field(repr=False)
    vort_weight: np.ndarray = field(repr=False)
    vort_outer: np.ndarray = field(repr=False)

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, np.ndarray):
                value.flags.writeable = False

    def __repr__(self):
        return (
            f"<Mesh level {self.refinement_level} at {hex(id(self))},"
            f" {self.n_cells} cells, {self.n_edges} edges,"
            f" {self.n_duals} duals, radius {self.sphere_radius:g} m>"
        )

    @classmethod
    def from_triangulation(cls, verts, faces, level, radius):
        R = float(radius)
        verts = normalize(np.asarray(verts, dtype=float))
        faces = np.asarray(faces, dtype=np.int64)
        nc, nv = len(faces), len(verts)
        cell = np.arange(nc)

        a, b, c = (verts[faces[:, k]] for k in range(3))
        cc = circumcenter(a, b, c)
        area = R**2 * signed_area(a, b, c)

        edge_id, ev = _edges(faces)
        ne = len(ev)
        # both cells of every edge, the lower index first
        order = np.argsort(edge_id.ravel(), kind='stable')
        ecells = (order // 3).reshape(ne, 2)

        p, q = verts[ev[:, 0]], verts[ev[:, 1]]
        mid = normalize(p + q)
        n = normalize(np.cross(p, q))
        flip = np.sum(n * (cc[ecells[:, 1]] - cc[ecells[:, 0]]), -1) < 0
        n[flip] *= -1.0
        t = np.cross(mid, n)
        p_minus = np.sum((p - mid) * t, -1) > 0
        dual_minus = np.where(p_minus, ev[:, 0], ev[:, 1])
        dual_plus = np.where(p_minus, ev[:, 1], ev[:, 0])

        le = R * arc(p, q)
        lde = R * arc(cc[ecells[:, 0]], cc[ecells[:, 1]])
        sign = np.where(ecells[edge_id, 0] == cell[:, None], 1, -1)

        # kites: corner, midpoint of the edge leaving it, circumcenter,
        # midpoint of the edge arriving at it
        emid = mid[edge_id]
        overlap = np.empty((nc, 3))
        for k in range(3):
            v = verts[faces[:, k]]
            overlap[:, k] = signed_area(v, emid[:, k], cc) + signed_area(
                v, cc, emid[:, (k + 2) % 3]
            )
        overlap *= R**2
        dual_area = np.bincount(
            faces.ravel(), weights=overlap.ravel(), minlength=nv
        )

        vort_edge = np.full((ne, 2, 2), -1, dtype=np.int64)
        vort_sign = np.zeros((ne, 2, 2))
        vort_weight = np.zeros((ne, 2, 2))
        vort_outer = np.full((ne, 2, 2), -1, dtype=np.int64)
        for side in range(3):
            e = edge_id[:, side]
            cslot = np.where(ecells[e, 0] == cell, 0, 1)
            # local edge side joins corner side to corner side+1
            ends = ((side, (side + 2) % 3), ((side + 1) % 3, (side + 1) % 3))
            for corner, other in ends:
                k = edge_id[:, other]
                zslot = np.where(dual_minus[e] == faces[:, corner], 0, 1)
                vort_edge[e, zslot, cslot] = k
                vort_sign[e, zslot, cslot] = sign[:, other]
                vort_weight[e, zslot, cslot] = overlap[:, corner] / (
                    2.0 * area
                )
                vort_outer[e, zslot, cslot] = np.where(
                    ecells[k, 0] == cell, ecells[k, 1], ecells[k, 0]
                )

        return cls(
            refinement_level=int(level),
            sphere_radius=R,
            vertices=verts,
            faces=faces,
            cell_circumcenter=cc,
            cell_area=area,
            edge_vertices=ev,
            edge_cells=ecells,
            dual_minus=dual_minus,
            dual_plus=dual_plus,
            edge_midpoint=mid,
            edge_normal=n,
            edge_tangent=t,
            primal_edge_len=le,
            dual_edge_len=lde,
            cell_edges=edge_id,
            cell_edge_sign=sign,
            overlap_area=overlap,
            dual_area=dual_area,
            vort_edge=vort_edge,
            vort_sign=vort_sign,
            vort_weight=vort_weight,
            vort_outer=vort_outer,
        )

    # ---------------------------------------------------------

    @property
    def n_cells(self):
        return len(self.faces)

    @property
    def n_edges(self):
        return len(self.edge_cells)

    @property
    def n_duals(self):
        return len(self.vertices)

    @property
    def dual_center(self):
        return self.vertices

    @cached_property
    def cell_neighbors(self):
        """N(i): the three cells across the edges of each cell"""
        ec = self.edge_cells[self.cell_edges]
        own = np.arange(self.n_cells)[:, None]
        return np.where(ec[..., 0] == own, ec[..., 1], ec[..., 0])

    @cached_property
    def dual_cells(self) -> sparse.csr_matrix:
        """N(z): sparse incidence, row z lists the cells touching dual z"""
        rows = self.faces.ravel()
        cols = np.repeat(np.arange(self.n_cells), 3)
        return sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)),
            shape=(self.n_duals, self.n_cells),
        )

    @cached_property
    def dual_edges(self) -> sparse.csr_matrix:
        """bounding edges of each dual cell with their circulation signs"""
        ne = self.n_edges
        rows = np.r_[self.dual_minus, self.dual_plus]
        cols = np.r_[np.arange(ne), np.arange(ne)]
        vals = np.r_[np.ones(ne), -np.ones(ne)]
        return sparse.csr_matrix(
            (vals, (rows, cols)), shape=(self.n_duals, ne)
        )

    @cached_property
    def ops(self):
        from .ops import Operators

        return Operators(self)

    @property
    def min_dual_edge_len(self):
        return float(self.dual_edge_len.min())


# -------------------------------------------------------------


def build_icosahedral_mesh(
    level: int, radius: float = EARTH_RADIUS, max_level: int = MAX_LEVEL
) -> Mesh:
    if int(level) != level or level < 0:
        ERROR(f"mesh level must be an integer >= 0, got {level}", ConfigError)
    if not radius > 0:
        ERROR(f"sphere radius must be positive, got {radius}", ConfigError)
    if level > max_level:
        ERROR(
            f"mesh level {level} exceeds the maximum {max_level}"
            f" ({20 * 4**level} cells)",
            ResourceExhausted,
        )
    verts, faces = icosahedron()
    for _ in range(int(level)):
        verts, faces = bisect(verts, faces)
    mesh = Mesh.from_triangulation(verts, faces, level, radius)
    logger.debug(f"built {mesh}")
    return mesh


# -------------------------------------------------------------


class Check(NamedTuple):
    name: str
    passed: bool
    residual: float
    tolerance: float


@dataclass
class ValidationReport:
    level: int
    checks: List[Check] = field(default_factory=list)

    def add(self, name, residual, tolerance, passed=None):
        residual = float(residual)
        if passed is None:
            passed = bool(residual <= tolerance)
        self.checks.append(Check(name, bool(passed), residual, tolerance))

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        ERROR(f"no check named '{name}'", KeyError)

    @property
    def df(self):
        df = pd.DataFrame(self.checks, columns=Check._fields)
        df.attrs.update(level=self.level, ok=self.ok)
        return df

    def __str__(self):
        lines = [f"mesh level {self.level}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            flag = 'ok  ' if c.passed else 'FAIL'
            lines.append(
                f"  {flag} {c.name:<22s} {c.residual:.3e}"
                f" (tol {c.tolerance:.1e})"
            )
        return '\n'.join(lines)


def validate_mesh(m: Mesh) -> ValidationReport:
    """check every mesh invariant, report worst-case residuals"""
    report = ValidationReport(m.refinement_level)
    L = m.refinement_level
    nc, ne, nd = m.n_cells, m.n_edges, m.n_duals
    sphere = 4.0 * np.pi * m.sphere_radius**2

    miscount = abs(nc - 20 * 4**L) + abs(ne - 30 * 4**L)
    miscount += abs(nd - (10 * 4**L + 2))
    report.add('counts', miscount, 0)
    report.add('euler', abs(nc - ne + nd - 2), 0)
    report.add('cell area sum', abs(m.cell_area.sum() / sphere - 1), 1e-12)
    report.add('dual area sum', abs(m.dual_area.sum() / sphere - 1), 1e-12)
    report.add(
        'cell partition',
        np.max(np.abs(m.overlap_area.sum(1) / m.cell_area - 1)),
        1e-12,
    )

    # dual polygon areas from circumcenter fans, independent of the kites
    cc = m.cell_circumcenter
    ci, cj = cc[m.edge_cells[:, 0]], cc[m.edge_cells[:, 1]]
    fan = np.bincount(
        m.dual_minus,
        weights=signed_area(m.vertices[m.dual_minus], ci, cj),
        minlength=nd,
    ) + np.bincount(
        m.dual_plus,
        weights=signed_area(m.vertices[m.dual_plus], cj, ci),
        minlength=nd,
    )
    fan *= m.sphere_radius**2
    report.add(
        'overlap partition', np.max(np.abs(fan / m.dual_area - 1)), 1e-12
    )

    n, t, r = m.edge_normal, m.edge_tangent, m.edge_midpoint
    report.add(
        'unit normal/tangent',
        max(
            np.max(np.abs(np.linalg.norm(n, axis=1) - 1)),
            np.max(np.abs(np.linalg.norm(t, axis=1) - 1)),
        ),
        1e-14,
    )
    report.add(
        'orthogonality',
        max(
            np.max(np.abs(np.sum(n * t, 1))),
            np.max(np.abs(np.sum(n * r, 1))),
            np.max(np.abs(np.sum(t * r, 1))),
        ),
        1e-12,
    )
    toward_j = np.sum(n * (cj - ci), 1)
    report.add('orientation', np.sum(toward_j <= 0), 0)
    handed = np.sum(np.cross(n, t) * r, 1)
    report.add('handedness', np.sum(handed <= 0), 0)
    report.add('counterclockwise', np.sum(m.cell_area <= 0), 0)
    ratio = m.primal_edge_len.max() / m.primal_edge_len.min()
    report.add('edge length ratio', ratio, 1.3, passed=ratio < 1.3)

    level = logger.info if report.ok else logger.warning
    level(f"validated mesh level {L}: {len(report.failures)} failed checks")
    return report


if __name__ == '__main__':
    import sys

    m = build_icosahedral_mesh(int((sys.argv[1:] or [2])[0]), 1.0)
    print(validate_mesh(m))
