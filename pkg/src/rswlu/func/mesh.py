__all__ = []

from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .. import logger
from .geometry import lonlat, normalize


class MeshFunc:
    """point location and lat-lon helpers mixed into Mesh"""

    @cached_property
    def _cell_tree(self):
        return cKDTree(self.cell_circumcenter)

    @cached_property
    def _dual_tree(self):
        return cKDTree(self.vertices)

    def contains(self, cells, pts, eps=1e-13):
        """whether unit vectors pts fall inside the given cells"""
        a, b, c = (self.vertices[self.faces[cells, k]] for k in range(3))
        inside = np.ones(len(pts), dtype=bool)
        for p, q in ((a, b), (b, c), (c, a)):
            inside &= np.sum(pts * np.cross(p, q), axis=-1) >= -eps
        return inside

    def locate_cells(self, pts: np.ndarray, k: int = 8) -> np.ndarray:
        """index of the cell containing each point (spherical containment)"""
        pts = normalize(np.atleast_2d(pts))
        k = min(k, self.n_cells)
        _, near = self._cell_tree.query(pts, k=k)
        near = near.reshape(len(pts), k)
        found = np.full(len(pts), -1)
        for col in range(k):
            todo = found < 0
            if not todo.any():
                break
            hit = self.contains(near[todo, col], pts[todo])
            found[np.where(todo)[0][hit]] = near[todo, col][hit]
        missed = found < 0
        if missed.any():
            logger.debug(
                f"{missed.sum()} points not contained by nearest cells,"
                " using nearest circumcenter"
            )
            found[missed] = near[missed, 0]
        return found

    def locate_duals(self, pts: np.ndarray) -> np.ndarray:
        """index of the dual cell containing each point (nearest vertex)"""
        pts = normalize(np.atleast_2d(pts))
        _, near = self._dual_tree.query(pts)
        return near

    @property
    def cell_lonlat(self):
        return lonlat(self.cell_circumcenter)

    @property
    def dual_lonlat(self):
        return lonlat(self.vertices)

    @property
    def edge_lonlat(self):
        return lonlat(self.edge_midpoint)
