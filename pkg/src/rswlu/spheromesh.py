__all__ = ['Spheromesh']

import os

import numpy as np

from . import ERROR, ParseError, logger
from .base import Marked
from .mesh import Mesh


class Spheromesh(Marked):
    """Plain-text mesh dump.

    Header ``level``, ``radius``, ``cells``, ``edges``, ``duals``; blocks
    ``vertices`` (unit x y z), ``faces`` (counterclockwise vertex ids),
    ``cell_area``, ``dual_area``, ``edges`` (i j dual_minus dual_plus) and
    ``edge_lengths`` (primal dual). The mesh is rebuilt from vertices and
    faces; the other blocks are for external tools.
    """

    magic = b'SPHEROMESH v1'
    columns = {
        'vertices': ['x', 'y', 'z'],
        'faces': ['a', 'b', 'c'],
        'cell_area': ['area'],
        'dual_area': ['area'],
        'edges': ['i', 'j', 'dual_minus', 'dual_plus'],
        'edge_lengths': ['primal', 'dual'],
    }

    def to_mesh(self) -> Mesh:
        if not self.sections:
            self.scan()
        header = self.section('header').dict
        try:
            verts = self.section('vertices').array
            faces = self.section('faces').array.astype(np.int64)
        except KeyError:
            ERROR(f"{self.name} has no vertices/faces blocks", ParseError)
        mesh = Mesh.from_triangulation(
            verts, faces, header['level'], header['radius']
        )
        logger.debug(f'read mesh file\n  {self.name}')
        return mesh

    @classmethod
    def write(cls, fpath, data: Mesh, **kwargs):
        m = data
        with open(fpath, 'wb') as f:
            cls.write_header(
                f,
                {
                    'level': m.refinement_level,
                    'radius': m.sphere_radius,
                    'cells': m.n_cells,
                    'edges': m.n_edges,
                    'duals': m.n_duals,
                },
            )
            cls.write_block(f, 'vertices', m.vertices)
            cls.write_block(f, 'faces', m.faces, fmt='%d')
            cls.write_block(f, 'cell_area', m.cell_area)
            cls.write_block(f, 'dual_area', m.dual_area)
            cls.write_block(
                f,
                'edges',
                np.c_[m.edge_cells, m.dual_minus, m.dual_plus],
                fmt='%d',
            )
            cls.write_block(
                f, 'edge_lengths', np.c_[m.primal_edge_len, m.dual_edge_len]
            )
        logger.debug(f'wrote mesh file\n  {fpath}')
        return os.stat(fpath).st_size
