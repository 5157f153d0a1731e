__all__ = ['Spheronoise']

import os

import numpy as np

from . import ERROR, ConfigError, ParseError, logger
from .base import Marked, MultiFrames
from .func.geometry import tangent


class Spheronoise(Marked, MultiFrames):
    """Noise basis file, one frame per mode.

    Header ``modes``, ``cells``, ``edges``. Each frame starts with
    ``MODE <n>`` and an ``amplitude`` line, then a ``cell`` block of unit
    shape 3-vectors and an ``edge`` block of normal components; the field is
    amplitude times shape.
    """

    magic = b'SPHERONOISE v1'
    frame_marker = b'MODE '
    columns = {'cell': ['x', 'y', 'z'], 'edge': ['normal']}

    @classmethod
    def load(cls, fpath, m):
        """read a basis file and build the NoiseModel on mesh m"""
        from .noise import NoiseModel

        f = cls(fpath)
        try:
            f.scan()
            header = f.section('header').dict
            amps, cell, normal = [], [], []
            for ix in range(len(f)):
                frame = f[ix]
                amps.append(float(frame.dict['amplitude']))
                cell.append(frame.section('cell').array)
                normal.append(frame.section('edge').array[:, 0])
        except (ParseError, KeyError, ValueError, OSError) as err:
            ERROR(f"malformed noise basis file {fpath}: {err}", ConfigError)

        N = len(amps)
        if N == 0 or N != header.get('modes', N):
            ERROR(
                f"{fpath}: header says {header.get('modes')} modes, found {N}",
                ConfigError,
            )
        if any(c.shape != (m.n_cells, 3) for c in cell) or any(
            len(n) != m.n_edges for n in normal
        ):
            ERROR(
                f"{fpath}: basis does not fit {m.n_cells} cells and"
                f" {m.n_edges} edges",
                ConfigError,
            )

        amps = np.array(amps)
        cell = tangent(np.stack(cell), m.cell_circumcenter)
        cell = amps[:, None, None] * cell
        normal = amps[:, None] * np.stack(normal)
        # edge vectors: stored normal part plus the tangential part of the
        # mean of the two cell vectors
        i, j = m.edge_cells.T
        mean = 0.5 * (cell[:, i] + cell[:, j])
        along = np.einsum('nek,ek->ne', mean, m.edge_tangent)
        edge = (
            normal[..., None] * m.edge_normal
            + along[..., None] * m.edge_tangent
        )
        logger.debug(f'read noise basis file\n  {fpath}')
        return NoiseModel.from_fields(m, 'file', amps, cell, edge, False)

    @classmethod
    def write(cls, fpath, data, **kwargs):
        """write a NoiseModel"""
        nm = data
        ncells, nedges = nm.cell_basis.shape[1], nm.edge_basis.shape[1]
        with open(fpath, 'wb') as f:
            cls.write_header(
                f, {'modes': nm.n_modes, 'cells': ncells, 'edges': nedges}
            )
            for n, amp in enumerate(nm.amplitudes):
                scale = amp if amp != 0 else 1.0
                f.write(f"MODE {n}\namplitude {amp:.17g}\n".encode())
                cls.write_block(f, 'cell', nm.cell_basis[n] / scale)
                cls.write_block(f, 'edge', nm.edge_normal_basis[n] / scale)
        logger.debug(f'wrote noise basis file\n  {fpath}')
        return os.stat(fpath).st_size
