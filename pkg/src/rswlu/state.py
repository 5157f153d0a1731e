__all__ = ['Spherostate']

import os

from . import ERROR, DimensionMismatch, logger
from .base import Marked
from .core import State


class Spherostate(Marked):
    """Model state file: header ``level``, ``radius``, ``time``, ``cells``,
    ``edges``; blocks ``V`` (normal velocity per edge) and ``h`` (depth per
    cell), 17 significant digits."""

    magic = b'SPHEROSTATE v1'
    columns = {'V': ['V'], 'h': ['h']}

    def to_state(self, m=None):
        """(State, header dict); checked against mesh m when given"""
        if not self.sections:
            self.scan()
        header = self.section('header').dict
        s = State(
            self.section('V').array[:, 0], self.section('h').array[:, 0]
        )
        if m is not None:
            if header.get('level', m.refinement_level) != m.refinement_level:
                ERROR(
                    f"{self.name} was written on level {header['level']},"
                    f" mesh is level {m.refinement_level}",
                    DimensionMismatch,
                )
            s.check(m)
        logger.debug(f'read state file\n  {self.name}')
        return s, header

    @classmethod
    def write(cls, fpath, data, mesh=None, time=0.0, **kwargs):
        s = data
        header = {}
        if mesh is not None:
            header.update(
                level=mesh.refinement_level, radius=mesh.sphere_radius
            )
        header.update(time=float(time), cells=len(s.h), edges=len(s.V))
        with open(fpath, 'wb') as f:
            cls.write_header(f, header)
            cls.write_block(f, 'V', s.V)
            cls.write_block(f, 'h', s.h)
        logger.debug(f'wrote state file\n  {fpath}')
        return os.stat(fpath).st_size
