"""Energy, potential enstrophy, mass, and lat-lon projections."""

__all__ = [
    'DiagnosticsRecord',
    'DiagnosticsSeries',
    'DiagnosticsFile',
    'total_energy',
    'potential_enstrophy',
    'total_mass',
    'energy_gradient',
    'enstrophy_gradient',
    'record',
    'relative_deviation',
    'latlon_grid',
    'project_to_latlon',
    'ensemble_mean',
]

import os
from typing import List, NamedTuple

import numpy as np
import pandas as pd

from . import ERROR, ParseError, logger
from . import ops
from .base import ReadWrite
from .core import PhysParams, State, kinetic_energy_cell, potential_vorticity
from .func.geometry import xyz

columns = ['step', 'time', 'energy', 'enstrophy', 'mass']
dtypes = {k: 'int64' if k == 'step' else 'float64' for k in columns}


class DiagnosticsRecord(NamedTuple):
    step: int
    time: float  # s
    energy: float
    enstrophy: float
    mass: float  # m3


def total_energy(m, s: State, p: PhysParams) -> float:
    """1/2 sum |e||e~| h bar V^2 + 1/2 g sum (h + eta_b)^2 Omega"""
    hbar = ops.edge_mean_depth(m, s.h)
    kinetic = 0.5 * ops.edge_inner(m, hbar * s.V, s.V)
    surface = s.h + p.topography(m)
    return kinetic + 0.5 * p.g * float(np.sum(surface**2 * m.cell_area))


def potential_enstrophy(m, s: State, p: PhysParams) -> float:
    """1/2 sum h_z q_z^2 |z|"""
    q = potential_vorticity(m, s, p)
    h_dual = ops.dual_average_cell_scalar(m, s.h)
    return 0.5 * float(np.sum(h_dual * q**2 * m.dual_area))


def total_mass(m, h) -> float:
    return float(np.sum(np.asarray(h) * m.cell_area))


def energy_gradient(m, s: State, p: PhysParams):
    """(dE/dV per edge, dE/dh per cell)"""
    hbar = ops.edge_mean_depth(m, s.h)
    dV = m.ops.inner_weight * hbar * s.V
    dh = m.cell_area * (
        kinetic_energy_cell(m, s.V) + p.g * (s.h + p.topography(m))
    )
    return dV, dh


def enstrophy_gradient(m, s: State, p: PhysParams):
    """dC/dV per edge: |e||e~| grad_t(q)"""
    return m.ops.inner_weight * ops.grad_t(m, potential_vorticity(m, s, p))


def record(m, s: State, p: PhysParams, step=0, time=0.0):
    return DiagnosticsRecord(
        int(step),
        float(time),
        total_energy(m, s, p),
        potential_enstrophy(m, s, p),
        total_mass(m, s.h),
    )


def relative_deviation(values):
    """(X(t) - X(0)) / X(0)"""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    return (values - values[0]) / values[0]


# -------------------------------------------------------------


class DiagnosticsSeries:
    """time series of DiagnosticsRecord, one row per cadence point"""

    def __init__(self, records=(), **attrs):
        self.records: List[DiagnosticsRecord] = list(records)
        self.attrs = dict(attrs)

    def __repr__(self):
        return f"<DiagnosticsSeries at {hex(id(self))}, {len(self)} records>"

    def __len__(self):
        return len(self.records)

    def __getitem__(self, ix):
        return self.records[ix]

    def append(self, rec: DiagnosticsRecord):
        self.records.append(rec)

    @property
    def df(self):
        df = pd.DataFrame(self.records, columns=columns)
        df = df.astype(dtypes)
        df.attrs.update(self.attrs)
        return df

    def relative(self, key='energy'):
        return relative_deviation([getattr(r, key) for r in self.records])

    def write(self, fpath):
        return DiagnosticsFile.write(fpath, self)

    @classmethod
    def read(cls, fpath):
        return DiagnosticsFile(fpath).parse(None, dtype='obj')


class DiagnosticsFile(ReadWrite):
    """CSV with header step,time,energy,enstrophy,mass, 17 significant
    digits"""

    def scan(self):
        pass

    def parse(self, section, dtype='df'):
        df = pd.read_csv(
            self.name,
            float_precision='round_trip',
            dtype=dtypes,
        )
        if list(df.columns) != columns:
            ERROR(
                f"{self.name}: expected columns {columns}, got"
                f" {list(df.columns)}",
                ParseError,
            )
        if dtype == 'dict':
            return {k: df[k].values for k in columns}
        elif dtype == 'obj':
            return DiagnosticsSeries(
                DiagnosticsRecord(int(r[0]), *map(float, r[1:]))
                for r in df.itertuples(index=False)
            )
        return df

    @classmethod
    def write(cls, fpath, data, **kwargs):
        df = data.df if isinstance(data, DiagnosticsSeries) else data
        df[columns].to_csv(fpath, float_format='%.17g', index=False)
        logger.debug(f'wrote diagnostics file\n  {fpath}')
        return os.stat(fpath).st_size


# -------------------------------------------------------------


def latlon_grid(nlat, nlon):
    """cell-centred latitudes (south to north) and longitudes, radians"""
    lat = -0.5 * np.pi + (np.arange(nlat) + 0.5) * np.pi / nlat
    lon = -np.pi + (np.arange(nlon) + 0.5) * 2.0 * np.pi / nlon
    return lat, lon


def project_to_latlon(m, F, nlat: int, nlon: int):
    """Sample a cell or dual field on a lat-lon grid, rows south to north.

    Each node takes the value of the cell (or dual cell) containing it.
    """
    if nlat < 2 or nlon < 2:
        ERROR(f"lat-lon grid needs at least 2x2 nodes, got {nlat}x{nlon}")
    F = np.asarray(F)
    lat, lon = latlon_grid(nlat, nlon)
    LON, LAT = np.meshgrid(lon, lat)
    pts = xyz(LON.ravel(), LAT.ravel())
    if len(F) == m.n_cells:
        ix = m.locate_cells(pts)
    elif len(F) == m.n_duals:
        ix = m.locate_duals(pts)
    else:
        ERROR(
            f"field of length {len(F)} is neither a cell nor a dual field",
            ValueError,
        )
    return F[ix].reshape(nlat, nlon)


def ensemble_mean(fields):
    """running mean over members, exact when all members agree"""
    mean = None
    for k, x in enumerate(fields, start=1):
        x = np.asarray(x, dtype=float)
        mean = x.copy() if mean is None else mean + (x - mean) / k
    return mean
