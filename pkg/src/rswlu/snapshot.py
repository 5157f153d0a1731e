__all__ = ['Snapshot', 'SnapshotParquet']

import io
import os

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq

from . import ERROR, ParseError, logger
from .base import ReadWrite
from .diagnostics import latlon_grid as _grid


def _frame(data, attrs):
    nlat, nlon = data.shape
    lat, lon = _grid(nlat, nlon)
    df = pd.DataFrame(
        data,
        index=pd.Index(np.rad2deg(lat), name='lat'),
        columns=np.rad2deg(lon),
    )
    df.columns.name = 'lon'
    df.attrs.update(attrs)
    return df


class Snapshot(ReadWrite):
    """Lat-lon text matrix: one header line ``field day nlat nlon``, then
    nlat rows of nlon values from south to north."""

    def scan(self):
        pass

    def parse(self, section, dtype='df'):
        f = section.f
        words = f.readline().decode().split()
        try:
            name, day = words[0], float(words[1])
            nlat, nlon = int(words[2]), int(words[3])
        except (IndexError, ValueError):
            ERROR(
                f"bad snapshot header '{' '.join(words)}' in {self.name}",
                ParseError(f"bad snapshot header in {self.name}", 1, 1),
            )
        data = np.loadtxt(io.TextIOWrapper(f), ndmin=2)
        if data.shape != (nlat, nlon):
            ERROR(
                f"{self.name}: header says {nlat}x{nlon}, found"
                f" {data.shape[0]}x{data.shape[1]}",
                ParseError(f"snapshot shape mismatch in {self.name}"),
            )
        attrs = {'field': name, 'day': day, 'nlat': nlat, 'nlon': nlon}
        if dtype == 'dict':
            return {**attrs, 'data': data}
        return _frame(data, attrs)

    @classmethod
    def write(cls, fpath, data, field='pv', day=0.0, **kwargs):
        data = np.asarray(data, dtype=float)
        nlat, nlon = data.shape
        with open(fpath, 'wb') as f:
            f.write(f"{field} {day:g} {nlat} {nlon}\n".encode())
            np.savetxt(f, data, fmt='%.17g')
        logger.debug(f'wrote snapshot file\n  {fpath}')
        return os.stat(fpath).st_size


class SnapshotParquet(ReadWrite):
    """binary twin of Snapshot, header kept as schema metadata"""

    schema = pa.schema(
        [
            ('lat', pa.float64()),
            ('lon', pa.float64()),
            ('value', pa.float64()),
        ]
    )

    def scan(self):
        pass

    def parse(self, section, dtype='df'):
        table = pq.read_table(self.name)
        raw = table.schema.metadata or {}
        meta = {k.decode(): v.decode() for k, v in raw.items()}
        if 'nlat' not in meta:
            ERROR(f"{self.name} carries no snapshot header", ParseError)
        nlat, nlon = int(meta['nlat']), int(meta['nlon'])
        data = table.column('value').to_numpy().reshape(nlat, nlon)
        attrs = {
            'field': meta['field'],
            'day': float(meta['day']),
            'nlat': nlat,
            'nlon': nlon,
        }
        if dtype == 'dict':
            return {**attrs, 'data': data}
        return _frame(data, attrs)

    @classmethod
    def write(cls, fpath, data, field='pv', day=0.0, **kwargs):
        data = np.asarray(data, dtype=float)
        nlat, nlon = data.shape
        lat, lon = _grid(nlat, nlon)
        meta = {'field': field, 'day': f"{day:g}", 'nlat': nlat, 'nlon': nlon}
        table = pa.table(
            {
                'lat': np.repeat(np.rad2deg(lat), nlon),
                'lon': np.tile(np.rad2deg(lon), nlat),
                'value': data.ravel(),
            },
            schema=cls.schema.with_metadata(
                {k: str(v) for k, v in meta.items()}
            ),
        )
        pq.write_table(table, fpath)
        logger.debug(f'wrote parquet snapshot\n  {fpath}')
        return os.stat(fpath).st_size
