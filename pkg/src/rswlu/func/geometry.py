"""Unit-sphere geometry on row-listed 3-vectors."""

__all__ = [
    'normalize',
    'arc',
    'signed_area',
    'circumcenter',
    'lonlat',
    'xyz',
    'east_north',
    'tangent',
]

import numpy as np


def normalize(a, axis=-1):
    """Normalize row-listed vectors of a"""
    a = np.asarray(a, dtype=float)
    l2 = np.linalg.norm(a, axis=axis, keepdims=True)
    l2[l2 == 0] = 1.0
    return a / l2


def arc(p, q):
    """Great-circle angle between unit vectors p and q"""
    return np.arctan2(
        np.linalg.norm(np.cross(p, q), axis=-1), np.sum(p * q, axis=-1)
    )


def signed_area(a, b, c):
    """Spherical excess of triangle (a, b, c), positive if counterclockwise
    seen from outside the sphere"""
    triple = np.sum(a * np.cross(b, c), axis=-1)
    denom = (
        1.0
        + np.sum(a * b, axis=-1)
        + np.sum(b * c, axis=-1)
        + np.sum(c * a, axis=-1)
    )
    return 2.0 * np.arctan2(triple, denom)


def circumcenter(a, b, c):
    """Spherical circumcenter of counterclockwise triangles"""
    return normalize(np.cross(b - a, c - a))


def lonlat(x):
    """(lon, lat) in radians of unit vectors, lon in (-pi, pi]"""
    x = np.atleast_2d(x)
    lon = np.arctan2(x[:, 1], x[:, 0])
    lat = np.arcsin(np.clip(x[:, 2], -1.0, 1.0))
    return lon, lat


def xyz(lon, lat):
    lon, lat = np.asarray(lon, float), np.asarray(lat, float)
    return np.stack(
        [np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)],
        axis=-1,
    )


def east_north(x):
    """Local unit east and north vectors at unit vectors x"""
    lon, lat = lonlat(x)
    east = np.stack([-np.sin(lon), np.cos(lon), np.zeros_like(lon)], -1)
    north = np.stack(
        [
            -np.sin(lat) * np.cos(lon),
            -np.sin(lat) * np.sin(lon),
            np.cos(lat),
        ],
        -1,
    )
    return east, north


def tangent(u, r):
    """Remove the component of u along the unit radials r"""
    return u - np.sum(u * r, axis=-1, keepdims=True) * r
