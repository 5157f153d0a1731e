"""Location-uncertainty transport noise: basis, increments, tendencies."""

__all__ = [
    'NoiseConfig',
    'NoiseModel',
    'build_noise_basis',
    'sample_increment',
    'noise_displacement',
    'sto_v',
    'sto_h',
    'MODES',
]

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import lpmv

from . import ERROR, WARNING, ConfigError, DimensionMismatch, logger
from . import ops
from .func.geometry import east_north, lonlat, tangent

MODES = ('homogeneous', 'inhomogeneous', 'file')


@dataclass(frozen=True)
class NoiseConfig:
    mode: str = 'inhomogeneous'
    n_modes: int = 8
    lmax: int = 2
    amplitude: float = 100.0  # max |Phi| per mode [m s^-1/2]
    envelope_center: float = 45.0  # deg
    envelope_width: float = 15.0  # deg
    envelope_floor: float = 0.1
    path: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            ERROR(
                f"unknown noise mode '{self.mode}', choose from {MODES}",
                ConfigError,
            )
        if int(self.n_modes) != self.n_modes or self.n_modes <= 0:
            ERROR(
                f"noise.n_modes must be a positive integer, got"
                f" {self.n_modes}",
                ConfigError,
            )
        if self.mode == 'inhomogeneous':
            if self.lmax < 1:
                ERROR(f"noise.lmax must be >= 1, got {self.lmax}", ConfigError)
            available = (self.lmax + 1) ** 2 - 1
            if self.n_modes > available:
                ERROR(
                    f"noise.n_modes={self.n_modes} exceeds the {available}"
                    f" rotational modes up to degree lmax={self.lmax}",
                    ConfigError,
                )
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0):
            ERROR(
                f"noise.amplitude must be >= 0, got {self.amplitude}",
                ConfigError,
            )
        if self.envelope_width <= 0 or not 0 <= self.envelope_floor <= 1:
            ERROR(
                "noise envelope needs width > 0 and 0 <= floor <= 1",
                ConfigError,
            )
        if self.mode == 'file' and not self.path:
            ERROR("noise mode 'file' needs noise.path", ConfigError)


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Time-frozen basis Phi_n with its variance tensor a = sum Phi Phi^T.

    ``cell_basis`` (N, cells, 3) and ``edge_basis`` (N, edges, 3) hold the
    amplitude-scaled fields at circumcenters and edge midpoints.
    """

    mode: str
    amplitudes: np.ndarray
    cell_basis: np.ndarray
    edge_basis: np.ndarray
    homogeneous: bool
    edge_normal_basis: np.ndarray = field(repr=False)
    a_cell: np.ndarray = field(repr=False)
    a_edge: np.ndarray = field(repr=False)
    div_a_edge: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ('amplitudes', 'cell_basis', 'edge_basis', 'a_cell'):
            getattr(self, name).flags.writeable = False

    def __repr__(self):
        return (
            f"<NoiseModel '{self.mode}' at {hex(id(self))}, {self.n_modes}"
            f" modes, max amplitude {np.max(self.amplitudes, initial=0):g}>"
        )

    @property
    def n_modes(self):
        return len(self.amplitudes)

    @classmethod
    def from_fields(cls, m, mode, amplitudes, cell_basis, edge_basis, homog):
        a_cell = np.einsum('nci,ncj->cij', cell_basis, cell_basis)
        a_edge = np.einsum('nei,nej->eij', edge_basis, edge_basis)
        # (div a)_j = sum_i d_i a_ij, partials from the edge gradient
        div_a = np.zeros((m.n_edges, 3))
        for i in range(3):
            for j in range(3):
                div_a[:, j] += ops.edge_gradient(m, a_cell[:, i, j])[:, i]
        edge_basis = np.asarray(edge_basis, dtype=float)
        return cls(
            mode=mode,
            amplitudes=np.asarray(amplitudes, dtype=float),
            cell_basis=np.asarray(cell_basis, dtype=float),
            edge_basis=edge_basis,
            homogeneous=bool(homog),
            edge_normal_basis=np.einsum(
                'nek,ek->ne', edge_basis, m.edge_normal
            ),
            a_cell=a_cell,
            a_edge=a_edge,
            div_a_edge=div_a,
        )

    def sigma_dB(self, inc, where='edge'):
        inc = self._check(inc)
        basis = self.edge_basis if where == 'edge' else self.cell_basis
        return np.einsum('n,nek->ek', inc, basis)

    def _check(self, inc):
        inc = np.asarray(inc, dtype=float)
        if inc.shape != (self.n_modes,):
            ERROR(
                f"Brownian increment has shape {inc.shape}, noise model has"
                f" {self.n_modes} modes",
                DimensionMismatch,
            )
        return inc


# -------------------------------------------------------------


def _tight_frame(N):
    """N unit axes e_n with sum e_n e_n^T = (N/3) I for N >= 3"""
    phase = 2.0 * np.pi * np.arange(N) / N
    return np.c_[
        np.sqrt(2.0 / 3.0) * np.cos(phase),
        np.sqrt(2.0 / 3.0) * np.sin(phase),
        np.full(N, np.sqrt(1.0 / 3.0)),
    ]


def _rigid_rotations(x, axes):
    return np.stack([np.cross(x, e) for e in axes])


def _harmonic_degrees(lmax):
    return [(d, mm) for d in range(1, lmax + 1) for mm in range(-d, d + 1)]


def _rotational_mode(x, deg, mm, cfg):
    """k x grad(env * psi_lm) on the unit sphere at unit vectors x"""
    lon, lat = lonlat(x)
    mu, cos = np.sin(lat), np.maximum(np.cos(lat), 1e-300)
    am = abs(mm)
    P = lpmv(am, deg, mu)
    Pm1 = lpmv(am, deg - 1, mu) if am <= deg - 1 else np.zeros_like(mu)
    # dP/dphi = cos(phi) dP/dmu = -(l mu P_l - (l + m) P_{l-1}) / cos(phi)
    dP = -(deg * mu * P - (deg + am) * Pm1) / cos
    if mm >= 0:
        trig, dtrig = np.cos(am * lon), -am * np.sin(am * lon)
    else:
        trig, dtrig = np.sin(am * lon), am * np.cos(am * lon)
    psi, dpsi_dlon, dpsi_dlat = P * trig, P * dtrig, dP * trig

    if cfg.mode == 'inhomogeneous':
        c = np.deg2rad(cfg.envelope_center)
        w = np.deg2rad(cfg.envelope_width)
        bump = np.exp(-(((lat - c) / w) ** 2))
        env = cfg.envelope_floor + (1.0 - cfg.envelope_floor) * bump
        denv = (1.0 - cfg.envelope_floor) * bump * (-2.0 * (lat - c) / w**2)
        dpsi_dlat = denv * psi + env * dpsi_dlat
        dpsi_dlon = env * dpsi_dlon

    east, north = east_north(x)
    return (dpsi_dlon / cos)[:, None] * north - dpsi_dlat[:, None] * east


def build_noise_basis(cfg: NoiseConfig, m) -> NoiseModel:
    """assemble the N noise modes on the mesh"""
    if cfg.mode == 'file':
        from .spheronoise import Spheronoise

        return Spheronoise.load(cfg.path, m)

    N, A = int(cfg.n_modes), float(cfg.amplitude)
    xc, xe = m.cell_circumcenter, m.edge_midpoint
    if cfg.mode == 'homogeneous':
        if N < 3:
            WARNING(
                f"{N} homogeneous noise modes cannot give an isotropic"
                " variance, use 3 or more"
            )
        axes = _tight_frame(N)
        cell, edge = _rigid_rotations(xc, axes), _rigid_rotations(xe, axes)
    else:
        degrees = _harmonic_degrees(cfg.lmax)[:N]
        cell = np.stack([_rotational_mode(xc, *dm, cfg) for dm in degrees])
        edge = np.stack([_rotational_mode(xe, *dm, cfg) for dm in degrees])
        peak = np.max(np.linalg.norm(cell, axis=-1), axis=1)
        peak[peak == 0] = 1.0
        cell = cell / peak[:, None, None]
        edge = edge / peak[:, None, None]

    cell = tangent(A * cell, xc[None])
    edge = tangent(A * edge, xe[None])
    nm = NoiseModel.from_fields(
        m, cfg.mode, np.full(N, A), cell, edge, cfg.mode == 'homogeneous'
    )
    logger.debug(f"built {nm}")
    return nm


def sample_increment(rng: np.random.Generator, dt: float, N: int):
    """N independent Normal(0, dt) draws"""
    if dt < 0:
        ERROR(f"time step must be >= 0, got {dt}", ValueError)
    return rng.normal(0.0, np.sqrt(dt), int(N))


def noise_displacement(nm: NoiseModel, inc):
    """sigma dB = sum_n Phi_n dbeta_n at the cell circumcenters"""
    return nm.sigma_dB(inc, where='cell')


# -------------------------------------------------------------


def _transport(m, nm, F, sdb, dt):
    """-sigma dB . grad F + (dt/2)(div a . grad F) at edges, and the flux
    (a grad F) . n whose divergence completes the correction"""
    G = ops.edge_gradient(m, F)
    edge_part = -np.sum(sdb * G, axis=-1)
    edge_part += 0.5 * dt * np.sum(nm.div_a_edge * G, axis=-1)
    flux_n = ops.normal_component(m, np.einsum('eij,ej->ei', nm.a_edge, G))
    return edge_part, flux_n


def sto_v(m, s, nm: NoiseModel, inc, dt: float):
    """stochastic momentum increment over one step, per edge"""
    sdb = nm.sigma_dB(inc)
    u = ops.reconstruct_velocity(m, s.V)
    du = np.zeros((m.n_edges, 3))
    for k in range(3):
        edge_part, flux_n = _transport(m, nm, u[:, k], sdb, dt)
        corr = ops.edge_mean_depth(m, ops.div(m, flux_n))
        du[:, k] = edge_part + 0.5 * dt * corr
    return ops.normal_component(m, du)


def sto_h(m, s, nm: NoiseModel, inc, dt: float):
    """stochastic depth increment over one step, per cell"""
    sdb = nm.sigma_dB(inc)
    edge_part, flux_n = _transport(m, nm, s.h, sdb, dt)
    return ops.cell_average(m, edge_part) + 0.5 * dt * ops.div(m, flux_n)
