"""Barotropically unstable mid-latitude jet and the experiment presets."""

__all__ = [
    'GalewskyParams',
    'zonal_wind',
    'balanced_height',
    'galewsky_perturbation',
    'galewsky_init',
    'PRESETS',
    'REFERENCE_LEVEL',
    'preset_overrides',
    'experiment_preset',
]

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.integrate import IntegrationWarning

from . import ERROR, ConfigError, QuadratureFailure, UnknownPreset, logger
from .core import PhysParams, State
from .func.geometry import east_north, lonlat
from .ops import normal_component

EPSREL = 1.0e-10
LAT_TOL = 1.0e-12  # rad


@dataclass(frozen=True)
class GalewskyParams:
    u_max: float = 80.0  # m/s
    phi0: float = np.pi / 7.0  # rad
    phi1: float = np.pi / 2.0 - np.pi / 7.0  # rad
    mean_depth: float = 1.0e4  # m
    h_hat: float = 120.0  # m
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 15.0
    phi2: float = np.pi / 4.0  # rad
    perturbation: bool = True

    def __post_init__(self):
        if not self.phi0 < self.phi1:
            ERROR(
                f"galewsky.phi0 ({self.phi0}) must be below phi1"
                f" ({self.phi1})",
                ConfigError,
            )
        if self.u_max < 0:
            ERROR(
                f"galewsky.u_max must be >= 0, got {self.u_max}", ConfigError
            )
        if not self.mean_depth > 0:
            ERROR("galewsky.mean_depth must be > 0", ConfigError)
        if self.alpha <= 0 or self.beta <= 0:
            ERROR("galewsky.alpha and beta must be > 0", ConfigError)


def zonal_wind(phi, gp: GalewskyParams):
    """u(phi): smooth bump between phi0 and phi1, zero outside"""
    phi = np.asarray(phi, dtype=float)
    e_n = np.exp(-4.0 / (gp.phi1 - gp.phi0) ** 2)
    inside = (phi > gp.phi0) & (phi < gp.phi1)
    u = np.zeros_like(phi)
    x = phi[inside]
    u[inside] = gp.u_max / e_n * np.exp(1.0 / ((x - gp.phi0) * (x - gp.phi1)))
    return u


def _balance_integrand(phi, gp, p, radius):
    u = zonal_wind(phi, gp)
    f = 2.0 * p.planet_rotation * np.sin(phi)
    return radius * u * (f + np.tan(phi) * u / radius)


def balanced_height(lat, gp: GalewskyParams, p: PhysParams, radius, area=None):
    """Depth in gradient-wind balance with the jet.

    g h = g h_c - integral of a u (f + tan(phi) u / a) up to each latitude,
    evaluated once per unique latitude by adaptive quadrature between
    consecutive latitudes; h_c puts the area mean at ``gp.mean_depth``.
    """
    lat = np.asarray(lat, dtype=float)
    uniq, inverse = np.unique(lat, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    # latitudes apart by roundoff share one circle
    first = np.diff(uniq, prepend=-np.inf) > LAT_TOL
    inverse = (np.cumsum(first) - 1)[inverse]
    uniq = uniq[first]
    clipped = np.clip(uniq, gp.phi0, gp.phi1)

    cumulative = np.zeros(len(uniq))
    if gp.u_max > 0:
        total, lo = 0.0, gp.phi0
        for k, hi in enumerate(clipped):
            if hi > lo:
                with warnings.catch_warnings():
                    warnings.simplefilter('error', IntegrationWarning)
                    try:
                        piece, err = integrate.quad(
                            _balance_integrand,
                            lo,
                            hi,
                            args=(gp, p, radius),
                            epsabs=0.0,
                            epsrel=EPSREL,
                            limit=200,
                        )
                    except IntegrationWarning as w:
                        ERROR(
                            f"balance integral over [{lo:.6f}, {hi:.6f}]"
                            f" did not converge: {w}",
                            QuadratureFailure,
                        )
                if err > EPSREL * max(abs(piece), 1e-300) and err > 1e-12:
                    ERROR(
                        f"balance integral over [{lo:.6f}, {hi:.6f}]:"
                        f" error estimate {err:.3e} above tolerance",
                        QuadratureFailure,
                    )
                total += piece
                lo = hi
            cumulative[k] = total

    B = cumulative[inverse] / p.g
    weights = np.ones_like(lat) if area is None else np.asarray(area)
    h_c = gp.mean_depth + np.sum(B * weights) / np.sum(weights)
    return h_c - B


def galewsky_perturbation(lon, lat, gp: GalewskyParams):
    """h_hat cos(phi) exp(-(lambda/alpha)^2) exp(-((phi2 - phi)/beta)^2)"""
    return (
        gp.h_hat
        * np.cos(lat)
        * np.exp(-((lon / gp.alpha) ** 2))
        * np.exp(-(((gp.phi2 - lat) / gp.beta) ** 2))
    )


def galewsky_init(m, p: PhysParams, gp: GalewskyParams = None) -> State:
    """balanced jet on the edges and cells of m, perturbed if enabled"""
    if gp is None:
        gp = GalewskyParams()
    _, elat = lonlat(m.edge_midpoint)
    east, _ = east_north(m.edge_midpoint)
    V = normal_component(m, zonal_wind(elat, gp)[:, None] * east)

    clon, clat = lonlat(m.cell_circumcenter)
    h = balanced_height(clat, gp, p, m.sphere_radius, m.cell_area)
    if gp.perturbation:
        h = h + galewsky_perturbation(clon, clat, gp)
    logger.debug(
        f"galewsky state: max |V| {np.max(np.abs(V)):.3f} m/s,"
        f" h in [{h.min():.2f}, {h.max():.2f}] m"
    )
    return State(V, h)


# -------------------------------------------------------------

REFERENCE_LEVEL = 5  # 20480 triangles

PRESETS = {
    'no_diff': {'theta': 0.0, 'nu': 0.0},
    'cd': {'theta': 5.0e21, 'nu': 0.0},  # m5 s
    'bd': {'theta': 0.0, 'nu': 3.1e16},  # m4/s
}


def preset_overrides(name: str, level: int = None) -> dict:
    """Nested config values of a named experiment.

    At a level other than the reference, theta scales with the grid spacing
    cubed and nu with its fourth power (spacing halves per level).
    """
    key = str(name).strip().lower()
    if key not in PRESETS:
        ERROR(
            f"unknown preset '{name}', choose from {list(PRESETS)}",
            UnknownPreset(f"unknown preset '{name}'"),
        )
    level = REFERENCE_LEVEL if level is None else int(level)
    ratio = 2.0 ** (REFERENCE_LEVEL - level)
    coef = PRESETS[key]
    return {
        'mesh': {'level': level},
        'stabilization': {
            'theta': coef['theta'] * ratio**3,
            'nu': coef['nu'] * ratio**4,
        },
        'noise': {'enabled': True},
        'integrator': {'days': 12.0, 'scheme': 'euler_maruyama_split'},
        'ensemble': {'members': 20},
        'output': {'mean_days': [6.0]},
    }


def experiment_preset(name: str, level: int = None):
    """full RunConfig of a named experiment"""
    from .config import RunConfig

    cfg = RunConfig()
    cfg.update(preset_overrides(name, level))
    cfg['preset'] = str(name).strip().lower()
    return cfg
