"""Casimir dissipation (energy-neutral) and biharmonic diffusion."""

__all__ = [
    'StabilizationParams',
    'casimir_derivative_field',
    'w_tilde',
    'cd_tendency',
    'vector_laplacian',
    'bd_tendency',
    'stabilization_tendency',
]

from dataclasses import dataclass

import numpy as np

from . import ERROR, WARNING, ConfigError
from . import ops
from .core import PhysParams, State, _check_depth, potential_vorticity
from .core import vorticity_flux


@dataclass(frozen=True)
class StabilizationParams:
    theta: float = 0.0  # Casimir coefficient [m5 s]
    nu: float = 0.0  # biharmonic coefficient [m4/s]

    def __post_init__(self):
        for name in ('theta', 'nu'):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                ERROR(
                    f"stabilization.{name} must be finite and >= 0,"
                    f" got {value}",
                    ConfigError,
                )
        if self.theta > 0 and self.nu > 0:
            WARNING(
                f"both Casimir (theta={self.theta:g}) and biharmonic"
                f" (nu={self.nu:g}) stabilization are active"
            )

    @property
    def active(self):
        return self.theta > 0 or self.nu > 0


def casimir_derivative_field(m, s: State, p: PhysParams):
    """W^C = 2 grad_t(q) / h bar, the edge representative of dC/dM"""
    hbar = ops.edge_mean_depth(m, s.h)
    _check_depth(hbar, p.eps_h, 'edge')
    q = potential_vorticity(m, s, p)
    return 2.0 * ops.grad_t(m, q) / hbar


def w_tilde(m, s: State, p: PhysParams):
    WC = casimir_derivative_field(m, s, p)
    div_v = ops.edge_mean_depth(m, ops.div(m, s.V))
    div_w = ops.edge_mean_depth(m, ops.div(m, WC))
    dcdm = ops.dual_average_vector(m, ops.reconstruct_velocity(m, WC))
    u = ops.dual_average_vector(m, ops.reconstruct_velocity(m, s.V))
    twist = np.sum(np.cross(dcdm, u) * m.vertices, axis=-1)
    return WC * div_v - s.V * div_w - ops.grad_t(m, twist)


def cd_tendency(m, s: State, p: PhysParams, W=None):
    """diff^CD: the momentum operator of det driven by W~ instead of V"""
    if W is None:
        W = w_tilde(m, s, p)
    hbar = ops.edge_mean_depth(m, s.h)
    mass_div = ops.edge_mean_depth(m, ops.div(m, hbar * s.V))
    mixed = 4.0 * (m.ops.kinetic @ (s.V * W))
    return (
        -vorticity_flux(m, ops.curl(m, W), s.V, s.h)
        + W / hbar * mass_div
        + 0.5 * ops.grad_n(m, mixed)
    )


def vector_laplacian(m, V):
    """grad_n(div V) - grad_t(curl V)"""
    return ops.grad_n(m, ops.div(m, V)) - ops.grad_t(m, ops.curl(m, V))


def bd_tendency(m, V):
    """diff^BD = Lap(Lap(V))"""
    return vector_laplacian(m, vector_laplacian(m, V))


def stabilization_tendency(m, s: State, p: PhysParams, stab):
    """-theta diff^CD - nu diff^BD, inactive terms skipped"""
    out = np.zeros(m.n_edges)
    if stab.theta > 0:
        out -= stab.theta * cd_tendency(m, s, p)
    if stab.nu > 0:
        out -= stab.nu * bd_tendency(m, s.V)
    return out
