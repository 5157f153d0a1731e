import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rswlu
from rswlu import ops
from rswlu.core import PhysParams, State
from rswlu.diagnostics import energy_gradient, enstrophy_gradient
from rswlu.func.geometry import tangent
from rswlu.mesh import build_icosahedral_mesh
from rswlu.stabilization import (
    StabilizationParams,
    bd_tendency,
    casimir_derivative_field,
    cd_tendency,
    stabilization_tendency,
    vector_laplacian,
    w_tilde,
)

rswlu.logger.level = 999

R = 6.371229e6
H = 1.0e4

mesh2 = build_icosahedral_mesh(2, R)
mesh3 = build_icosahedral_mesh(3, R)
p = PhysParams()


def smooth_state(m, seed, speed=20.0, bump=0.0):
    """linear-in-position wind and depth, projected on the sphere"""
    rng = np.random.default_rng(seed)
    B, c = rng.normal(size=(3, 3)), rng.normal(size=3)
    x = m.edge_midpoint
    u = tangent(x @ B.T + c, x)
    u *= speed / np.max(np.linalg.norm(u, axis=1))
    h = H + bump * (m.cell_circumcenter @ rng.normal(size=3))
    return State(ops.normal_component(m, u), h)


def test_params():
    assert not StabilizationParams().active
    assert StabilizationParams(theta=5e21).active
    for kw in [{'theta': -1.0}, {'nu': -1.0}, {'nu': np.inf}]:
        with pytest.raises(rswlu.ConfigError):
            StabilizationParams(**kw)


def test_casimir_field_constant_pv():
    s = State.rest(mesh2, H)
    no_rotation = PhysParams(planet_rotation=0.0)
    assert np.all(casimir_derivative_field(mesh2, s, no_rotation) == 0)


def test_casimir_field_rest_state():
    m = mesh2
    s = State.rest(m, H)
    f = p.coriolis(m)
    expected = 2.0 * (f[m.dual_minus] - f[m.dual_plus]) / (
        m.primal_edge_len * H * H
    )
    WC = casimir_derivative_field(m, s, p)
    assert np.allclose(WC, expected, rtol=1e-12)


def test_w_tilde_zero_velocity():
    assert np.all(w_tilde(mesh2, State.rest(mesh2, H), p) == 0)


def test_cd_rest_state():
    assert np.all(cd_tendency(mesh2, State.rest(mesh2, H), p) == 0)


@pytest.mark.parametrize('seed', range(5))
def test_cd_energy_neutral(seed):
    m = mesh2
    s = smooth_state(m, seed, bump=100.0)
    dEdV, _ = energy_gradient(m, s, p)
    tend = -5e21 * cd_tendency(m, s, p)
    assert abs(np.sum(dEdV * tend)) < 1e-9 * np.sum(np.abs(dEdV * tend))


@pytest.mark.parametrize('seed', range(10))
def test_cd_removes_enstrophy(seed):
    m = mesh3
    s = smooth_state(m, seed)
    dCdV = enstrophy_gradient(m, s, p)
    tend = -5e21 * cd_tendency(m, s, p)
    pairing = np.sum(dCdV * tend)
    assert pairing <= 1e-9 * np.sum(np.abs(dCdV * tend))


def rough_state(m, seed, speed=20.0, bump=100.0):
    rng = np.random.default_rng(seed)
    V = speed * rng.normal(size=m.n_edges)
    h = H + bump * rng.uniform(-1, 1, m.n_cells)
    return State(V, h)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_cd_energy_neutral_rough(seed):
    m = mesh2
    s = rough_state(m, seed)
    dEdV, _ = energy_gradient(m, s, p)
    tend = -5e21 * cd_tendency(m, s, p)
    assert abs(np.sum(dEdV * tend)) < 1e-9 * np.sum(np.abs(dEdV * tend))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_cd_removes_enstrophy_rough(seed):
    m = mesh2
    s = rough_state(m, seed)
    dCdV = enstrophy_gradient(m, s, p)
    tend = -5e21 * cd_tendency(m, s, p)
    assert np.sum(dCdV * tend) <= 1e-9 * np.sum(np.abs(dCdV * tend))


def test_vector_laplacian_of_gradient():
    m = mesh3
    F = np.random.default_rng(0).normal(size=m.n_cells)
    V = ops.grad_n(m, F)
    expected = ops.grad_n(m, ops.div(m, V))
    assert np.allclose(
        vector_laplacian(m, V), expected, rtol=0, atol=1e-9 * np.abs(expected).max()
    )
    assert np.all(vector_laplacian(m, np.zeros(m.n_edges)) == 0)


def test_vector_laplacian_rigid_rotation():
    m = build_icosahedral_mesh(4, 1.0)
    V = ops.normal_component(m, np.cross([0.0, 0.0, 1.0], m.edge_midpoint))
    lap = vector_laplacian(m, V)
    assert np.max(np.abs(lap + 2.0 * V)) < 0.1 * 2.0 * np.max(np.abs(V))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_bd_dissipates(seed):
    m = mesh2
    V = np.random.default_rng(seed).normal(size=m.n_edges)
    weight = m.ops.inner_weight * H
    tend = -3.1e16 * bd_tendency(m, V)
    assert np.sum(weight * V * tend) <= 1e-12 * np.sum(np.abs(weight * V * tend))


def test_bd_linear():
    m = mesh2
    V = np.random.default_rng(1).normal(size=m.n_edges)
    assert np.allclose(bd_tendency(m, 3.0 * V), 3.0 * bd_tendency(m, V))
    assert np.all(bd_tendency(m, np.zeros(m.n_edges)) == 0)


def test_stabilization_tendency():
    m = mesh2
    s = smooth_state(m, 3)
    off = stabilization_tendency(m, s, p, StabilizationParams())
    assert np.all(off == 0)
    bd = stabilization_tendency(m, s, p, StabilizationParams(nu=2.0))
    assert np.allclose(bd, -2.0 * bd_tendency(m, s.V))
    cd = stabilization_tendency(m, s, p, StabilizationParams(theta=3.0))
    assert np.allclose(cd, -3.0 * cd_tendency(m, s, p))
