import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rswlu
from rswlu import ops
from rswlu.core import (
    PhysParams,
    State,
    continuity_tendency,
    det_tendency,
    potential_vorticity,
)
from rswlu.diagnostics import energy_gradient
from rswlu.mesh import build_icosahedral_mesh

rswlu.logger.level = 999

R = 6.371229e6
H = 1.0e4

mesh2 = build_icosahedral_mesh(2, R)
mesh4 = build_icosahedral_mesh(4, R)
p = PhysParams()


def random_state(m, seed, speed=20.0, bump=100.0):
    rng = np.random.default_rng(seed)
    V = speed * rng.normal(size=m.n_edges)
    h = H + bump * rng.uniform(-1, 1, m.n_cells)
    return State(V, h)


def test_state_shapes():
    s = State.rest(mesh2, H)
    assert s.check(mesh2) is s
    with pytest.raises(rswlu.DimensionMismatch):
        State(np.zeros(3), s.h).check(mesh2)
    c = s.copy()
    assert c.V is not s.V and np.array_equal(c.h, s.h)


def test_pv_rest_state():
    s = State.rest(mesh2, H)
    q = potential_vorticity(mesh2, s, p)
    assert np.allclose(q, p.coriolis(mesh2) / H, rtol=1e-14, atol=0)
    f0 = PhysParams(planet_rotation=0.0)
    assert np.allclose(potential_vorticity(mesh2, s, f0), 0.0)


def test_pv_solid_body():
    m = mesh4
    omega = 1.0e-5
    u = omega * R * np.cross([0.0, 0.0, 1.0], m.edge_midpoint)
    s = State(ops.normal_component(m, u), np.full(m.n_cells, H))
    q = potential_vorticity(m, s, p)
    exact = (2 * omega + 2 * p.planet_rotation) * m.vertices[:, 2] / H
    assert np.max(np.abs(q - exact)) < 0.02 * np.max(np.abs(exact))


def test_pv_degenerate_depth():
    with pytest.raises(rswlu.DegenerateDepth):
        potential_vorticity(mesh2, State.rest(mesh2, 0.0), p)


def test_rest_state_is_steady():
    s = State.rest(mesh2, H)
    assert np.all(det_tendency(mesh2, s, p) == 0)
    assert np.all(continuity_tendency(mesh2, s) == 0)


def test_pressure_gradient_only():
    m = mesh2
    h = H + 50.0 * np.exp(-(((m.cell_circumcenter[:, 2] - 0.5) / 0.2) ** 2))
    s = State(np.zeros(m.n_edges), h)
    no_rotation = PhysParams(planet_rotation=0.0)
    det = det_tendency(m, s, no_rotation)
    assert np.allclose(det, -no_rotation.g * ops.grad_n(m, h), rtol=1e-14)


def test_topography_enters_pressure():
    m = mesh2
    eta_b = 10.0 * m.cell_circumcenter[:, 0]
    s = State.rest(m, H)
    q = PhysParams(planet_rotation=0.0, eta_b=eta_b)
    assert np.allclose(det_tendency(m, s, q), -q.g * ops.grad_n(m, eta_b))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_energy_conservation(seed):
    m = mesh2
    s = random_state(m, seed)
    dEdV, dEdh = energy_gradient(m, s, p)
    dV, dh = det_tendency(m, s, p), continuity_tendency(m, s)
    rate = np.sum(dEdV * dV) + np.sum(dEdh * dh)
    scale = np.sum(np.abs(dEdV * dV)) + np.sum(np.abs(dEdh * dh))
    assert abs(rate) < 1e-10 * scale


def test_continuity():
    m = mesh2
    assert np.all(continuity_tendency(m, State.rest(m, H)) == 0)

    s = random_state(m, 7)
    total = np.sum(m.cell_area * continuity_tendency(m, s))
    assert abs(total) < 1e-12 * np.sum(np.abs(s.V) * H * m.primal_edge_len)

    V = np.random.default_rng(2).normal(size=m.n_edges)
    s = State(V, np.full(m.n_cells, H))
    assert np.allclose(continuity_tendency(m, s), -H * ops.div(m, V))


def test_coriolis_sampled_at_duals():
    f = p.coriolis(mesh2)
    assert f.shape == (mesh2.n_duals,)
    assert f.max() == pytest.approx(2 * p.planet_rotation)


def test_bad_params():
    with pytest.raises(ValueError):
        PhysParams(g=0.0)
