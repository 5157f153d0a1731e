import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rswlu
from rswlu import ops
from rswlu.func.geometry import lonlat, tangent, xyz
from rswlu.mesh import build_icosahedral_mesh

rswlu.logger.level = 999

meshes = {L: build_icosahedral_mesh(L, 1.0) for L in [2, 3, 4]}
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rigid_rotation(m, omega=1.0, where='edge'):
    x = m.edge_midpoint if where == 'edge' else m.cell_circumcenter
    return omega * np.cross([0.0, 0.0, 1.0], x)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, level=st.sampled_from([2, 3, 4]))
def test_curl_grad_vanishes(seed, level):
    m = meshes[level]
    F = np.random.default_rng(seed).normal(size=m.n_cells)
    circulation = ops.curl(m, ops.grad_n(m, F)) * m.dual_area
    assert np.max(np.abs(circulation)) < 1e-12 * np.max(np.abs(F))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, level=st.sampled_from([2, 3, 4]))
def test_div_grad_t_vanishes(seed, level):
    m = meshes[level]
    G = np.random.default_rng(seed).normal(size=m.n_duals)
    flux = ops.div(m, ops.grad_t(m, G)) * m.cell_area
    assert np.max(np.abs(flux)) < 1e-12 * np.max(np.abs(G))


def test_grad_n_definition():
    m = meshes[2]
    assert np.all(ops.grad_n(m, np.full(m.n_cells, 3.0)) == 0)
    F = np.zeros(m.n_cells)
    e = 11
    i, j = m.edge_cells[e]
    F[j] = 2.0
    g = ops.grad_n(m, F)
    assert g[e] == pytest.approx(2.0 / m.dual_edge_len[e], rel=1e-14)


def test_grad_t_definition():
    m = meshes[2]
    assert np.all(ops.grad_t(m, np.full(m.n_duals, -1.0)) == 0)
    e = 5
    G = np.zeros(m.n_duals)
    G[m.dual_minus[e]] = 3.0
    assert ops.grad_t(m, G)[e] == pytest.approx(
        3.0 / m.primal_edge_len[e], rel=1e-14
    )


def test_div_closed_surface():
    m = meshes[3]
    V = np.random.default_rng(1).normal(size=m.n_edges)
    total = np.sum(m.cell_area * ops.div(m, V))
    assert abs(total) < 1e-12 * np.sum(np.abs(V) * m.primal_edge_len)
    assert np.all(ops.div(m, np.zeros(m.n_edges)) == 0)


def test_div_rigid_rotation_converges():
    errs = []
    for L in [2, 3, 4]:
        m = meshes[L]
        V = ops.normal_component(m, rigid_rotation(m))
        errs.append(np.max(np.abs(ops.div(m, V))))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.05


def test_curl_rigid_rotation():
    m = meshes[4]
    V = ops.normal_component(m, rigid_rotation(m))
    zeta = ops.curl(m, V)
    exact = 2.0 * m.vertices[:, 2]
    assert np.max(np.abs(zeta - exact)) < 0.05


def test_reconstruct_uniform_zonal_flow():
    m = meshes[4]
    u0 = 10.0
    # solid-body zonal wind, u0 at the equator
    u = u0 * rigid_rotation(m)
    V = ops.normal_component(m, u)
    rec = ops.reconstruct_velocity(m, V)
    exact = u0 * rigid_rotation(m, where='cell')
    err = np.linalg.norm(rec - exact, axis=1)
    assert np.max(err) < 0.02 * u0
    assert np.all(ops.reconstruct_velocity(m, np.zeros(m.n_edges)) == 0)


def test_reconstruct_tangent():
    m = meshes[3]
    V = np.random.default_rng(0).normal(size=m.n_edges)
    rec = ops.reconstruct_velocity(m, V)
    assert np.max(np.abs(np.sum(rec * m.cell_circumcenter, 1))) < 1e-13


def test_dual_average():
    m = meshes[3]
    h = np.full(m.n_cells, 7.5)
    assert np.allclose(ops.dual_average_cell_scalar(m, h), 7.5, rtol=1e-13)

    one = np.zeros(m.n_cells)
    one[4] = 1.0
    hz = ops.dual_average_cell_scalar(m, one)
    corners = m.faces[4]
    expected = m.overlap_area[4] / m.dual_area[corners]
    assert np.allclose(hz[corners], expected, rtol=1e-13)
    assert np.count_nonzero(hz) == 3

    h = np.random.default_rng(3).uniform(1, 2, m.n_cells)
    dual_mass = np.sum(ops.dual_average_cell_scalar(m, h) * m.dual_area)
    assert dual_mass == pytest.approx(np.sum(h * m.cell_area), rel=1e-12)


def test_dual_average_vector():
    m = meshes[3]
    u = np.tile([1.0, 2.0, 3.0], (m.n_cells, 1))
    uz = ops.dual_average_vector(m, u)
    const = np.tile([1.0, 2.0, 3.0], (m.n_duals, 1))
    assert np.allclose(uz, tangent(const, m.vertices), atol=1e-13)


def test_edge_mean_depth():
    m = meshes[2]
    h = np.random.default_rng(5).uniform(1, 2, m.n_cells)
    i, j = m.edge_cells.T
    assert np.allclose(ops.edge_mean_depth(m, h), 0.5 * (h[i] + h[j]))
    h = np.zeros(m.n_cells)
    h[m.edge_cells[0]] = [2.0, 4.0]
    assert ops.edge_mean_depth(m, h)[0] == 3.0


def test_edge_partial_derivatives():
    m = meshes[4]
    G = ops.edge_gradient(m, np.full(m.n_cells, 4.0))
    assert np.all(G == 0)

    F = m.cell_circumcenter[:, 0]
    G = ops.edge_gradient(m, F)
    # normal part is grad_n by construction
    assert np.allclose(np.sum(G * m.edge_normal, 1), ops.grad_n(m, F))
    # tangential gradient of x on the unit sphere: e_x - x r
    x = m.edge_midpoint
    exact = np.array([1.0, 0.0, 0.0]) - x[:, :1] * x
    err = np.linalg.norm(G - exact, axis=1)
    assert np.mean(err) < 0.1
    assert np.max(np.abs(np.sum(G * x, 1))) < 1e-11


def test_normal_component_and_inner():
    m = meshes[2]
    lon, lat = lonlat(m.edge_midpoint)
    assert np.allclose(xyz(lon, lat), m.edge_midpoint)
    V = ops.normal_component(m, m.edge_normal * 2.0)
    assert np.allclose(V, 2.0)
    assert ops.edge_inner(m, np.ones(m.n_edges), np.ones(m.n_edges)) == (
        pytest.approx(np.sum(m.primal_edge_len * m.dual_edge_len))
    )
