import numpy as np
import pytest

import rswlu
from rswlu import ops
from rswlu.core import State
from rswlu.mesh import build_icosahedral_mesh
from rswlu.noise import (
    NoiseConfig,
    NoiseModel,
    build_noise_basis,
    noise_displacement,
    sample_increment,
    sto_h,
    sto_v,
)

rswlu.logger.level = 999

R = 6.371229e6
H = 1.0e4

mesh2 = build_icosahedral_mesh(2, R)
mesh3 = build_icosahedral_mesh(3, R)


@pytest.mark.parametrize(
    'kw',
    [
        {'n_modes': 0},
        {'n_modes': -2},
        {'mode': 'white'},
        {'amplitude': -1.0},
        {'lmax': 1, 'n_modes': 4},
        {'envelope_floor': 2.0},
        {'mode': 'file'},
    ],
)
def test_config_errors(kw):
    with pytest.raises(rswlu.ConfigError):
        NoiseConfig(**kw)


def test_single_mode_variance():
    m = mesh2
    nm = build_noise_basis(NoiseConfig(n_modes=1, lmax=1), m)
    phi = nm.cell_basis[0]
    expected = np.einsum('ci,cj->cij', phi, phi)
    assert np.allclose(nm.a_cell, expected)


def test_homogeneous_isotropic_variance():
    m = mesh3
    nm = build_noise_basis(
        NoiseConfig(mode='homogeneous', n_modes=6, amplitude=1.0), m
    )
    assert nm.homogeneous
    trace = np.trace(nm.a_cell, axis1=1, axis2=2)
    assert np.max(np.abs(trace / trace.mean() - 1)) < 0.05


def test_homogeneous_few_modes():
    nm = build_noise_basis(NoiseConfig(mode='homogeneous', n_modes=2), mesh2)
    assert nm.n_modes == 2
    assert nm.a_edge.shape == (mesh2.n_edges, 3, 3)


def test_inhomogeneous_modes():
    m = mesh3
    cfg = NoiseConfig(n_modes=8, lmax=2, amplitude=100.0)
    nm = build_noise_basis(cfg, m)
    assert nm.n_modes == 8 and not nm.homogeneous
    # every mode peaks at the configured amplitude
    peaks = np.max(np.linalg.norm(nm.cell_basis, axis=-1), axis=1)
    assert np.allclose(peaks, 100.0)
    radial = np.einsum('nck,ck->nc', nm.cell_basis, m.cell_circumcenter)
    assert np.max(np.abs(radial)) < 1e-10


def div_to_curl(m, cfg):
    nm = build_noise_basis(cfg, m)
    return np.array(
        [
            np.max(np.abs(ops.div(m, b))) / np.max(np.abs(ops.curl(m, b)))
            for b in nm.edge_normal_basis
        ]
    )


def test_inhomogeneous_modes_divergence_converges():
    # first order in the grid spacing
    cfg = NoiseConfig(n_modes=8, lmax=2, amplitude=100.0)
    coarse = div_to_curl(mesh3, cfg)
    fine = div_to_curl(build_icosahedral_mesh(4, R), cfg)
    assert np.max(fine) < 0.7 * np.max(coarse)
    assert np.mean(fine) < 0.7 * np.mean(coarse)
    assert np.max(fine) < 0.06


def test_increments():
    dt = 0.5
    a = sample_increment(np.random.default_rng(42), dt, 4)
    b = sample_increment(np.random.default_rng(42), dt, 4)
    assert np.array_equal(a, b)
    assert np.all(sample_increment(np.random.default_rng(0), 0.0, 3) == 0)

    x = sample_increment(np.random.default_rng(7), dt, 100000)
    assert abs(x.mean()) < 4 * np.sqrt(dt) / np.sqrt(len(x))
    assert x.var() == pytest.approx(dt, rel=0.05)


def test_displacement_covariance():
    dt = 0.5
    nm = build_noise_basis(
        NoiseConfig(mode='homogeneous', n_modes=3, amplitude=1.0), mesh2
    )
    rng = np.random.default_rng(2024)
    draws = np.array(
        [
            noise_displacement(nm, sample_increment(rng, dt, nm.n_modes))
            for _ in range(10000)
        ]
    )
    x = draws - draws.mean(axis=0)
    cov = np.einsum('sci,scj->cij', x, x) / (len(x) - 1)
    expected = nm.a_cell * dt
    err = np.linalg.norm(cov - expected, axis=(1, 2)) / np.linalg.norm(
        expected, axis=(1, 2)
    )
    assert np.max(err) < 0.05


def test_increment_shape_checked():
    nm = build_noise_basis(NoiseConfig(n_modes=3), mesh2)
    with pytest.raises(rswlu.DimensionMismatch):
        noise_displacement(nm, np.zeros(4))
    assert noise_displacement(nm, np.zeros(3)).shape == (mesh2.n_cells, 3)


def test_zero_amplitude():
    m = mesh2
    nm = build_noise_basis(NoiseConfig(n_modes=3, amplitude=0.0), m)
    rng = np.random.default_rng(1)
    s = State(rng.normal(size=m.n_edges), H + rng.uniform(size=m.n_cells))
    inc = sample_increment(rng, 60.0, 3)
    assert np.all(sto_v(m, s, nm, inc, 60.0) == 0)
    assert np.all(sto_h(m, s, nm, inc, 60.0) == 0)


def test_constant_fields():
    m = mesh2
    nm = build_noise_basis(NoiseConfig(n_modes=5), m)
    inc = sample_increment(np.random.default_rng(2), 60.0, 5)
    s = State.rest(m, H)
    assert np.all(sto_h(m, s, nm, inc, 60.0) == 0)
    assert np.all(sto_v(m, s, nm, inc, 60.0) == 0)


def test_single_constant_mode_advection():
    # one spatially uniform mode: a is constant, so the Ito correction
    # vanishes and sto_h is -Phi . grad h dbeta
    m = mesh3
    phi = np.array([3.0, -1.0, 2.0])
    cell = np.tile(phi, (1, m.n_cells, 1))
    edge = np.tile(phi, (1, m.n_edges, 1))
    nm = NoiseModel.from_fields(m, 'file', np.ones(1), cell, edge, True)
    assert np.allclose(nm.div_a_edge, 0.0, atol=1e-12)

    h = H + 100.0 * m.cell_circumcenter[:, 2]
    s = State(np.zeros(m.n_edges), h)
    G = ops.edge_gradient(m, h)
    expected = ops.cell_average(m, -0.5 * (G @ phi))
    got = sto_h(m, s, nm, np.array([0.5]), 0.0)
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-12 * 100.0 / R)


def test_mass_change_is_noise_free_in_mean():
    m = mesh2
    nm = build_noise_basis(NoiseConfig(n_modes=4), m)
    dt = 300.0
    rng = np.random.default_rng(11)
    h = H + 200.0 * np.sin(3 * m.cell_circumcenter[:, 0])
    s = State(np.zeros(m.n_edges), h)

    drift = np.sum(m.cell_area * sto_h(m, s, nm, np.zeros(4), dt))
    draws = np.array(
        [
            np.sum(m.cell_area * sto_h(m, s, nm, sample_increment(rng, dt, 4), dt))
            for _ in range(1000)
        ]
    )
    spread = draws.std() / np.sqrt(len(draws))
    assert abs(draws.mean() - drift) < 4 * spread

    inc = sample_increment(rng, dt, 4)
    plus = sto_h(m, s, nm, inc, dt)
    minus = sto_h(m, s, nm, -inc, dt)
    zero = sto_h(m, s, nm, np.zeros(4), dt)
    assert np.allclose(plus + minus, 2 * zero, atol=1e-9 * np.abs(plus).max())
