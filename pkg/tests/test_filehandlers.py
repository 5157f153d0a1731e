import numpy as np
import pytest

import rswlu
from rswlu.core import State
from rswlu.mesh import build_icosahedral_mesh
from rswlu.noise import NoiseConfig, build_noise_basis
from rswlu.spheronoise import Spheronoise

rswlu.logger.level = 999

mesh2 = build_icosahedral_mesh(2)
mesh3 = build_icosahedral_mesh(3)


@pytest.fixture(scope="session")
def tmp_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("data")
    return path


def random_state(m, seed=0):
    rng = np.random.default_rng(seed)
    return State(rng.normal(size=m.n_edges), 1e4 + rng.normal(size=m.n_cells))


def test_mesh_file(tmp_dir):
    fpath = tmp_dir / 'level2.spheromesh'
    assert rswlu.write(fpath, mesh2) > 0
    f = rswlu.read(fpath)
    assert f.section('header').dict['cells'] == 320
    assert list(f.section('edges').df.columns) == [
        'i',
        'j',
        'dual_minus',
        'dual_plus',
    ]
    m = f.to_mesh()
    assert m.refinement_level == 2
    assert m.sphere_radius == mesh2.sphere_radius
    assert np.allclose(m.vertices, mesh2.vertices, rtol=0, atol=1e-15)
    assert np.array_equal(m.faces, mesh2.faces)
    assert np.allclose(m.cell_area, mesh2.cell_area, rtol=1e-12)


def test_state_file(tmp_dir):
    s = random_state(mesh2)
    fpath = tmp_dir / 'member.state'
    rswlu.write(fpath, s, mesh=mesh2, time=3600.0)
    back, header = rswlu.read(fpath).to_state(mesh2)
    assert np.array_equal(back.V, s.V)
    assert np.array_equal(back.h, s.h)
    assert header['time'] == 3600.0
    assert header['level'] == 2

    with pytest.raises(rswlu.DimensionMismatch):
        rswlu.read(fpath).to_state(mesh3)


def test_noise_file(tmp_dir):
    nm = build_noise_basis(NoiseConfig(n_modes=5), mesh2)
    fpath = tmp_dir / 'basis.spheronoise'
    rswlu.write(fpath, nm)

    f = rswlu.read(fpath)
    assert len(f) == 5
    assert [frame.dict['index'] for frame in f[1:3]] == [1, 2]
    assert f[-1].dict['amplitude'] == 100.0
    assert f[4].section('cell').array.shape == (mesh2.n_cells, 3)

    back = build_noise_basis(NoiseConfig(mode='file', path=str(fpath)), mesh2)
    assert back.n_modes == 5
    assert np.allclose(back.amplitudes, nm.amplitudes)
    assert np.allclose(back.cell_basis, nm.cell_basis, rtol=0, atol=1e-10)
    assert np.allclose(
        back.edge_normal_basis, nm.edge_normal_basis, rtol=0, atol=1e-10
    )

    with pytest.raises(rswlu.ConfigError):
        Spheronoise.load(fpath, mesh3)


def test_snapshot_files(tmp_dir):
    grid = np.random.default_rng(1).normal(size=(6, 12))
    text = tmp_dir / 'h_day001.50.snapshot'
    binary = tmp_dir / 'h_day001.50.parquet'
    rswlu.write(text, grid, field='h', day=1.5)
    rswlu.write(binary, grid, field='h', day=1.5)

    for fpath in (text, binary):
        df = rswlu.read(fpath)
        assert np.array_equal(df.values, grid)
        assert df.attrs['field'] == 'h' and df.attrs['day'] == 1.5
        assert df.index[0] == pytest.approx(-75.0)
        assert df.columns[-1] == pytest.approx(165.0)


def test_bad_magic(tmp_dir):
    fpath = tmp_dir / 'bad.state'
    fpath.write_text('SPHEROMESH v1\nlevel 2\n')
    with pytest.raises(rswlu.ParseError) as err:
        rswlu.read(fpath)
    assert err.value.line == 1


def test_record_count_mismatch(tmp_dir):
    fpath = tmp_dir / 'short.state'
    fpath.write_text(
        'SPHEROSTATE v1\ntime 0\nSECTION V 2\n1.0\n2.0\nSECTION h 3\n1\n2\n'
    )
    f = rswlu.read(fpath)
    assert np.array_equal(f.section('V').array[:, 0], [1.0, 2.0])
    with pytest.raises(rswlu.ParseError):
        f.to_state()


def test_snapshot_shape_mismatch(tmp_dir):
    fpath = tmp_dir / 'torn.snapshot'
    fpath.write_text('pv 0 3 2\n1 2\n3 4\n')
    with pytest.raises(rswlu.ParseError):
        rswlu.read(fpath)


def test_yaml_file(tmp_dir):
    fpath = tmp_dir / 'run.yaml'
    rswlu.write(fpath, {'mesh': {'level': 3}, 'output': {'fields': ['pv']}})
    assert rswlu.read(fpath) == {'mesh': {'level': 3}, 'output': {'fields': ['pv']}}


def test_unknown_format(tmp_dir):
    with pytest.raises(KeyError):
        rswlu.read(tmp_dir / 'mesh.vtk')
