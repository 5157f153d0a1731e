"""Ensemble orchestration: per-member runs, snapshots, means and manifest."""

__all__ = [
    'Setup',
    'MemberResult',
    'EnsembleSummary',
    'member_seed',
    'prepare',
    'snapshot_field',
    'run_member',
    'run_ensemble',
    'write_manifest',
]

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from . import ERROR, WARNING, RswluError, abspath, logger, timestamp
from . import yaml
from .config import RunConfig
from .core import PhysParams, State, potential_vorticity
from .diagnostics import (
    DiagnosticsSeries,
    ensemble_mean,
    project_to_latlon,
    relative_deviation,
)
from .integrator import Hook, StepConfig, default_dt, run
from .mesh import build_icosahedral_mesh
from .noise import NoiseConfig, NoiseModel, build_noise_basis
from .ops import curl, reconstruct_velocity
from .scenario import GalewskyParams, galewsky_init
from .snapshot import Snapshot, SnapshotParquet
from .stabilization import StabilizationParams

DAY = 86400.0  # s
MANIFEST = 'manifest.csv'
SUMMARY = 'summary.csv'


def member_seed(base_seed: int, member: int) -> int:
    """64-bit stream seed of one member, independent of execution order"""
    digest = hashlib.sha256(f"{int(base_seed)}:{int(member)}".encode())
    return int.from_bytes(digest.digest()[:8], 'little')


@dataclass(frozen=True, eq=False)
class Setup:
    """everything members share: mesh, parameters, initial state, cadences"""

    mesh: object
    params: PhysParams
    stab: StabilizationParams
    noise: Optional[NoiseModel]
    initial: State
    step: StepConfig
    n_steps: int
    diag_every: int  # steps
    snapshot_every: int  # steps, 0 disables
    mean_steps: Dict[int, float]  # step -> day


def _steps(seconds, dt, name):
    k = seconds / dt
    n = int(round(k))
    if seconds and abs(k - n) > 1e-9 * max(1.0, k):
        WARNING(
            f"{name} = {seconds:g} s is not a multiple of dt,"
            f" using {n} steps"
        )
    return n


def prepare(cfg: RunConfig) -> Setup:
    t0 = timestamp()
    m = build_icosahedral_mesh(
        cfg.mesh.level, cfg.mesh.radius, cfg.mesh.max_level
    )
    p = PhysParams(
        g=cfg.physics.g, planet_rotation=cfg.physics.planet_rotation
    )
    stab = StabilizationParams(
        theta=cfg.stabilization.theta, nu=cfg.stabilization.nu
    )
    gal = cfg.galewsky
    initial = galewsky_init(
        m,
        p,
        GalewskyParams(
            u_max=gal.u_max,
            phi0=gal.phi0,
            phi1=gal.phi1,
            mean_depth=gal.mean_depth,
            h_hat=gal.h_hat,
            alpha=gal.alpha,
            beta=gal.beta,
            phi2=gal.phi2,
            perturbation=bool(gal.perturbation),
        ),
    )

    nz = cfg.noise
    nm = None
    if nz.enabled and nz.n_modes > 0:
        nm = build_noise_basis(
            NoiseConfig(
                mode=nz.mode,
                n_modes=int(nz.n_modes),
                lmax=int(nz.lmax),
                amplitude=float(nz.amplitude),
                envelope_center=float(nz.envelope_center),
                envelope_width=float(nz.envelope_width),
                envelope_floor=float(nz.envelope_floor),
                path=nz.path,
            ),
            m,
        )

    out = cfg.output
    integ = cfg.integrator
    dt = integ.dt
    if dt is None:
        dt = default_dt(m, initial, p, integ.cfl_guard, out.diag_every)
    step = StepConfig(
        dt=float(dt),
        scheme=integ.scheme,
        cfl_guard=integ.cfl_guard,
        max_speed=integ.max_speed,
        max_depth=integ.max_depth,
    )
    n_steps = _steps(integ.days * DAY, step.dt, 'integrator.days')
    mean_steps = {}
    for day in out.mean_days or []:
        n = _steps(day * DAY, step.dt, 'output.mean_days')
        if n > n_steps:
            WARNING(f"mean day {day:g} lies beyond the {integ.days:g}-day run")
            continue
        mean_steps[n] = float(day)

    setup = Setup(
        mesh=m,
        params=p,
        stab=stab,
        noise=nm,
        initial=initial,
        step=step,
        n_steps=n_steps,
        diag_every=max(
            1, _steps(out.diag_every, step.dt, 'output.diag_every')
        ),
        snapshot_every=_steps(
            out.snapshot_every, step.dt, 'output.snapshot_every'
        ),
        mean_steps=mean_steps,
    )
    logger.info(
        f"prepared level-{m.refinement_level} run: dt = {step.dt:g} s,"
        f" {n_steps} steps, noise {'off' if nm is None else nm.n_modes},"
        f" theta {stab.theta:g}, nu {stab.nu:g}"
        f" ({timestamp() - t0:.1f}s)"
    )
    return setup


@lru_cache(maxsize=2)
def _prepare_cached(key: str) -> Setup:
    return prepare(RunConfig(yaml.loads(key)))


# -------------------------------------------------------------


def snapshot_field(m, s: State, p: PhysParams, name: str):
    """cell or dual field written to snapshots"""
    if name == 'pv':
        return potential_vorticity(m, s, p)
    elif name == 'vorticity':
        return curl(m, s.V)
    elif name == 'h':
        return s.h
    elif name == 'speed':
        return np.linalg.norm(reconstruct_velocity(m, s.V), axis=-1)
    ERROR(f"unknown snapshot field '{name}'", KeyError)


@dataclass
class MemberResult:
    member: int
    seed: int
    ok: bool = True
    error: str = ''
    failed_step: Optional[int] = None
    files: List[Path] = field(default_factory=list)
    diagnostics: pd.DataFrame = None
    means: Dict[Tuple[str, float], np.ndarray] = field(default_factory=dict)

    def stats(self) -> dict:
        df = self.diagnostics
        out = {
            'member': self.member,
            'seed': self.seed,
            'status': 'ok' if self.ok else 'failed',
            'records': 0 if df is None else len(df),
        }
        for key in ['energy', 'enstrophy', 'mass']:
            if df is None or df.empty:
                out.update({f'{key}_initial': np.nan, f'{key}_final': np.nan})
                out[f'{key}_max_rel_dev'] = np.nan
                continue
            values = df[key].values
            out[f'{key}_initial'] = values[0]
            out[f'{key}_final'] = values[-1]
            out[f'{key}_max_rel_dev'] = float(
                np.max(np.abs(relative_deviation(values)))
            )
        out['failed_step'] = self.failed_step
        out['error'] = self.error
        return out


def _fields(cfg):
    fields = cfg.output.fields or []
    return [fields] if isinstance(fields, str) else list(fields)


def _write_snapshot(outdir, name, day, grid, binary):
    stem = f"{name}_day{day:06.2f}"
    files = [outdir / f"{stem}.snapshot"]
    Snapshot.write(files[0], grid, field=name, day=day)
    if binary:
        files.append(outdir / f"{stem}.parquet")
        SnapshotParquet.write(files[1], grid, field=name, day=day)
    return files


def run_member(cfg: RunConfig, member: int, outdir=None) -> MemberResult:
    """Run one ensemble member; failures are recorded, not raised."""
    key = yaml.dumps(cfg.to_dict())
    setup = _prepare_cached(key)
    m, p = setup.mesh, setup.params
    out = cfg.output
    outdir = Path(abspath(outdir or out.directory)) / f"member_{member:03d}"
    outdir.mkdir(parents=True, exist_ok=True)

    seed = member_seed(cfg.ensemble.base_seed, member)
    res = MemberResult(member, seed)
    rng = np.random.default_rng(seed)
    fields = _fields(cfg)

    def snapshot(n, time, s):
        for name in fields:
            grid = project_to_latlon(
                m, snapshot_field(m, s, p, name), out.nlat, out.nlon
            )
            res.files += _write_snapshot(
                outdir, name, time / DAY, grid, out.binary
            )

    def keep_mean(n, time, s):
        if n in setup.mean_steps:
            for name in fields:
                res.means[(name, setup.mean_steps[n])] = project_to_latlon(
                    m, snapshot_field(m, s, p, name), out.nlat, out.nlon
                )

    hooks = [Hook(1, keep_mean)]
    if setup.snapshot_every and fields:
        hooks.append(Hook(setup.snapshot_every, snapshot))

    t0 = timestamp()
    logger.info(f"member {member}: start, seed {seed}")
    try:
        _, series = run(
            m,
            setup.initial,
            setup.n_steps,
            setup.step,
            p,
            setup.stab,
            setup.noise,
            rng,
            setup.diag_every,
            hooks,
        )
    except Exception as err:
        series = getattr(err, 'series', None) or DiagnosticsSeries()
        res.ok = False
        res.error = f"{err.__class__.__name__}: {err}"
        res.failed_step = getattr(err, 'step', None)
        logger.error(f"member {member}: failed, {res.error}")

    fpath = outdir / 'diagnostics.csv'
    series.write(fpath)
    res.files.append(fpath)
    res.diagnostics = series.df
    if res.ok:
        stats = res.stats()
        logger.info(
            f"member {member}: done in {timestamp() - t0:.1f}s,"
            f" max |dE/E0| {stats['energy_max_rel_dev']:.3e},"
            f" max |dC/C0| {stats['enstrophy_max_rel_dev']:.3e}"
        )
    return res


def _member_job(args):
    cfg_dict, member, outdir = args
    return run_member(RunConfig(cfg_dict), member, outdir)


# -------------------------------------------------------------


def _sha256(fpath, chunk=1 << 20):
    h = hashlib.sha256()
    with open(fpath, 'rb') as f:
        for buf in iter(lambda: f.read(chunk), b''):
            h.update(buf)
    return h.hexdigest()


def write_manifest(directory, files) -> Path:
    """one ``path,sha256,bytes`` line per file, paths relative, sorted"""
    directory = Path(directory)
    fpath = directory / MANIFEST
    root = directory.resolve()
    rows = {
        Path(os.path.relpath(Path(f).resolve(), root)).as_posix(): Path(f)
        for f in files
        if Path(f).resolve() != fpath.resolve()
    }
    with open(fpath, 'w', encoding='utf-8') as f:
        for rel in sorted(rows):
            row = rows[rel]
            f.write(f"{rel},{_sha256(row)},{row.stat().st_size}\n")
    logger.debug(f'wrote manifest\n  {fpath}')
    return fpath


@dataclass
class EnsembleSummary:
    directory: Path
    members: List[MemberResult]
    means: Dict[Tuple[str, float], np.ndarray] = field(default_factory=dict)
    manifest: Optional[Path] = None

    @property
    def series(self) -> Dict[int, pd.DataFrame]:
        return {r.member: r.diagnostics for r in self.members}

    @property
    def failed(self) -> List[int]:
        return [r.member for r in self.members if not r.ok]

    @property
    def df(self) -> pd.DataFrame:
        return pd.DataFrame([r.stats() for r in self.members])


def run_ensemble(cfg: RunConfig) -> EnsembleSummary:
    """Run every member, then write ensemble means, summary and manifest.

    Members draw seeds from (base_seed, member index) only, so outputs do
    not depend on how many workers run them or in what order.
    """
    cfg.validate()
    outdir = Path(abspath(cfg.output.directory))
    outdir.mkdir(parents=True, exist_ok=True)
    cfg_path = outdir / 'config.yaml'
    yaml.Yaml.write(cfg_path, cfg.to_dict())

    _prepare_cached(yaml.dumps(cfg.to_dict()))  # fail early on bad setups
    n_members = int(cfg.ensemble.members)
    workers = min(int(cfg.ensemble.workers), n_members)
    t0 = timestamp()
    logger.info(
        f"running {n_members} member(s) with {workers} worker(s) into {outdir}"
    )
    if workers > 1:
        jobs = [(cfg.to_dict(), k, str(outdir)) for k in range(n_members)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_member_job, jobs))
    else:
        results = [run_member(cfg, k, outdir) for k in range(n_members)]
    results.sort(key=lambda r: r.member)

    ok = [r for r in results if r.ok]
    files = [cfg_path] + [f for r in results for f in r.files]
    if ok:
        axes = [tuple(r.diagnostics['time']) for r in ok]
        if len(set(axes)) > 1:
            WARNING("members finished with different time axes")

    # ensemble means over the members that reached each day
    means = {}
    meandir = outdir / 'ensemble_mean'
    for key in sorted({k for r in results for k in r.means}):
        grids = [r.means[key] for r in results if key in r.means]
        means[key] = ensemble_mean(grids)
        meandir.mkdir(exist_ok=True)
        name, day = key
        files += _write_snapshot(
            meandir, name, day, means[key], cfg.output.binary
        )

    summary = EnsembleSummary(outdir, results, means)
    summary_path = outdir / SUMMARY
    summary.df.to_csv(summary_path, float_format='%.17g', index=False)
    files.append(summary_path)
    summary.manifest = write_manifest(outdir, files)

    logger.info(
        f"ensemble finished in {timestamp() - t0:.1f}s:"
        f" {len(ok)}/{n_members} member(s) ok"
    )
    if not ok:
        ERROR(
            f"all {n_members} member(s) failed, see {summary_path}",
            RswluError,
        )
    return summary
