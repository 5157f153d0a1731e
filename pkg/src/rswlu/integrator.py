"""SSP-RK3 drift with a single Euler-Maruyama noise update per step."""

__all__ = [
    'SCHEMES',
    'StepConfig',
    'Hook',
    'cfl_limit',
    'default_dt',
    'drift',
    'step',
    'run',
]

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import ERROR, WARNING, BlowUp, ConfigError, RswluError, logger
from .core import PhysParams, State, continuity_tendency, det_tendency
from .diagnostics import DiagnosticsSeries, record
from .noise import NoiseModel, sample_increment, sto_h, sto_v
from .stabilization import StabilizationParams, stabilization_tendency

SCHEMES = ('deterministic_rk3', 'euler_maruyama_split')


@dataclass(frozen=True)
class StepConfig:
    dt: float = 120.0  # s
    scheme: str = 'euler_maruyama_split'
    cfl_guard: float = 0.5
    max_speed: float = 500.0  # m/s
    max_depth: float = 1.0e5  # m

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            ERROR(f"integrator.dt must be > 0, got {self.dt}", ConfigError)
        if self.scheme not in SCHEMES:
            ERROR(
                f"unknown scheme '{self.scheme}', choose from {SCHEMES}",
                ConfigError,
            )
        if not self.cfl_guard > 0:
            ERROR("integrator.cfl_guard must be > 0", ConfigError)


class Hook(NamedTuple):
    every: int  # steps
    func: Callable  # func(step, time, state)


def cfl_limit(m, s: State, p: PhysParams, cfl_guard=0.5):
    """cfl_guard * min |e~| / sqrt(g h_max)"""
    speed = np.sqrt(p.g * float(np.max(s.h)))
    return cfl_guard * m.min_dual_edge_len / speed


def default_dt(m, s, p, cfl_guard=0.5, cadence=3600):
    """largest whole-second divisor of the diagnostics cadence under the
    CFL guard"""
    limit = cfl_limit(m, s, p, cfl_guard)
    cadence = int(cadence)
    for dt in range(min(int(np.floor(limit)), cadence), 0, -1):
        if cadence % dt == 0:
            return float(dt)
    ERROR(
        f"CFL limit {limit:.3g} s is below one second, refine the config",
        ConfigError,
    )


# -------------------------------------------------------------


def drift(m, s: State, p: PhysParams, stab: StabilizationParams):
    dV = det_tendency(m, s, p)
    if stab is not None and stab.active:
        dV = dV + stabilization_tendency(m, s, p, stab)
    return dV, continuity_tendency(m, s)


def _check_bounds(s: State, cfg: StepConfig):
    if not (np.all(np.isfinite(s.V)) and np.all(np.isfinite(s.h))):
        ERROR("non-finite values in the state", BlowUp)
    vmax = float(np.max(np.abs(s.V), initial=0.0))
    if vmax >= cfg.max_speed:
        ERROR(
            f"|V| reached {vmax:.4g} m/s (bound {cfg.max_speed:g})", BlowUp
        )
    hmin, hmax = float(np.min(s.h)), float(np.max(s.h))
    if hmin <= 0 or hmax >= cfg.max_depth:
        ERROR(
            f"depth left (0, {cfg.max_depth:g}) m: min {hmin:.4g},"
            f" max {hmax:.4g}",
            BlowUp,
        )


def _noise_active(nm: Optional[NoiseModel], cfg: StepConfig):
    return (
        cfg.scheme == 'euler_maruyama_split'
        and nm is not None
        and nm.n_modes > 0
        and bool(np.any(nm.amplitudes))
    )


def step(
    m,
    s: State,
    cfg: StepConfig,
    params: PhysParams,
    stab: StabilizationParams = None,
    nm: NoiseModel = None,
    inc=None,
) -> State:
    """advance one step of size cfg.dt"""
    dt = cfg.dt
    V0, h0 = s.V, s.h

    k1V, k1h = drift(m, s, params, stab)
    s2 = State(V0 + dt * k1V, h0 + dt * k1h)
    k2V, k2h = drift(m, s2, params, stab)
    s3 = State(V0 + 0.25 * dt * (k1V + k2V), h0 + 0.25 * dt * (k1h + k2h))
    k3V, k3h = drift(m, s3, params, stab)
    V = V0 + dt / 6.0 * (k1V + k2V + 4.0 * k3V)
    h = h0 + dt / 6.0 * (k1h + k2h + 4.0 * k3h)

    # Ito increments are evaluated at the start-of-step state
    if _noise_active(nm, cfg):
        if inc is None:
            ERROR("a Brownian increment is required for noisy steps")
        V = V + sto_v(m, s, nm, inc, dt)
        h = h + sto_h(m, s, nm, inc, dt)

    out = State(V, h)
    _check_bounds(out, cfg)
    return out


def run(
    m,
    initial: State,
    n_steps: int,
    cfg: StepConfig,
    params: PhysParams,
    stab: StabilizationParams = None,
    nm: NoiseModel = None,
    rng: np.random.Generator = None,
    diag_every: int = None,
    hooks: Sequence[Hook] = (),
):
    """Iterate step n_steps times.

    Returns the final state and the diagnostics recorded at step 0 and
    every ``diag_every`` steps (nothing when n_steps is 0). Errors carry
    the failing step index in ``.step`` and the partial diagnostics in
    ``.series``.
    """
    initial.check(m)
    dt = cfg.dt
    limit = cfl_limit(m, initial, params, cfg.cfl_guard)
    if dt > limit:
        WARNING(f"dt = {dt:g} s exceeds the CFL guard {limit:.4g} s")

    noisy = _noise_active(nm, cfg)
    if noisy and rng is None:
        ERROR("noisy runs need a random generator", ConfigError)

    series = DiagnosticsSeries(dt=dt, scheme=cfg.scheme)
    s = initial
    n_steps = int(n_steps)
    if n_steps <= 0:
        return s, series

    def at_cadence(n):
        if diag_every and n % diag_every == 0:
            series.append(record(m, s, params, n, n * dt))
        for hook in hooks:
            if hook.every and n % hook.every == 0:
                hook.func(n, n * dt, s)

    at_cadence(0)
    for n in range(1, n_steps + 1):
        inc = sample_increment(rng, dt, nm.n_modes) if noisy else None
        try:
            s = step(m, s, cfg, params, stab, nm, inc)
        except RswluError as err:
            err.step = n
            err.series = series  # records up to the failing step
            logger.error(f"integration failed at step {n} (t = {n * dt:g} s)")
            raise
        logger.debug(f"step {n}/{n_steps}, t = {n * dt:g} s")
        at_cadence(n)
    return s, series
