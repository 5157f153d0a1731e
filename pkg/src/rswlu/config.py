"""Run configuration: fixed-key sections, YAML loading and validation."""

__all__ = [
    'SCHEMA',
    'DEFAULTS',
    'SNAPSHOT_FIELDS',
    'ConfigSection',
    'RunConfig',
    'nest',
    'load_config',
]

import copy
import math

from . import ERROR, ValidationError, logger
from .integrator import SCHEMES
from .noise import MODES

SCHEMA = 1
SNAPSHOT_FIELDS = ('pv', 'h', 'vorticity', 'speed')

DEFAULTS = {
    'mesh': {
        'level': 5,
        'radius': 6.371229e6,  # m
        'max_level': 8,
    },
    'physics': {
        'g': 9.80616,  # m/s2
        'planet_rotation': 7.292e-5,  # 1/s
    },
    'stabilization': {
        'theta': 0.0,  # m5 s
        'nu': 0.0,  # m4/s
    },
    'noise': {
        'enabled': True,
        'mode': 'inhomogeneous',
        'n_modes': 8,
        'lmax': 2,
        'amplitude': 100.0,
        'envelope_center': 45.0,  # deg
        'envelope_width': 15.0,  # deg
        'envelope_floor': 0.1,
        'path': None,
    },
    'integrator': {
        'dt': None,  # s, None picks a CFL-safe divisor of diag_every
        'scheme': 'euler_maruyama_split',
        'cfl_guard': 0.5,
        'days': 12.0,
        'max_speed': 500.0,  # m/s
        'max_depth': 1.0e5,  # m
    },
    'galewsky': {
        'u_max': 80.0,
        'phi0': math.pi / 7.0,
        'phi1': math.pi / 2.0 - math.pi / 7.0,
        'mean_depth': 1.0e4,
        'h_hat': 120.0,
        'alpha': 1.0 / 3.0,
        'beta': 1.0 / 15.0,
        'phi2': math.pi / 4.0,
        'perturbation': True,
    },
    'ensemble': {
        'members': 20,
        'base_seed': 0,
        'workers': 1,
    },
    'output': {
        'directory': 'output',
        'diag_every': 3600.0,  # s
        'snapshot_every': 86400.0,  # s, 0 disables
        'nlat': 90,
        'nlon': 180,
        'fields': ['pv'],
        'binary': False,
        'mean_days': [6.0],
    },
}


class ConfigSection(dict):
    """A dict with a fixed set of keys, also readable as attributes"""

    def __init__(self, name, *args, **kwargs):
        super().__init__(*args, **kwargs)
        object.__setattr__(self, '_name', name)

    def __getattr__(self, key):
        try:
            return self[key]
        except KeyError:
            raise AttributeError(key) from None

    def __setattr__(self, key, value):
        self[key] = value

    def __setitem__(self, key, value):
        if key not in self:
            raise KeyError(f"'{key}' is not a {self._name} parameter")
        super().__setitem__(key, value)

    def update(self, *args, **kwargs):
        frozen = set(self.keys())
        super().update(*args, **kwargs)
        invalidkeys = set(self.keys()).difference(frozen)
        if invalidkeys:
            logger.warning(
                f"Ignored invalid {self._name} parameters: {invalidkeys}"
            )
            for k in invalidkeys:
                self.pop(k)

    def to_dict(self):
        return copy.deepcopy(dict(self))


def nest(adict) -> dict:
    """expand dotted keys (``noise.amplitude``) into nested sections"""
    out = {}
    for key, value in (adict or {}).items():
        key = str(key)
        if isinstance(value, dict):
            value = nest(value)
        if '.' in key:
            head, tail = key.split('.', 1)
            value = nest({tail: value})
            key = head
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def _coerce(value, default):
    """numeric strings like '5e21' become numbers where numbers are expected"""
    if isinstance(value, str) and isinstance(default, (int, float)):
        if isinstance(default, bool):
            low = value.strip().lower()
            if low in ('true', 'yes', 'on', '1'):
                return True
            if low in ('false', 'no', 'off', '0'):
                return False
            return value
        try:
            number = float(value)
        except ValueError:
            return value
        if isinstance(default, int) and number.is_integer():
            return int(number)
        return number
    if isinstance(value, str) and default is None:
        try:
            return float(value)
        except ValueError:
            return value
    return value


class RunConfig(dict):
    """Full run configuration, one ConfigSection per concern.

    >>> cfg = RunConfig()
    >>> cfg.stabilization.theta = 5.0e21
    """

    def __init__(self, values: dict = None):
        super().__init__(
            {
                'schema': SCHEMA,
                'preset': None,
                **{
                    name: ConfigSection(name, copy.deepcopy(section))
                    for name, section in DEFAULTS.items()
                },
            }
        )
        self.__dict__ = self
        if values:
            self.update(values)

    def update(self, values: dict):
        for name, value in nest(values).items():
            if name in ('schema', 'preset'):
                self[name] = value
            elif name not in DEFAULTS:
                logger.warning(f"Ignored unknown config section '{name}'")
            elif not isinstance(value, dict):
                logger.warning(
                    f"Ignored config section '{name}': not a mapping"
                )
            else:
                section = self[name]
                section.update(
                    {
                        k: _coerce(v, DEFAULTS[name].get(k, v))
                        for k, v in value.items()
                    }
                )

    def to_dict(self) -> dict:
        out = {'schema': self['schema']}
        if self['preset'] is not None:
            out['preset'] = self['preset']
        for name in DEFAULTS:
            out[name] = self[name].to_dict()
        return out

    # ---------------------------------------------------------

    def violations(self):
        """every invariant violation as (key path, message)"""
        out = []

        def need(ok, path, msg):
            if not ok:
                out.append((path, msg))

        def number(path, value, low=None, strict=False, integer=False):
            isnum = isinstance(value, (int, float)) and not isinstance(
                value, bool
            )
            if not isnum or not math.isfinite(value):
                out.append((path, f"expected a number, got {value!r}"))
                return False
            if integer and int(value) != value:
                out.append((path, f"expected an integer, got {value!r}"))
                return False
            if low is not None:
                bad = value <= low if strict else value < low
                if bad:
                    op = '>' if strict else '>='
                    out.append((path, f"must be {op} {low}, got {value!r}"))
                    return False
            return True

        need(self['schema'] == SCHEMA, 'schema', f"must be {SCHEMA}")

        mesh = self.mesh
        if number('mesh.level', mesh.level, 0, integer=True) and number(
            'mesh.max_level', mesh.max_level, 0, integer=True
        ):
            need(
                mesh.level <= mesh.max_level,
                'mesh.level',
                f"{mesh.level} exceeds mesh.max_level {mesh.max_level}",
            )
        number('mesh.radius', mesh.radius, 0, strict=True)

        number('physics.g', self.physics.g, 0, strict=True)
        number('physics.planet_rotation', self.physics.planet_rotation)

        number('stabilization.theta', self.stabilization.theta, 0)
        number('stabilization.nu', self.stabilization.nu, 0)

        noise = self.noise
        need(
            isinstance(noise.enabled, bool),
            'noise.enabled',
            "expected true or false",
        )
        need(noise.mode in MODES, 'noise.mode', f"choose from {MODES}")
        number('noise.n_modes', noise.n_modes, 0, integer=True)
        if noise.mode == 'inhomogeneous' and number(
            'noise.lmax', noise.lmax, 1, integer=True
        ):
            available = (noise.lmax + 1) ** 2 - 1
            need(
                not isinstance(noise.n_modes, (int, float))
                or noise.n_modes <= available,
                'noise.n_modes',
                f"at most {available} modes up to degree {noise.lmax}",
            )
        number('noise.amplitude', noise.amplitude, 0)
        number('noise.envelope_width', noise.envelope_width, 0, strict=True)
        if number('noise.envelope_floor', noise.envelope_floor, 0):
            need(
                noise.envelope_floor <= 1,
                'noise.envelope_floor',
                "must be <= 1",
            )
        need(
            noise.mode != 'file' or bool(noise.path),
            'noise.path',
            "required by mode 'file'",
        )

        integ = self.integrator
        if integ.dt is not None:
            number('integrator.dt', integ.dt, 0, strict=True)
        need(
            integ.scheme in SCHEMES,
            'integrator.scheme',
            f"choose from {SCHEMES}",
        )
        number('integrator.cfl_guard', integ.cfl_guard, 0, strict=True)
        number('integrator.days', integ.days, 0)
        number('integrator.max_speed', integ.max_speed, 0, strict=True)
        number('integrator.max_depth', integ.max_depth, 0, strict=True)

        gal = self.galewsky
        number('galewsky.u_max', gal.u_max, 0)
        number('galewsky.mean_depth', gal.mean_depth, 0, strict=True)
        number('galewsky.alpha', gal.alpha, 0, strict=True)
        number('galewsky.beta', gal.beta, 0, strict=True)
        if number('galewsky.phi0', gal.phi0) and number(
            'galewsky.phi1', gal.phi1
        ):
            need(gal.phi0 < gal.phi1, 'galewsky.phi1', "must exceed phi0")

        ens = self.ensemble
        number('ensemble.members', ens.members, 1, integer=True)
        number('ensemble.base_seed', ens.base_seed, 0, integer=True)
        number('ensemble.workers', ens.workers, 1, integer=True)

        output = self.output
        need(bool(output.directory), 'output.directory', "must not be empty")
        if number('output.diag_every', output.diag_every, 0, strict=True):
            if integ.dt is not None and isinstance(integ.dt, (int, float)):
                need(
                    _divides(integ.dt, output.diag_every),
                    'output.diag_every',
                    f"must be a multiple of integrator.dt ({integ.dt:g} s)",
                )
        if number('output.snapshot_every', output.snapshot_every, 0):
            if integ.dt is not None and isinstance(integ.dt, (int, float)):
                need(
                    _divides(integ.dt, output.snapshot_every),
                    'output.snapshot_every',
                    f"must be a multiple of integrator.dt ({integ.dt:g} s)",
                )
        number('output.nlat', output.nlat, 2, integer=True)
        number('output.nlon', output.nlon, 2, integer=True)
        fields = output.fields
        if isinstance(fields, str):
            fields = [fields]
        for f in fields or []:
            need(
                f in SNAPSHOT_FIELDS,
                'output.fields',
                f"unknown field '{f}', choose from {SNAPSHOT_FIELDS}",
            )
        days = output.mean_days or []
        if not isinstance(days, (list, tuple)):
            days = [days]
        for d in days:
            number('output.mean_days', d, 0)
        return out

    def validate(self):
        errs = self.violations()
        if errs:
            listing = '\n'.join(f"  {path}: {msg}" for path, msg in errs)
            ERROR(
                f"{len(errs)} invalid config value(s):\n{listing}",
                ValidationError(
                    f"{len(errs)} invalid config value(s):\n{listing}", errs
                ),
            )
        return self


def _divides(dt, every):
    k = every / dt
    return abs(k - round(k)) < 1e-9 * max(1.0, k)


def load_config(path=None, overrides: dict = None) -> RunConfig:
    """Read a YAML run configuration.

    Values apply in the order defaults, preset, file, ``overrides``
    (typically CLI flags); the result is validated as a whole.
    """
    from . import read
    from .scenario import preset_overrides

    raw = {}
    if path is not None:
        raw = read(path, 'yaml') or {}
        if not isinstance(raw, dict):
            ERROR(
                f"{path}: expected a mapping at the top level",
                ValidationError(
                    f"{path}: expected a mapping at the top level",
                    [('', 'expected a mapping')],
                ),
            )
    raw = nest(raw)
    overrides = nest(overrides or {})

    preset = overrides.get('preset', raw.get('preset'))
    level = overrides.get('mesh', {}).get('level')
    if level is None:
        level = raw.get('mesh', {}).get('level')

    cfg = RunConfig()
    if preset:
        cfg.update(preset_overrides(preset, _coerce(level, 0)))
        cfg['preset'] = str(preset).strip().lower()
    cfg.update(raw)
    cfg.update(overrides)
    if preset:
        cfg['preset'] = str(preset).strip().lower()
    logger.debug(f"loaded config {path or '<defaults>'}")
    return cfg.validate()
