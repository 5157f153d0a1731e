"""Command line: ``rswlu run | mesh | init | diag``."""

__all__ = ['build_parser', 'cli_main', 'main']

import argparse
import logging
import sys

from . import ERROR, RswluError, __version__, logger
from .scenario import PRESETS

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog='rswlu',
        description='Stochastic rotating shallow water on the sphere',
    )
    parser.add_argument(
        '--version', action='version', version=f'%(prog)s {__version__}'
    )
    parser.add_argument(
        '-v',
        '--verbose',
        action='count',
        default=0,
        help="debug output (-v), everything (-vv)",
    )
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    # run
    p = sub.add_parser('run', help="run an ensemble")
    p.add_argument('--config', help="YAML run configuration")
    p.add_argument('--preset', choices=sorted(PRESETS))
    p.add_argument('--members', type=int, help="ensemble size")
    p.add_argument('--seed', type=int, help="base seed")
    p.add_argument('--out', help="output directory")
    p.add_argument('--level', type=int, help="mesh refinement level")
    p.add_argument('--days', type=float, help="model days")
    p.add_argument('--dt', type=float, help="time step [s]")
    p.add_argument('--workers', type=int, help="parallel member processes")

    # mesh
    p = sub.add_parser('mesh', help="build an icosahedral mesh")
    p.add_argument('--level', type=int, required=True)
    p.add_argument('--radius', type=float, help="sphere radius [m]")
    p.add_argument(
        '--check', action='store_true', help="validate and print the report"
    )
    p.add_argument('--out', help="write a .spheromesh file")

    # init
    p = sub.add_parser('init', help="write the initial state")
    p.add_argument('--config', help="YAML run configuration")
    p.add_argument('--preset', choices=sorted(PRESETS))
    p.add_argument('--out', required=True, help="output .state file")

    # diag
    p = sub.add_parser('diag', help="print energy, enstrophy and mass")
    p.add_argument('--state', required=True, help="input .state file")
    p.add_argument('--config', help="physics parameters from this config")
    return parser


def _overrides(args):
    flags = {
        'preset': getattr(args, 'preset', None),
        'ensemble.members': getattr(args, 'members', None),
        'ensemble.base_seed': getattr(args, 'seed', None),
        'ensemble.workers': getattr(args, 'workers', None),
        'output.directory': getattr(args, 'out', None),
        'mesh.level': getattr(args, 'level', None),
        'integrator.days': getattr(args, 'days', None),
        'integrator.dt': getattr(args, 'dt', None),
    }
    return {k: v for k, v in flags.items() if v is not None}


# -------------------------------------------------------------


def cmd_run(args):
    from .config import load_config
    from .harness import run_ensemble

    cfg = load_config(args.config, _overrides(args))
    summary = run_ensemble(cfg)
    print(f"wrote {summary.manifest}")
    if summary.failed:
        logger.warning(f"failed member(s): {summary.failed}")
    return EXIT_OK


def cmd_mesh(args):
    from .mesh import EARTH_RADIUS, build_icosahedral_mesh, validate_mesh

    radius = EARTH_RADIUS if args.radius is None else args.radius
    m = build_icosahedral_mesh(args.level, radius)
    print(m)
    if args.out:
        from .spheromesh import Spheromesh

        Spheromesh.write(args.out, m)
        print(f"wrote {args.out}")
    if args.check:
        report = validate_mesh(m)
        print(report)
        if not report.ok:
            logger.error(f"mesh checks failed: {report.failures}")
            return EXIT_FAILURE
    return EXIT_OK


def cmd_init(args):
    from .config import load_config
    from .harness import prepare
    from .state import Spherostate

    overrides = {'preset': args.preset} if args.preset else {}
    cfg = load_config(args.config, overrides)
    setup = prepare(cfg)
    Spherostate.write(args.out, setup.initial, mesh=setup.mesh, time=0.0)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_diag(args):
    from .config import load_config
    from .core import PhysParams
    from .diagnostics import record
    from .mesh import build_icosahedral_mesh
    from .state import Spherostate

    f = Spherostate(args.state)
    f.scan()
    header = f.section('header').dict
    if 'level' not in header or 'radius' not in header:
        ERROR(f"{args.state} carries no mesh level or radius", RswluError)
    m = build_icosahedral_mesh(int(header['level']), float(header['radius']))
    s, header = f.to_state(m)
    cfg = load_config(args.config)
    p = PhysParams(
        g=cfg.physics.g, planet_rotation=cfg.physics.planet_rotation
    )
    rec = record(m, s, p, time=float(header.get('time', 0.0)))
    print(f"time      {rec.time:.17g}")
    print(f"energy    {rec.energy:.17g}")
    print(f"enstrophy {rec.enstrophy:.17g}")
    print(f"mass      {rec.mass:.17g}")
    return EXIT_OK


commands = {
    'run': cmd_run,
    'mesh': cmd_mesh,
    'init': cmd_init,
    'diag': cmd_diag,
}


def cli_main(argv=None) -> int:
    """Exit 0 on success, 1 on usage errors, 2 on runtime failures."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.verbose:
        level = logging.DEBUG if args.verbose == 1 else logging.NOTSET
        logger.setLevel(level)

    try:
        return commands[args.command](args)
    except (RswluError, OSError) as err:
        logger.error(f"{args.command} failed: {err}")
        return EXIT_FAILURE


def main():
    sys.exit(cli_main())
