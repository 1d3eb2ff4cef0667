"""Command-line interface."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, NoReturn, Sequence

import numpy as np

from . import __version__
from .analysis import extract_g2, extract_hom_visibility, fit_lifetime
from .budget import DemuxScheme, budget_sweep, multiphoton_rate
from .correlate import cross_correlate
from .errors import ConfigError, ParameterError, QdemuxError
from .pipeline import (
    ReproduceOptions,
    default_scenario,
    delay_scan,
    histogram,
    provenance,
    reproduce,
    simulate,
    write_rabi_map,
    write_scan,
)
from .scenario import Experiment, Scenario, load_scenario
from .settings import Settings
from .timetags import read_tags, write_tags
from .utils import PS
from .visibility import (
    Eq2Inputs,
    correct_hom,
    visibility_eq2,
    visibility_map,
)

logger = logging.getLogger(__name__)

#: Exit status of a successful run.
EXIT_OK = 0

#: Exit status of an invalid configuration or command line.
EXIT_CONFIG = 1

#: Exit status of a failure while running.
EXIT_RUNTIME = 2

LOG_FORMAT = '%(asctime)s [%(levelname)s] [%(name)s] %(message)s'


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f'{self.prog}: error: {message}\n')


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser of the ``qdemux`` command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=Path, metavar='PATH',
                        help='scenario document (JSON)')
    common.add_argument('--seed', type=int, help='override the scenario seed')
    common.add_argument('--out', type=Path, metavar='DIR',
                        help='output directory (default: $QDEMUX_OUT)')
    common.add_argument('--threads', type=int, metavar='N',
                        help='worker threads (default: $QDEMUX_THREADS)')
    common.add_argument('--env-file', type=Path, metavar='PATH',
                        help='settings file (default: ./.env if present)')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='log more (repeat for debug output)')

    parser = _Parser(prog='qdemux', description=(
        'Simulate and analyze passively demultiplexed photon pairs '
        'from a quantum-dot cascade.'
    ))
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True,
                                     parser_class=_Parser)

    sim = commands.add_parser('simulate', parents=[common],
                              help='simulate a scenario into tag files')
    sim.add_argument('--experiment', choices=[e.value for e in Experiment],
                     help='override the scenario experiment')
    sim.add_argument('--periods', type=int, metavar='N',
                     help='override sequence.n_periods')

    ana = commands.add_parser('analyze', parents=[common],
                              help='correlate tag files and extract metrics')
    group = ana.add_mutually_exclusive_group(required=True)
    group.add_argument('--g2', nargs=2, type=Path, metavar='TAGS',
                       help='HBT streams of both detectors')
    group.add_argument('--hom', nargs=4, type=Path, metavar='TAGS',
                       help='co-polarized pair, then cross-polarized pair')
    group.add_argument('--lifetime', nargs=2, type=Path, metavar='TAGS',
                       help='XX stream, then X stream')
    ana.add_argument('--bin-width', type=float, metavar='PS',
                     help='bin width in ps (default: $QDEMUX_BIN_WIDTH_PS)')
    ana.add_argument('--span', type=float, metavar='NS',
                     help='histogram half-range in ns')
    ana.add_argument('--window', type=float, metavar='NS',
                     help='peak integration window in ns')
    ana.add_argument('--rep-period', type=float, metavar='NS',
                     help='laser repetition period in ns')

    mod = commands.add_parser('model', parents=[common],
                              help='evaluate the closed-form models')
    group = mod.add_mutually_exclusive_group(required=True)
    group.add_argument('--eq1', nargs=4, type=float,
                       metavar=('V_RAW', 'G2', 'R', 'T'),
                       help='corrected HOM visibility')
    group.add_argument('--eq2', nargs=2, type=float,
                       metavar=('T1_PS', 'FSS_UEV'),
                       help='visibility of two photons split by the FSS')
    group.add_argument('--map', action='store_true',
                       help='write the lifetime x FSS visibility map')
    mod.add_argument('--sigma', type=float, default=0.0, metavar='HZ',
                     help='spectral wandering Σ')
    mod.add_argument('--pure-dephasing', type=float, default=0.0,
                     metavar='HZ', help='rate added to 1/T1')
    mod.add_argument('--points', type=int, default=200, metavar='N',
                     help='map points per axis')
    mod.add_argument('--line-cut', type=float, default=170.0,
                     metavar='T1_PS', help='lifetime of the map line cut')

    bud = commands.add_parser('budget', parents=[common],
                              help='rate budget of a demultiplexed source')
    bud.add_argument('--n', type=int, default=2, help='number of modes')
    bud.add_argument('--passive', action='store_true',
                     help='passive first split')
    bud.add_argument('--rep-rate', type=float, default=80e6, metavar='HZ')
    bud.add_argument('--efficiency', type=float, default=1.0)
    bud.add_argument('--loss-db', type=float, default=3.0)
    bud.add_argument('--eom-rate', type=float, default=1e9, metavar='HZ')
    bud.add_argument('--sweep', type=int, metavar='N_MAX',
                     help='also tabulate 1..N_MAX modes')

    rep = commands.add_parser('reproduce', parents=[common],
                              help='run every experiment and summarize')
    rep.add_argument('--periods', type=int, metavar='N',
                     help='laser periods per experiment')
    rep.add_argument('--write-tags', action='store_true',
                     help='also write the tag streams')
    return parser


def _configure_logging(verbose: int, settings: Settings) -> None:
    if verbose:
        level: int | str = logging.INFO if verbose == 1 else logging.DEBUG
    else:
        level = settings.get('QDEMUX_LOG_LEVEL', 'WARNING').upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigError(f'Invalid QDEMUX_LOG_LEVEL: {level!r}')
    logging.basicConfig(format=LOG_FORMAT, level=level)


def _scenario(args: argparse.Namespace) -> Scenario:
    if args.config is not None:
        scenario = load_scenario(args.config)
    else:
        scenario = default_scenario()
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    return scenario


def _emit(data: Any) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _simulate(args: argparse.Namespace, settings: Settings,
              out: Path, threads: int) -> None:
    scenario = _scenario(args)
    if args.experiment:
        scenario = replace(scenario, experiment=Experiment(args.experiment))
    if args.periods:
        scenario = replace(scenario, sequence=replace(
            scenario.sequence, n_periods=args.periods))
    out.mkdir(parents=True, exist_ok=True)
    header = provenance(scenario)
    name = scenario.experiment.value
    if scenario.experiment is Experiment.DELAY_SCAN:
        write_scan(out / f'{name}.txt',
                   delay_scan(scenario, threads=threads), header)
    elif scenario.experiment is Experiment.RABI_MAP:
        write_rabi_map(out / f'{name}.txt', scenario, header)
    else:
        suffix = '.npz' if settings.get('QDEMUX_TAG_FORMAT') == 'binary' \
            else '.txt'
        streams = simulate(scenario, threads=threads)
        for stream in streams:
            path = out / f'{name}_ch{stream.channel}{suffix}'
            write_tags(path, stream, header)
            print(path)
        histogram(scenario, streams, threads=threads).to_table(
            out / f'{name}_histogram.txt', header
        )
    with open(out / f'{name}_scenario.json', 'w', encoding='utf-8') as f:
        json.dump(scenario.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')


def _analyze(args: argparse.Namespace, settings: Settings,
             out: Path, threads: int) -> None:
    bin_width = (args.bin_width or settings.float('QDEMUX_BIN_WIDTH_PS',
                                                  50.0)) / PS
    span = (args.span or 100.0) * 1e-9
    window = (args.window or 1.0) * 1e-9
    period = (args.rep_period or 12.5) * 1e-9
    out.mkdir(parents=True, exist_ok=True)

    def correlate(paths: Sequence[Path], name: str) -> Any:
        (a, header), (b, _) = (read_tags(p) for p in paths)
        h = cross_correlate(a, b, bin_width, span, threads=threads)
        h.to_table(out / f'{name}_histogram.txt', header)
        return h, header

    if args.g2:
        h, header = correlate(args.g2, 'g2')
        result: dict[str, Any] = extract_g2(h, period, window).to_dict()
    elif args.hom:
        co, header = correlate(args.hom[:2], 'hom_co')
        cross, _ = correlate(args.hom[2:], 'hom_cross')
        result = extract_hom_visibility(co, cross, window, period).to_dict()
    else:
        h, header = correlate(args.lifetime, 'lifetime')
        t1 = fit_lifetime(h)
        result = {'value': t1.value, 'uncertainty': t1.uncertainty}
    result['provenance'] = header
    with open(out / 'analysis.json', 'w', encoding='utf-8') as f:
        json.dump(result, f, indent=2, sort_keys=True)
        f.write('\n')
    _emit(result)


def _model(args: argparse.Namespace, out: Path, threads: int) -> None:
    if args.eq1:
        print(f'{correct_hom(*args.eq1):.3f}')
    elif args.eq2:
        t1, fss = args.eq2[0] * 1e-12, args.eq2[1] * 1e-6
        inputs = Eq2Inputs.from_fss(t1, fss, args.sigma, args.pure_dephasing)
        print(f'{visibility_eq2(inputs):.4f}')
    else:
        grid = visibility_map(
            np.linspace(20e-12, 500e-12, args.points),
            np.linspace(0.0, 20e-6, args.points),
            args.sigma, args.pure_dephasing, threads=threads,
        )
        out.mkdir(parents=True, exist_ok=True)
        grid.to_table(out / 'visibility_map.txt')
        cut = grid.line_cut(args.line_cut * 1e-12)
        np.savetxt(out / 'line_cut.txt',
                   np.column_stack([grid.fss * 1e6, cut]),
                   fmt=('%.6g', '%.9f'), header=(
                       f'{json.dumps({"t1_ps": args.line_cut})}\n'
                       'fss_ueV visibility'
                   ))
        print(out / 'visibility_map.txt')


def _budget(args: argparse.Namespace) -> None:
    scheme = DemuxScheme(
        n_modes=args.n, rep_rate=args.rep_rate,
        source_efficiency=args.efficiency, eom_loss_db=args.loss_db,
        eom_max_rate=args.eom_rate, passive_doubling=args.passive,
    )
    report: dict[str, Any] = multiphoton_rate(scheme).to_dict()
    if args.sweep:
        report['sweep'] = budget_sweep(scheme, args.sweep)
    _emit(report)


def run(argv: Sequence[str] | None = None) -> int:
    """
    Run the command line and return its exit status.

    Parameters
    ----------
    argv : Sequence[str] | None
        The arguments, ``sys.argv[1:]`` by default.

    Returns
    -------
    int
        0 on success, 1 for configuration errors, 2 for runtime errors.
    """
    args = build_parser().parse_args(argv)
    try:
        env_file = args.env_file
        if env_file is None and Path('.env').is_file():
            env_file = Path('.env')
        settings = Settings(env_file)
        _configure_logging(args.verbose, settings)
        threads = args.threads or settings.threads()
        out = args.out or Path(settings.get('QDEMUX_OUT', 'qdemux-out'))
        if args.command == 'simulate':
            _simulate(args, settings, out, threads)
        elif args.command == 'analyze':
            _analyze(args, settings, out, threads)
        elif args.command == 'model':
            _model(args, out, threads)
        elif args.command == 'budget':
            _budget(args)
        else:
            options = ReproduceOptions(write_tags=args.write_tags)
            if args.periods:
                options = replace(options, n_periods=args.periods,
                                  lifetime_periods=args.periods)
            summary = reproduce(_scenario(args), out, threads=threads,
                                options=options)
            _emit(summary['metrics'])
    except (ConfigError, ParameterError) as e:
        print(f'qdemux: {e}', file=sys.stderr)
        return EXIT_CONFIG
    except (QdemuxError, OSError) as e:
        print(f'qdemux: {e}', file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> NoReturn:
    """Console-script entry point."""
    sys.exit(run())


__all__ = ['EXIT_CONFIG', 'EXIT_OK', 'EXIT_RUNTIME', 'build_parser', 'main',
           'run']
