"""Command line front end for pypalette

Every subcommand produces a list of flat records. They are shown as an aligned
table (default) or written as sorted-key JSON lines (--format records), and the
SHA-256 of the JSON-lines text is the digest stored in the run manifest so a
run can be replayed and compared byte for byte.

    pypalette lagrangian graphs/c5.txt --starts 100
    pypalette pt-check graphs/f32.txt --t 6
    pypalette reproduce-observation --format records --manifest run.json
    pypalette replay run.json
"""

import argparse
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import semver
from rsxml import Logger, dotenv
from rsxml.util import safe_makedirs
from termcolor import colored

from pypalette.__version__ import __version__
from pypalette.classes.colouring import serialize_certificate
from pypalette.classes.config import DEFAULT_SEED, DEFAULT_WORKERS, SEED_ENV_VAR, WORKERS_ENV_VAR, AuditConfig, AuditMode, PaletteSolverConfig, SatisfactionBudget, SolverConfig
from pypalette.classes.exceptions import PyPaletteException, ToleranceException, WeightingException
from pypalette.classes.hypergraph import Hypergraph, f32, load_hypergraph, serialize_hypergraph, tight_cycle
from pypalette.classes.palette import load_palette, serialize_palette
from pypalette.classes.reports import RunManifest
from pypalette.classes.weighting import StarMode, Weighting
from pypalette.lib.construction import audit_density, audit_induced_density, generate_construction
from pypalette.lib.lagrangian import lagrangian
from pypalette.lib.palette_lagrangian import build_pt, palette_lagrangian
from pypalette.lib.satisfaction import almost_satisfies_distance, satisfies
from pypalette.lib.spectrum import scaled_lagrangian_spectrum

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TOLERANCE = 2

RATIONAL_TOL = 1e-8
F32_TOL = 1e-6
PT_CHECK_TOL = 1e-7

MANIFEST_NAME = 'pypalette_manifest.json'

FILE_FORMATS = f"""file formats:
  hypergraph   first line "k n", then one edge per line as k distinct vertex ids in 1..n
  palette      one ordered colour triple "a b c" per line (non-negative integers)
  certificate  first line the vertex ordering, then one "i j c" line per pair i<j
  manifest     JSON read by replay. Written to --manifest, else next to --output
               as {MANIFEST_NAME}, else logged
  Blank lines and lines starting with # are ignored.

environment:
  {SEED_ENV_VAR}     default --seed (currently {DEFAULT_SEED})
  {WORKERS_ENV_VAR}  default --workers (currently {DEFAULT_WORKERS})

exit status: 0 success, 1 error, 2 a numeric check missed its tolerance
"""


@dataclass
class CommandOutput:
    """What a subcommand hands back to main()"""

    records: list[dict]
    columns: list[str]
    failed: bool = False
    seed: int | None = None


# ----------------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------------


def records_text(records: Sequence[dict]) -> str:
    """Canonical JSON-lines text of a record list; the manifest digest is taken over this"""
    return ''.join(json.dumps(rec, sort_keys=True, separators=(',', ':')) + '\n' for rec in records)


def records_digest(records: Sequence[dict]) -> str:
    return hashlib.sha256(records_text(records).encode('utf-8')).hexdigest()


def _cell(value) -> str:
    if isinstance(value, float):
        return f'{value:.12g}'
    if isinstance(value, dict | list | tuple):
        return json.dumps(value, separators=(',', ':'))
    if value is None:
        return '-'
    return str(value)


def render_table(records: Sequence[dict], columns: Sequence[str]) -> str:
    rows = [[_cell(rec.get(col)) for col in columns] for rec in records]
    widths = [max([len(col)] + [len(row[i]) for row in rows]) for i, col in enumerate(columns)]
    lines = ['  '.join(col.ljust(w) for col, w in zip(columns, widths, strict=True))]
    lines.append('  '.join('-' * w for w in widths))
    for rec, row in zip(records, rows, strict=True):
        line = '  '.join(cell.ljust(w) for cell, w in zip(row, widths, strict=True))
        if rec.get('passed') is False or rec.get('match') is False:
            line = colored(line, 'red')
        lines.append(line)
    return '\n'.join(lines)


def _write_text(path: str, text: str):
    folder = os.path.dirname(os.path.abspath(path))
    safe_makedirs(folder)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)


def _parse_weights(text: str, colours: Sequence[int]) -> Weighting:
    """--weights "w1,w2,..." in colour order; entries may be fractions like 1/3"""
    try:
        values = [Fraction(tok.strip()) for tok in text.split(',') if tok.strip()]
    except (ValueError, ZeroDivisionError) as err:
        raise WeightingException(f'Could not parse --weights "{text}": {err}') from err
    if len(values) != len(colours):
        raise WeightingException(f'--weights has {len(values)} entries but the palette has {len(colours)} colours {list(colours)}')
    if abs(float(sum(values)) - 1) > 1e-6:
        raise WeightingException(f'--weights sum to {float(sum(values))}, not 1')
    return Weighting.from_array(colours, [float(v) for v in values])


def _show_progress(args) -> bool:
    """Progress bars write to stdout, so only draw them when the results go to a file and stdout is a terminal"""
    return bool(args.output) and sys.stdout.isatty()


def manifest_path(args) -> str | None:
    """Where the run manifest goes: --manifest, else beside --output, else nowhere (it is logged instead)"""
    if args.manifest:
        return args.manifest
    if args.output:
        return os.path.join(os.path.dirname(os.path.abspath(args.output)), MANIFEST_NAME)
    return None


def _record_manifest(args, argv: Sequence[str], output: CommandOutput, duration: float, log: Logger):
    manifest = RunManifest(args.command, tuple(argv), output.seed, str(semver.VersionInfo.parse(__version__)), duration, records_digest(output.records))
    path = manifest_path(args)
    if path is None:
        log.info(f'Run manifest: {json.dumps(manifest.to_record(), sort_keys=True)}')
        return
    _write_text(path, json.dumps(manifest.to_record(), indent=2, sort_keys=True) + '\n')
    log.info(f'Manifest written to {path}')


def _solver_config(args) -> SolverConfig:
    return SolverConfig(starts=args.starts, seed=args.seed, max_workers=args.workers)


# ----------------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------------


def cmd_lagrangian(args) -> CommandOutput:
    graph = load_hypergraph(args.graph)
    config = SolverConfig(starts=args.starts, seed=args.seed, tolerance=args.tol, oracle_resolution=args.oracle_res, max_workers=args.workers)
    report = lagrangian(graph, config)
    rec = {'graph': os.path.basename(args.graph), 'n': graph.n, 'edges': graph.m, **report.to_record()}
    return CommandOutput([rec], ['graph', 'n', 'edges', 'value', 'method', 'residual', 'oracle_value', 'maximiser'], seed=args.seed)


def cmd_palette_lagrangian(args) -> CommandOutput:
    palette = load_palette(args.palette)
    config = PaletteSolverConfig(solver=_solver_config(args), support_cap=args.support_cap, strict=args.strict)
    report = palette_lagrangian(palette, StarMode.parse(args.star), config)
    rec = {'palette': os.path.basename(args.palette), 'colours': len(palette.colours), 'triples': len(palette.triples), **report.to_record()}
    return CommandOutput([rec], ['palette', 'star', 'value', 'method', 'support', 'heuristic', 'oracle_value', 'maximiser'], seed=args.seed)


def cmd_build_pt(args) -> CommandOutput:
    graph = load_hypergraph(args.graph)
    palette = build_pt(graph, args.t)
    if args.output_palette:
        _write_text(args.output_palette, serialize_palette(palette))
    rec = {'graph': os.path.basename(args.graph), 't': args.t, 'colours': len(palette.colours), 'triples': [list(t) for t in palette.triples], 'output': args.output_palette}
    return CommandOutput([rec], ['graph', 't', 'colours', 'triples', 'output'])


def cmd_satisfies(args) -> CommandOutput:
    log = Logger('Satisfies')
    graph = load_hypergraph(args.graph)
    palette = load_palette(args.palette)
    result = satisfies(graph, palette, SatisfactionBudget(max_n=args.max_n, max_nodes=args.max_nodes, max_workers=args.workers))
    if args.emit_cert:
        if result.certificate is None:
            log.warning(f'No certificate to write: status is {result.status.value}')
        else:
            _write_text(args.emit_cert, serialize_certificate(result.certificate))
            log.info(f'Certificate written to {args.emit_cert}')
    rec = {'graph': os.path.basename(args.graph), 'palette': os.path.basename(args.palette), **result.to_record()}
    return CommandOutput([rec], ['graph', 'palette', 'status', 'ordering', 'nodes', 'reason'])


def cmd_almost_distance(args) -> CommandOutput:
    graph = load_hypergraph(args.graph)
    palette = load_palette(args.palette)
    result = almost_satisfies_distance(graph, palette, SatisfactionBudget(max_nodes=args.max_nodes, distance_max_n=args.max_n, max_workers=args.workers))
    rec = {'graph': os.path.basename(args.graph), 'palette': os.path.basename(args.palette), 'edges': graph.m, **result.to_record()}
    return CommandOutput([rec], ['graph', 'palette', 'edges', 'distance', 'lower_bound', 'optimal', 'removed', 'nodes'])


def cmd_construct(args) -> CommandOutput:
    log = Logger('Construct')
    palette = load_palette(args.palette)
    if args.weights:
        weighting = _parse_weights(args.weights, palette.colours)
    elif args.optimal:
        weighting = palette_lagrangian(palette, StarMode.VVV, PaletteSolverConfig(solver=_solver_config(args))).maximiser
        log.info(f'Using the vvv maximiser {weighting.as_dict()}')
    else:
        weighting = Weighting.uniform(palette.colours)
    construction = generate_construction(palette, weighting, args.n, args.seed)
    if args.output_graph:
        _write_text(args.output_graph, serialize_hypergraph(construction.hypergraph))
    if args.emit_cert:
        _write_text(args.emit_cert, serialize_certificate(construction.certificate()))
    rec = {'palette': os.path.basename(args.palette), **construction.to_record(), 'output': args.output_graph, 'certificate': args.emit_cert}
    return CommandOutput([rec], ['palette', 'n', 'edges', 'density', 'weighting', 'seed', 'output'], seed=args.seed)


def cmd_audit(args) -> CommandOutput:
    graph = load_hypergraph(args.graph)
    mode = AuditMode.EXHAUSTIVE if args.exhaustive else AuditMode.SAMPLED
    config = AuditConfig(eta=args.eta, mode=mode, samples=args.samples, densities=tuple(args.density), seed=args.seed, max_workers=args.workers)
    if args.star == 'induced':
        audit = audit_induced_density(graph, config)
    else:
        audit = audit_density(graph, StarMode.parse(args.star), config, progress=_show_progress(args))
    rec = {'graph': os.path.basename(args.graph), 'n': graph.n, **audit.to_record()}
    return CommandOutput([rec], ['graph', 'star', 'd_estimate', 'eta', 'count', 'size', 'mode', 'samples'], seed=args.seed)


def observation_targets() -> list[tuple[str, Hypergraph, float, float]]:
    """(name, F, target for Lambda_F / 6, tolerance) for the tight cycles C_3..C_7 and F_{3,2}"""
    rows = [
        ('C3', tight_cycle(3), 1 / 27),
        ('C4', tight_cycle(4), 1 / 16),
        ('C5', tight_cycle(5), 1 / 25),
        ('C6', tight_cycle(6), 1 / 27),
        ('C7', tight_cycle(7), 1 / 27),
    ]
    targets = [(name, graph, target, RATIONAL_TOL) for name, graph, target in rows]
    targets.append(('F32', f32(), (5 * math.sqrt(5) + 63) / 1922, F32_TOL))
    return targets


def cmd_reproduce_observation(args) -> CommandOutput:
    log = Logger('Observation')
    config = _solver_config(args)
    records = []
    for name, graph, target, tol in observation_targets():
        computed = lagrangian(graph, config).value / 6
        error = abs(computed - target)
        passed = error <= tol
        if not passed:
            log.error(f'{name}: computed {computed:.12f} but expected {target:.12f} (error {error:.3e} > {tol:.0e})')
        records.append({'graph': name, 'computed': computed, 'target': target, 'error': error, 'tolerance': tol, 'passed': passed})
    return CommandOutput(records, ['graph', 'computed', 'target', 'error', 'tolerance', 'passed'], failed=not all(r['passed'] for r in records), seed=args.seed)


def cmd_pt_check(args) -> CommandOutput:
    log = Logger('PtCheck')
    graph = load_hypergraph(args.graph)
    config = _solver_config(args)
    palette = build_pt(graph, args.t)
    lam = lagrangian(graph, config).value
    vvv = palette_lagrangian(palette, StarMode.VVV, PaletteSolverConfig(solver=config)).value
    scaled = args.t * lam / 6
    error = abs(vvv - scaled)
    passed = error < PT_CHECK_TOL
    if not passed:
        log.error(f'Palette Lagrangian {vvv:.12f} differs from (t/6) * Lambda_F = {scaled:.12f} by {error:.3e}')
    rec = {'graph': os.path.basename(args.graph), 't': args.t, 'lagrangian': lam, 'palette_lagrangian': vvv, 'scaled_lagrangian': scaled, 'error': error, 'passed': passed}
    return CommandOutput([rec], ['graph', 't', 'lagrangian', 'palette_lagrangian', 'scaled_lagrangian', 'error', 'passed'], failed=not passed, seed=args.seed)


def cmd_spectrum(args) -> CommandOutput:
    entries = scaled_lagrangian_spectrum(args.max_n, tuple(args.t), _solver_config(args), progress=_show_progress(args))
    return CommandOutput([e.to_record() for e in entries], ['value', 't', 'lagrangian', 'n', 'edges'], seed=args.seed)


def cmd_replay(args) -> CommandOutput:
    log = Logger('Replay')
    with open(args.manifest, encoding='utf-8') as f:
        try:
            manifest = RunManifest.from_record(json.load(f))
        except (KeyError, TypeError, ValueError) as err:
            raise PyPaletteException(f'Malformed manifest {args.manifest}: {err}') from err
    if manifest.command == 'replay':
        raise PyPaletteException('A replay manifest cannot itself be replayed')

    try:
        recorded = semver.VersionInfo.parse(manifest.version)
    except ValueError as err:
        raise PyPaletteException(f'Manifest version "{manifest.version}" is not a semantic version') from err
    current = semver.VersionInfo.parse(__version__)
    if (recorded.major, recorded.minor) != (current.major, current.minor):
        log.warning(f'Manifest was written by pypalette {recorded}, this is {current}; records may legitimately differ')

    replay_args = build_parser().parse_args(list(manifest.argv))
    log.info(f'Replaying "{manifest.command}" with seed {manifest.seed}')
    output = COMMANDS[replay_args.command](replay_args)
    actual = records_digest(output.records)
    match = actual == manifest.digest
    if not match:
        log.error(f'Digest mismatch: manifest {manifest.digest}, replay {actual}')
    rec = {'command': manifest.command, 'expected': manifest.digest, 'actual': actual, 'match': match}
    return CommandOutput([rec], ['command', 'expected', 'actual', 'match'], failed=not match, seed=manifest.seed)


COMMANDS: dict[str, Callable[[argparse.Namespace], CommandOutput]] = {
    'lagrangian': cmd_lagrangian,
    'palette-lagrangian': cmd_palette_lagrangian,
    'build-pt': cmd_build_pt,
    'satisfies': cmd_satisfies,
    'almost-distance': cmd_almost_distance,
    'construct': cmd_construct,
    'audit': cmd_audit,
    'reproduce-observation': cmd_reproduce_observation,
    'pt-check': cmd_pt_check,
    'spectrum': cmd_spectrum,
    'replay': cmd_replay,
}


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['table', 'records'], default='table', help='aligned table or sorted-key JSON lines')
    common.add_argument('--output', help='write the records/table here instead of stdout', type=str)
    common.add_argument('--log-file', help='log file', type=str, default=os.path.join(tempfile.gettempdir(), 'pypalette.log'))
    common.add_argument('--verbose', help='debug logging', action='store_true', default=False)
    common.add_argument('--manifest', help=f'write the replay manifest (JSON) here instead of {MANIFEST_NAME} beside --output', type=str)
    common.add_argument('--workers', help='threads for the parallel parts', type=int, default=DEFAULT_WORKERS)

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument('--seed', help='generator seed', type=int, default=DEFAULT_SEED)
    seeded.add_argument('--starts', help='random restarts for each Lagrangian', type=int, default=200)

    parser = argparse.ArgumentParser(prog='pypalette', description='Lagrangians, palettes and uniform densities of 3-graphs', epilog=FILE_FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name: str, help_text: str, parents=(common,)) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=list(parents), epilog=FILE_FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add('lagrangian', 'Lagrangian of a hypergraph', (common, seeded))
    p.add_argument('graph', help='hypergraph file', type=str)
    p.add_argument('--tol', help='slack allowed below the grid oracle', type=float, default=1e-9)
    p.add_argument('--oracle-res', help='grid oracle resolution', type=int, default=12)

    p = add('palette-lagrangian', 'vvv, ev or ee Lagrangian of a palette', (common, seeded))
    p.add_argument('palette', help='palette file', type=str)
    p.add_argument('--star', choices=[s.value for s in StarMode], required=True)
    p.add_argument('--support-cap', help='largest palette solved by exact support enumeration', type=int, default=12)
    p.add_argument('--strict', help='fail instead of falling back to the heuristic above the support cap', action='store_true', default=False)

    p = add('build-pt', 'write the p_t palette of a 3-graph')
    p.add_argument('graph', help='hypergraph file', type=str)
    p.add_argument('--t', help='permutations kept per edge (1..6)', type=int, required=True)
    p.add_argument('-o', dest='output_palette', help='palette file to write', type=str)

    p = add('satisfies', 'decide whether a 3-graph satisfies a palette')
    p.add_argument('graph', help='hypergraph file', type=str)
    p.add_argument('palette', help='palette file', type=str)
    p.add_argument('--max-n', help='largest graph the search will attempt', type=int, default=10)
    p.add_argument('--max-nodes', help='search node budget', type=int, default=2_000_000)
    p.add_argument('--emit-cert', help='write the satisfying ordering and colouring here', type=str)

    p = add('almost-distance', 'fewest edge deletions after which a 3-graph satisfies a palette')
    p.add_argument('graph', help='hypergraph file', type=str)
    p.add_argument('palette', help='palette file', type=str)
    p.add_argument('--max-n', help='largest graph searched exactly', type=int, default=8)
    p.add_argument('--max-nodes', help='search node budget', type=int, default=2_000_000)

    p = add('construct', 'random palette construction', (common, seeded))
    p.add_argument('palette', help='palette file', type=str)
    p.add_argument('--n', help='number of vertices', type=int, required=True)
    weights = p.add_mutually_exclusive_group()
    weights.add_argument('--weights', help='comma separated colour weights in sorted colour order', type=str)
    weights.add_argument('--optimal', help='use the vvv maximiser of the palette', action='store_true', default=False)
    p.add_argument('-o', dest='output_graph', help='hypergraph file to write', type=str)
    p.add_argument('--emit-cert', help='write the construction ordering and colouring here', type=str)

    p = add('audit', 'uniform density audit of a 3-graph', (common, seeded))
    p.add_argument('graph', help='hypergraph file', type=str)
    p.add_argument('--star', choices=[s.value for s in StarMode] + ['induced'], required=True)
    p.add_argument('--eta', help='additive slack as a fraction of n^3', type=float, required=True)
    p.add_argument('--samples', help='random witnesses in sampled mode', type=int, default=10_000)
    p.add_argument('--density', help='inclusion probabilities for sampled subsets', type=float, nargs='+', default=[0.1, 0.25, 0.5])
    p.add_argument('--exhaustive', help='enumerate every witness (small graphs only)', action='store_true', default=False)

    p = add('reproduce-observation', 'Lagrangians of the tight cycles C3..C7 and F_{3,2}', (common, seeded))
    p.set_defaults(starts=40)

    p = add('pt-check', 'check the p_t palette Lagrangian equals (t/6) * Lambda_F', (common, seeded))
    p.add_argument('graph', help='hypergraph file', type=str)
    p.add_argument('--t', help='permutations kept per edge (1..6)', type=int, default=6)

    p = add('spectrum', 'distinct values (t/6) * Lambda_F over small 3-graphs', (common, seeded))
    p.add_argument('--max-n', help='largest vertex count (at most 5)', type=int, default=4)
    p.add_argument('--t', help='t values to scale by', type=int, nargs='+', default=[1, 2, 3, 4, 5, 6])
    p.set_defaults(starts=40)

    p = add('replay', 'rerun a manifest and compare digests')
    p.add_argument('manifest', help='manifest file', type=str)

    return parser


def _emit(args, output: CommandOutput):
    if args.format == 'records':
        text = records_text(output.records)
    else:
        text = render_table(output.records, output.columns) + '\n'
    if args.output:
        _write_text(args.output, text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point. Returns the process exit status (0 ok, 1 error, 2 tolerance failure)"""
    parser = build_parser()
    if argv is None:
        args = dotenv.parse_args_env(parser)
        argv = sys.argv[1:]
    else:
        args = parser.parse_args(list(argv))

    log = Logger('pypalette')
    # records on stdout stay machine readable: only warnings and worse get logged
    quiet = args.format == 'records' and not args.output and not args.verbose
    log_level = logging.DEBUG if args.verbose else logging.WARNING if quiet else logging.INFO
    log.setup(log_path=args.log_file, log_level=log_level)
    log.title(f'pypalette {__version__}: {args.command}')

    start = time.time()
    try:
        output = COMMANDS[args.command](args)
        duration = time.time() - start
        _emit(args, output)

        if args.command != 'replay':
            _record_manifest(args, argv, output, duration, log)

        log.debug(f'{args.command} finished in {duration:.2f}s')
        if output.failed:
            raise ToleranceException(f'{args.command}: {sum(1 for r in output.records if r.get("passed") is False or r.get("match") is False)} check(s) failed')
    except ToleranceException as err:
        log.error(err.message)
        print(colored(err.message, 'red'), file=sys.stderr)
        return EXIT_TOLERANCE
    except PyPaletteException as err:
        log.error(err.message)
        print(colored(err.message, 'red'), file=sys.stderr)
        return EXIT_ERROR
    except OSError as err:
        log.error(f'Could not read or write a file: {err}')
        print(colored(str(err), 'red'), file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
