"""
rotalg command line

Usage:
    python run.py <command> [options]

Examples:
    python run.py norm --p 1 --q 2 --expr "U+U'+V+V'"
    python run.py butterfly --qmax 5 --expr "U+U'+V+V'" --out butterfly.csv
    python run.py classify --p 1 --q 5 --p2 4 --q2 5
    python run.py rep-equiv --q 4 1 1 i i
    python run.py rep-equiv --q 4 1 -i i -1
    python run.py normal-form --p 1 --q 2 "V*U"
    python run.py normal-form --p 2 --q 5 --coeffs coeffs.csv
    python run.py synthesize --p 2 --q 5 --expr "U^2*V" --out section.json
    python run.py fourier section.json --mmax 4

Environment:
    ROTALG_THREADS     worker cap for grid computations
    ROTALG_OUTPUT_DIR  default directory for result files
    ROTALG_LOG_LEVEL   root log level
"""

import argparse
import itertools
import logging
import sys
from typing import Callable, Dict, List, Optional

from rotalg import configure_logging
from rotalg.config.settings import Config
from rotalg.models.data_models import RepPoint, RunConfig, TorusGrid, matrix_to_pairs
from rotalg.models.errors import RangeError
from rotalg.services import bundle, spectral
from rotalg.services.algebra_core import make_params
from rotalg.services.file_manager import FileManager
from rotalg.services.ncpoly import parse, render
from rotalg.services.reps import reps_equivalent
from rotalg.utils.error_handler import EXIT_OK, cli_error_handler
from rotalg.utils.helpers import format_float, parse_complex_token

logger = logging.getLogger(__name__)


def _grid(config: RunConfig) -> TorusGrid:
    return TorusGrid(*config.grid)


def _output_path(config: RunConfig, extension: str) -> str:
    if config.output:
        return config.output
    return FileManager().default_output_path(config.command, config.expr, extension)


# ---- 命令实现 ----
def cmd_norm(config: RunConfig) -> int:
    a = parse(config.expr, make_params(config.p, config.q))
    result = spectral.operator_norm_result(a, _grid(config), config.refine)
    payload = {'p': config.p, 'q': config.q, 'expr': config.expr, **result.to_dict()}
    path = FileManager().write_json(_output_path(config, 'json'), payload)
    print(format_float(result.norm))
    logger.info(f"范数结果已写入 {path}")
    return EXIT_OK


def cmd_spectrum(config: RunConfig) -> int:
    a = parse(config.expr, make_params(config.p, config.q))
    spectrum = spectral.spectrum_selfadjoint(a, _grid(config))
    fm = FileManager()
    if config.format == 'csv':
        fm.write_csv(_output_path(config, 'csv'), ['band_lo', 'band_hi'], spectrum.intervals)
    else:
        fm.write_json(_output_path(config, 'json'), {'p': config.p, 'q': config.q, 'expr': config.expr, **spectrum.to_dict()})
    for lo, hi in spectrum.intervals:
        print(f"{format_float(lo)} {format_float(hi)}")
    return EXIT_OK


def cmd_butterfly(config: RunConfig) -> int:
    rows = spectral.butterfly(config.extra['qmax'], config.expr, _grid(config))
    fm = FileManager()
    if config.format == 'json':
        path = fm.write_json(
            _output_path(config, 'json'),
            {'expr': config.expr, 'rows': [[r.p, r.q, r.theta, r.band_lo, r.band_hi] for r in rows]},
        )
    else:
        path = fm.write_butterfly_csv(_output_path(config, 'csv'), rows)
    print(f"{len(rows)} rows -> {path}")
    return EXIT_OK


def cmd_classify(config: RunConfig) -> int:
    same = bundle.classify_isomorphic(config.p, config.q, config.extra['p2'], config.extra['q2'])
    print('isomorphic' if same else 'not-isomorphic')
    return EXIT_OK


def cmd_rep_equiv(config: RunConfig) -> int:
    z = [parse_complex_token(t, name) for t, name in zip(config.extra['points'], ('z1', 'z2', 'z1b', 'z2b'))]
    first, second = RepPoint(z[0], z[1]), RepPoint(z[2], z[3])
    if config.q is None or config.q < 1:
        raise ValueError('--q 必须为正整数')
    same = reps_equivalent(first, second, config.q, config.tolerance)
    print('equivalent' if same else 'not-equivalent')
    return EXIT_OK


def cmd_spectral_decomp(config: RunConfig) -> int:
    fm = FileManager()
    matrix = fm.load_matrix(config.extra['input'])
    family = spectral.spectral_decomposition(matrix, config.tolerance)
    polys = []
    for k in range(len(family.phases)):
        poly = spectral.projection_as_polynomial(matrix, family, k)
        polys.append({'min_power': poly.min_power, 'coeffs': [[c.real, c.imag] for c in poly.coeffs.tolist()]})
    payload = {**family.to_dict(), 'polynomials': polys}
    fm.write_json(_output_path(config, 'json'), payload)
    print(' '.join(format_float(phase) for phase in family.phases))
    return EXIT_OK


def cmd_synthesize(config: RunConfig) -> int:
    a = parse(config.expr, make_params(config.p, config.q))
    section = bundle.synthesize_section(a, config.extra.get('n'))
    path = FileManager().save_section(_output_path(config, 'json'), section)
    print(path)
    return EXIT_OK


def cmd_verify_section(config: RunConfig) -> int:
    section = FileManager().load_section(config.extra['input'])
    report = bundle.check_membership(section, config.tolerance)
    print(f"{'member' if report.is_member else 'not-member'} max_violation={format_float(report.max_violation)}")
    return EXIT_OK


def cmd_fourier(config: RunConfig) -> int:
    fm = FileManager()
    section = fm.load_section(config.extra['input'])
    m_max = config.extra.get('mmax')
    if m_max is None:
        m_max = min(8, section.n // 2 - 1)
    table = bundle.fourier_coefficients(section, m_max)
    if config.format == 'json':
        path = fm.write_json(_output_path(config, 'json'), {'m_max': table.m_max, 'rows': [list(r) for r in table.rows()]})
    else:
        path = fm.save_coeff_table(_output_path(config, 'csv'), table)
    for m, n, re_part, im_part in table.rows():
        print(f"{m},{n},{format_float(re_part)},{format_float(im_part)}")
    logger.info(f"系数表已写入 {path}")
    return EXIT_OK


def cmd_normal_form(config: RunConfig) -> int:
    params = make_params(config.p, config.q)
    if config.extra.get('coeffs'):
        table = FileManager().load_coeff_table(config.extra['coeffs'])
        logger.debug(f"从系数表 {config.extra['coeffs']} 读取 {len(table.coeffs)} 项")
        print(render(table.to_poly(params)))
    else:
        print(render(parse(config.expr, params)))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    'norm': cmd_norm,
    'spectrum': cmd_spectrum,
    'butterfly': cmd_butterfly,
    'classify': cmd_classify,
    'rep-equiv': cmd_rep_equiv,
    'spectral-decomp': cmd_spectral_decomp,
    'synthesize': cmd_synthesize,
    'verify-section': cmd_verify_section,
    'fourier': cmd_fourier,
    'normal-form': cmd_normal_form,
}


# ---- 参数解析 ----
def build_parser() -> argparse.ArgumentParser:
    compute = Config.get_compute_config()
    grid_default = 'x'.join(str(int(v)) for v in compute.get('grid', [64, 64]))

    parser = argparse.ArgumentParser(
        prog='rotalg',
        description='rotalg: rational rotation algebra computations',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Verbose logging')
    sub = parser.add_subparsers(dest='command', required=True)

    algebra = argparse.ArgumentParser(add_help=False)
    algebra.add_argument('--p', type=int, required=True, help='numerator p (1 ≤ p < q, gcd(p,q)=1)')
    algebra.add_argument('--q', type=int, required=True, help='denominator q ≥ 2')

    expr = argparse.ArgumentParser(add_help=False)
    expr.add_argument('--expr', required=True, help="expression in U, V, e.g. \"U+U'+V+V'\"")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument('--grid', default=grid_default, help=f'torus grid N1xN2 (default: {grid_default})')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--tol', type=float, default=None, help='tolerance (default from config, 1e-9)')
    common.add_argument('--out', default=None, help='output file (default: <output_dir>/<command>_<expr>.<ext>)')
    common.add_argument('--format', choices=['csv', 'json'], default=None, help='output format')

    p_norm = sub.add_parser('norm', parents=[algebra, expr, grid, common], help='operator norm')
    p_norm.add_argument('--refine', type=int, default=int(compute.get('refine', 3)), help='refinement rounds (default: 3)')

    sub.add_parser('spectrum', parents=[algebra, expr, grid, common], help='band spectrum of a self-adjoint element')

    p_bf = sub.add_parser('butterfly', parents=[expr, grid, common], help='Hofstadter butterfly data (CSV)')
    p_bf.add_argument('--qmax', type=int, required=True, help='largest denominator (≤ 50)')

    p_cls = sub.add_parser('classify', parents=[algebra, common], help='isomorphism test of two algebras')
    p_cls.add_argument('--p2', type=int, required=True)
    p_cls.add_argument('--q2', type=int, required=True)

    p_rep = sub.add_parser('rep-equiv', parents=[common], help='unitary equivalence of two representations')
    p_rep.add_argument('--q', type=int, required=True)
    p_rep.add_argument('points', nargs=4, metavar='Z', help='z1 z2 z1b z2b (complex, e.g. 1, i, -i, 0.6+0.8i)')

    p_sd = sub.add_parser('spectral-decomp', parents=[common], help='spectral family of a unitary matrix (JSON file)')
    p_sd.add_argument('input', help='matrix JSON file')

    p_syn = sub.add_parser('synthesize', parents=[algebra, expr, common], help='sample an element as a section (JSON)')
    p_syn.add_argument('--n', type=int, default=None, help='samples per axis (default: 8q)')

    p_ver = sub.add_parser('verify-section', parents=[common], help='twisted equivariance check of a section file')
    p_ver.add_argument('input', help='section JSON file')

    p_fou = sub.add_parser('fourier', parents=[common], help='Fourier coefficients of a section file')
    p_fou.add_argument('input', help='section JSON file')
    p_fou.add_argument('--mmax', type=int, default=None, help='coefficient box |m|,|n| ≤ mmax')

    p_nf = sub.add_parser('normal-form', parents=[algebra, common], help='normal form of an expression')
    p_nf.add_argument('expression', nargs='?', default=None, help='expression (or use --expr)')
    p_nf.add_argument('--expr', dest='expr', default=None, help=argparse.SUPPRESS)
    p_nf.add_argument('--coeffs', default=None, help='coefficient table CSV (m,n,re,im), e.g. fourier output')

    return parser


_DEFAULT_FORMATS = {'butterfly': 'csv', 'fourier': 'csv'}


def to_run_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    expr = getattr(args, 'expr', None)
    if command == 'normal-form':
        expr = args.expression if args.expression is not None else expr
        expr = '' if expr is None else expr
    tol = args.tol if args.tol is not None else Config.get_tolerances().get('cli', 1e-9)
    grid = TorusGrid.from_spec(args.grid) if hasattr(args, 'grid') else TorusGrid()
    extra = {
        key: getattr(args, key)
        for key in ('qmax', 'p2', 'q2', 'points', 'input', 'n', 'mmax', 'coeffs')
        if hasattr(args, key)
    }
    return RunConfig(
        command=command,
        p=getattr(args, 'p', None),
        q=getattr(args, 'q', None),
        expr=expr or '',
        grid=(grid.n1, grid.n2),
        refine=getattr(args, 'refine', int(Config.get_compute_config().get('refine', 3))),
        tolerance=float(tol),
        output=args.out,
        format=args.format or _DEFAULT_FORMATS.get(command, 'json'),
        extra=extra,
    )


@cli_error_handler
def run_command(args: argparse.Namespace) -> int:
    config = to_run_config(args)
    logger.debug(f"运行配置: {config.to_dict()}")
    return COMMANDS[config.command](config)


_FLAGS_WITHOUT_VALUE = {'-h', '--help', '-v', '--verbose'}


def _looks_complex(token: str) -> bool:
    try:
        parse_complex_token(token)
    except RangeError:
        return False
    return True


def _separate_rep_points(argv: List[str]) -> List[str]:
    """rep-equiv 的坐标可以以 '-' 开头（如 -i、-0.6+0.8i），统一移到 '--' 之后，不被当作选项"""
    if 'rep-equiv' not in argv or '--' in argv:
        return argv
    k = argv.index('rep-equiv') + 1
    options: List[str] = []
    points: List[str] = []
    rest = iter(argv[k:])
    for token in rest:
        if token.startswith('-') and not _looks_complex(token):
            options.append(token)
            if token not in _FLAGS_WITHOUT_VALUE and '=' not in token:
                options.extend(itertools.islice(rest, 1))
        else:
            points.append(token)
    return argv[:k] + options + ['--'] + points


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_separate_rep_points(list(sys.argv[1:] if argv is None else argv)))
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging('DEBUG' if args.verbose else None)
    return run_command(args)


if __name__ == '__main__':
    sys.exit(main())
