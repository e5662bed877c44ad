#!/usr/bin/env python3
"""
E_n Toolkit - CLI Entry Point

Lowers polynomial equations into systems of x_i = 1, x_i + x_j = x_k and
x_i * x_j = x_k, solves them in bounded boxes, computes the conjectural
height bounds and runs the explicit constructions.

Usage:
    python diophantine_cli.py <subcommand> [options]
"""

import argparse
import logging
import sys
from typing import Callable, Dict, Optional, Tuple

import pandas as pd

from bounds import bound_D, bound_nonneg, bound_rational, card_T, general_psi_bound, psi_bound_D
from config import DEFAULTS, ToolkitConfig, use_config
from ensys import EnSystem, count_solutions, enumerate_box, load_system
from errors import InfeasibleError, ToolkitError
from explorer import probe, semi_algorithm_infinite, survey, survey_table, write_jsonl
from gallery import (build_chain, build_thm7, build_thm8, gadget_demo, thm8_lemma8_chain,
                     worked_example, write_fixtures)
from lower import lower_canonical, lower_compact
from pell import pell_table
from performance import ResultCache
from poly import coeff_stats, parse_equation, to_text
from transforms import hat, rationalize, tilde
from utils import dumps, export_table
from validators import validate_equation_text, validate_system_file, validate_yaml_config

logger = logging.getLogger(__name__)

# (payload for --format json, text rendering, optional table for --xlsx)
Result = Tuple[object, str, Optional[pd.DataFrame]]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _setup_logging(args):
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format='%(message)s', stream=sys.stderr, force=True)


def _progress(args) -> bool:
    return not args.quiet and sys.stderr.isatty()


def _load_equation(text: str):
    is_valid, error = validate_equation_text(text)
    if not is_valid:
        raise ValueError(error)
    return parse_equation(text)


def _load_system(path: str) -> EnSystem:
    is_valid, error = validate_system_file(path)
    if not is_valid:
        raise ValueError(error)
    return load_system(path)


def _system_text(system: EnSystem) -> str:
    lines = [f"n = {system.n}, {len(system)} equations"]
    lines.extend(str(eq) for eq in system.equations)
    return "\n".join(lines) + "\n"


# Subcommand handlers

def cmd_parse(args) -> Result:
    eq = _load_equation(args.equation)
    m, degrees = coeff_stats(eq.normalized)
    payload = {
        "lhs": to_text(eq.lhs),
        "rhs": to_text(eq.rhs),
        "normalized": to_text(eq.normalized),
        "num_vars": eq.num_vars,
        "max_coefficient": m,
        "degrees": degrees,
    }
    text = f"{eq}\nD = {to_text(eq.normalized)}\n"
    return payload, text, None


def cmd_lower(args) -> Result:
    eq = _load_equation(args.equation)
    if args.mode == 'canonical':
        lowering = lower_canonical(eq.normalized)
    else:
        lowering = lower_compact(eq)
    system = lowering.target
    payload = {"system": system.to_json(), "map": lowering.to_json()}
    return payload, _system_text(system), None


def cmd_bound(args) -> Result:
    eq = _load_equation(args.equation)
    d = eq.normalized
    if args.domain == 'rational':
        report = bound_rational(eq, mul_form=args.mul_form)
        return report.to_jsonable(), report.bound.to_string() + "\n", None
    bound = bound_nonneg(d) if args.domain == 'nonneg' else bound_D(d)
    payload = {"domain": args.domain, "card_T": card_T(d).to_string(), "bound": bound.to_string()}
    return payload, bound.to_string() + "\n", None


def cmd_solve(args) -> Result:
    system = _load_system(args.system)
    limit = args.limit if args.limit is not None else DEFAULTS.search.default_limit
    workers = DEFAULTS.search.worker_count(args.threads)
    result = enumerate_box(system, args.box, limit=limit, workers=workers)
    lines = [" ".join(str(v) for v in s) for s in result.solutions]
    if result.truncated:
        lines.append(f"... truncated at {limit}")
    table = pd.DataFrame({'solution': [tuple(s) for s in result.solutions]})
    return result.to_jsonable(), "\n".join(lines) + "\n", table


def cmd_count(args) -> Result:
    system = _load_system(args.system)
    total = count_solutions(system, args.box, workers=DEFAULTS.search.worker_count(args.threads))
    return {"n": system.n, "box": args.box, "count": total}, f"{total}\n", None


def cmd_tilde(args) -> Result:
    result = tilde(_load_system(args.system))
    return result.to_json(), _system_text(result), None


def cmd_hat(args) -> Result:
    eq = _load_equation(args.equation)
    d_hat = hat(eq.normalized)
    text = to_text(d_hat)
    return {"num_vars": d_hat.num_vars, "polynomial": text}, text + "\n", None


def cmd_rationalize(args) -> Result:
    system = _load_system(args.system)
    eqs = rationalize(system, mul_form=args.mul_form)
    lines = [str(eq) for eq in eqs]
    return {"num_vars": 12 * system.n, "equations": lines}, "\n".join(lines) + "\n", None


def cmd_probe(args) -> Result:
    verdict = probe(args.values, args.horizon, strict=args.strict)
    text = verdict.kind if verdict.witness is None else f"{verdict.kind} {verdict.witness}"
    return verdict, text + "\n", None


def cmd_survey(args) -> Result:
    results = survey(
        args.n,
        growth_box=args.growth_box,
        seed=args.seed,
        samples=args.samples,
        workers=DEFAULTS.search.worker_count(args.threads),
        progress=_progress(args),
    )
    if args.output:
        write_jsonl(results, args.output)
    table = survey_table(results)
    text = "\n".join(f"{row.status:<20} max={row.max_norm:<6} {row.system}"
                     for row in table.itertuples()) + "\n"
    return results, text, table


def cmd_semi(args) -> Result:
    eq = _load_equation(args.equation)
    report = semi_algorithm_infinite(eq.normalized, args.override_start, args.cutoff, nonneg=args.nonneg)
    if report.status == 'terminated':
        text = f"terminated at shell {report.shell}: {report.witness}"
    elif report.status == 'exhausted':
        text = f"no solution on shells {report.start}..{report.cutoff}"
    else:
        text = f"refused: start {report.start} is out of reach"
    return report, text + "\n", None


def cmd_gallery(args) -> Result:
    if args.construction == 'example':
        report = worked_example(workers=DEFAULTS.search.worker_count(args.threads), progress=_progress(args))
        table = pd.DataFrame(report.solutions, columns=['x1', 'x2'])
        return report, report.to_text(), table
    if args.construction == 'chain':
        system = build_chain(args.n)
    elif args.construction == 'thm7':
        system = build_thm7(args.n)
    elif args.construction == 'thm8':
        if args.chain:
            chain = thm8_lemma8_chain(args.depth)
            text = "\n".join(f"{k}: {v}" for k, v in chain.to_jsonable().items()) + "\n"
            return chain, text, None
        system = build_thm8(args.depth)
    elif args.construction == 'gadget':
        demo = gadget_demo(args.n, args.m)
        text = f"{demo['variables']} variables (n + 11(m-1) = {demo['expected_variables']})\n"
        return demo, text, None
    else:
        paths = write_fixtures(args.directory)
        return paths, "\n".join(paths) + "\n", None
    return system.to_json(), _system_text(system), None


def cmd_pell(args) -> Result:
    table = pell_table(args.x, args.count)
    rows = [{k: (v.item() if hasattr(v, "item") else v) for k, v in r.items()}
            for r in table.to_dict(orient="records")]
    text = "\n".join(f"x={r['x']} k={r['k']} y={r['y']} bound_holds={r['bound_holds']}" for r in rows) + "\n"
    return rows, text, table


def cmd_psi(args) -> Result:
    if args.equation is not None:
        value = psi_bound_D(_load_equation(args.equation).normalized, args.psi)
    else:
        value = general_psi_bound(args.n, args.psi)
    text = value.to_string()
    return {"psi": args.psi, "value": text}, text + "\n", None


HANDLERS: Dict[str, Callable] = {
    'parse': cmd_parse,
    'lower': cmd_lower,
    'bound': cmd_bound,
    'solve': cmd_solve,
    'count': cmd_count,
    'tilde': cmd_tilde,
    'hat': cmd_hat,
    'rationalize': cmd_rationalize,
    'probe': cmd_probe,
    'survey': cmd_survey,
    'semi': cmd_semi,
    'gallery': cmd_gallery,
    'pell': cmd_pell,
    'psi': cmd_psi,
}

# Commands whose output does not depend only on their arguments
UNCACHED = {'gallery'}
OUTPUT_FLAGS = {'command', 'verbose', 'quiet', 'cache_dir', 'config', 'xlsx', 'threads'}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['text', 'json'], default='text',
                        help='Output format (default: text)')
    common.add_argument('--cache-dir', nargs='?', const='', default=None,
                        help='Reuse and store results in this directory '
                             '(bare flag: cache.directory from the settings)')
    common.add_argument('--config', default=None,
                        help='Path to settings.yaml (default: built-in settings)')
    common.add_argument('--xlsx', default=None,
                        help='Also write tabular results to this Excel file')
    common.add_argument('--threads', type=int, default=None,
                        help='Worker processes for sharded searches (default: all cores)')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Debug logging on stderr')
    verbosity.add_argument('--quiet', action='store_true', help='Warnings only on stderr')

    parser = argparse.ArgumentParser(
        description='Lower, bound and solve Diophantine equations as E_n systems',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python diophantine_cli.py parse "x1^5 - x1 = x2^2 - x2"
    python diophantine_cli.py lower --mode compact "x1^5 - x1 = x2^2 - x2"
    python diophantine_cli.py bound --domain integer "x1 - 1 = 0"
    python diophantine_cli.py count --box 65536 fixtures/thm7_n10.json
    python diophantine_cli.py gallery example --format json

Exit codes: 0 success, 1 error, 2 usage, 3 infeasible (e.g. card(T) over the cap).
Results go to stdout; progress and logs go to stderr.
        """
    )
    sub = parser.add_subparsers(dest='command', required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add('parse', 'Parse an equation and print its normal form')
    p.add_argument('equation')

    p = add('lower', 'Lower an equation to an E_n system')
    p.add_argument('equation')
    p.add_argument('--mode', choices=['compact', 'canonical'], default='compact')

    p = add('bound', 'Conjectural height bound for the solutions of an equation')
    p.add_argument('equation')
    p.add_argument('--domain', choices=['integer', 'nonneg', 'rational'], default='integer')
    p.add_argument('--mul-form', choices=['verbatim', 'corrected'], default='verbatim')

    for name, help_text in (('solve', 'List the solutions of a system in a box'),
                            ('count', 'Count the solutions of a system in a box')):
        p = add(name, help_text)
        p.add_argument('system', help='System JSON file')
        p.add_argument('--box', type=int, required=True, help='Box radius B')
        if name == 'solve':
            p.add_argument('--limit', type=int, default=None)

    p = add('tilde', 'Replace x_i = 1 equations by multiplicative ones')
    p.add_argument('system')

    p = add('hat', 'Four-square encoding of non-negative solutions')
    p.add_argument('equation')

    p = add('rationalize', 'Integer equations encoding rational solutions')
    p.add_argument('system')
    p.add_argument('--mul-form', choices=['verbatim', 'corrected'], default='verbatim')

    p = add('probe', 'Test one tuple against the bound reformulation')
    p.add_argument('values', nargs='+', type=int)
    p.add_argument('--horizon', type=int, required=True)
    p.add_argument('--strict', action='store_true', help='Require |y1| > |x1|')

    p = add('survey', 'Classify small systems')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--growth-box', type=int, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--samples', type=int, default=None)
    p.add_argument('--output', default=None, help='Write a JSON-lines report to this file')

    p = add('semi', 'Shell search that halts on infinitely many solutions')
    p.add_argument('equation')
    p.add_argument('--override-start', type=int, default=None)
    p.add_argument('--cutoff', type=int, default=100)
    p.add_argument('--nonneg', action='store_true')

    p = add('gallery', 'Explicit constructions')
    p.add_argument('construction', choices=['chain', 'thm7', 'thm8', 'example', 'gadget', 'fixtures'])
    p.add_argument('--n', type=int, default=10)
    p.add_argument('--m', type=int, default=3)
    p.add_argument('--depth', type=int, default=4)
    p.add_argument('--chain', action='store_true', help='thm8: report the lower-bound chain')
    p.add_argument('--directory', default='fixtures')

    p = add('pell', 'Square witnesses from Pell equations')
    p.add_argument('--x', type=int, nargs='+', required=True)
    p.add_argument('--count', type=int, default=3)

    p = add('psi', 'Evaluate an alternative bound function')
    p.add_argument('equation', nargs='?', default=None, help='Apply psi to card(T) of this equation')
    p.add_argument('--psi', default='default', help='Registry name or expression in n')
    p.add_argument('--n', type=int, default=1)

    return parser


def _cache_key(args) -> Tuple[str, str]:
    flags = {k: v for k, v in vars(args).items() if k not in OUTPUT_FLAGS}
    source = flags.get('system')
    canonical = _load_system(source).to_canonical_json() if source else ''
    if 'equation' in flags and flags['equation'] is not None:
        canonical = to_text(_load_equation(flags['equation']).normalized)
    flags.pop('system', None)
    flags.pop('equation', None)
    return args.command, ResultCache.make_key(args.command, canonical, flags)


def run(argv=None) -> int:
    """Run one command; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    _setup_logging(args)

    try:
        if args.config:
            logger.info(f"🔧 Loading configuration: {args.config}")
            is_valid, error = validate_yaml_config(args.config)
            if not is_valid:
                logger.error(f"❌ Error: {error}")
                return EXIT_ERROR
            use_config(ToolkitConfig.load_from_yaml(args.config))

        cache = None
        key = None
        cache_dir = DEFAULTS.cache_dir if args.cache_dir == '' else args.cache_dir
        if (cache_dir and args.command not in UNCACHED and not args.xlsx
                and not getattr(args, 'output', None)):
            cache = ResultCache(cache_dir)
            _, key = _cache_key(args)
            cached = cache.get(key)
            if cached is not None:
                sys.stdout.write(cached)
                return EXIT_OK

        payload, text, table = HANDLERS[args.command](args)
        output = dumps(payload) if args.format == 'json' else text

        if args.xlsx:
            if table is None:
                logger.warning(f"⚠ '{args.command}' has no tabular output; --xlsx ignored")
            else:
                export_table(table, args.xlsx)

        if cache is not None:
            cache.put(key, output)
        sys.stdout.write(output)
        return EXIT_OK

    except InfeasibleError as e:
        logger.error(f"❌ Infeasible: {e}")
        return EXIT_INFEASIBLE
    except FileNotFoundError as e:
        logger.error(f"❌ Error: File not found - {e}")
        return EXIT_ERROR
    except (ValueError, ToolkitError) as e:
        logger.error(f"❌ Error: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}")
        import traceback
        traceback.print_exc()
        return EXIT_ERROR


def main():
    """Main CLI entry point"""
    return run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
