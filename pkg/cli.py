# Command line: run / sweep / compare / calc / serve
import argparse
import sys

from config.env import get_config
from config.scenario import DEFAULT_SWEEP_VALUES, SweepSpec, load_scenario
from services.experiment_service import (
    calc_table, compare, compare_matrix, summaries_frame, sweep, write_table,
)
from services.metrics_service import CSV_COLUMNS, RunSummary
from services.policy_service import PolicyKind
from services.simulation_service import run_simulation
from utils.errors import ValidationError, exit_code_for
from utils.logger import logger

ALL_POLICIES = [kind.value for kind in PolicyKind]


class CliParser(argparse.ArgumentParser):
    """argparse trả lỗi dạng ValidationError (exit 1) thay vì exit 2"""

    def error(self, message):
        raise ValidationError(message, field='arguments')


def _key_value(text):
    key, sep, value = text.partition('=')
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), value.strip()


def _csv_list(text):
    return [item.strip() for item in text.split(',') if item.strip()]


def _int_list(text):
    try:
        return [int(item) for item in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _burst_spec(text):
    """CONN:PACKETS[@TIME]"""
    try:
        head, _, at = text.partition('@')
        conn, packets = head.split(':')
        return int(conn), int(packets), float(at) if at else 0.0
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected CONN:PACKETS[@TIME], got {text!r}") from None


def build_parser():
    common = CliParser(add_help=False)
    common.add_argument('--config', help='scenario file (flat KEY=VALUE)')
    common.add_argument('--seed', help='master seed (u64)')
    common.add_argument('--duration', help='simulated seconds')
    common.add_argument('--policy', help='QS, FS, QSFS, FSDCH or MT')
    common.add_argument('--scheduler', type=str.upper, choices=['PS', 'LAS'], help='FACH discipline')
    common.add_argument('--set', dest='overrides', type=_key_value, action='append', default=[],
                        metavar='KEY=VALUE', help='override any scenario key (repeatable)')
    common.add_argument('--out', help='CSV output path (default: stdout)')
    common.add_argument('--store', metavar='DATABASE_URL', help='also save run summaries to this database')

    multi = CliParser(add_help=False)
    multi.add_argument('--policies', type=_csv_list, help='comma-separated KIND[+ps|+las] list')
    multi.add_argument('--values', type=_int_list, help='threshold values (default: 1..30 grid)')
    multi.add_argument('--seeds', type=_int_list, help='comma-separated seeds (default: --seed)')
    multi.add_argument('--workers', type=int, default=get_config().SIM_WORKERS,
                       help='parallel worker processes (default: SIM_WORKERS)')

    parser = CliParser(prog='channel-switch-sim', description='UMTS downlink channel switching simulator')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', parents=[common], help='one simulation, one CSV row')
    run.add_argument('--n-tcp', type=int)
    run.add_argument('--n-dch', type=int)
    run.add_argument('--trace', help='write the event trace to this path')
    run.add_argument('--audit', action='store_true', help='check invariants after every event')
    run.add_argument('--inject', type=_burst_spec, action='append', default=[], metavar='CONN:PACKETS[@TIME]',
                     help='inject a fixed burst (repeatable)')

    sw = sub.add_parser('sweep', parents=[common, multi], help='threshold sweep over policies and seeds')
    sw.add_argument('--n-tcp', type=int)
    sw.add_argument('--n-dch', type=int)
    sw.add_argument('--parameter', choices=['s', 't_h'],
                    help='swept threshold (default: the one each policy uses)')
    sw.add_argument('--summary-out', help='aggregate table path (default: <out>.summary.csv)')

    cmp_ = sub.add_parser('compare', parents=[common, multi], help='rank policies by best-over-sweep response time')
    cmp_.add_argument('--n-tcp', type=int, nargs='+')
    cmp_.add_argument('--n-dch', type=int, nargs='+')
    cmp_.add_argument('--summary-out', help='best-policy-per-cell table path')

    calc = sub.add_parser('calc', help='closed-form burst transfer times')
    calc.add_argument('n_packets', type=int)
    calc.add_argument('packet_bytes', type=float)
    calc.add_argument('--out', help='CSV output path (default: stdout)')

    serve = sub.add_parser('serve', help='run the results API')
    serve.add_argument('--host')
    serve.add_argument('--port', type=int)
    serve.add_argument('--store', metavar='DATABASE_URL')
    return parser


def _scenario(args, **extra):
    overrides = dict(args.overrides)
    for name in ('seed', 'duration', 'policy', 'scheduler'):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    overrides.update({k: v for k, v in extra.items() if v is not None})
    return load_scenario(args.config, overrides)


def _emit(frame, path):
    if path:
        write_table(frame, path)
        logger.info(f"Wrote {len(frame)} row(s) to {path}")
    else:
        write_table(frame, sys.stdout)


def _store(args, summaries, label):
    if args.store:
        from services.results_service import store_summaries
        store_summaries(args.store, summaries, label=label)


def _frame_summaries(frame):
    return [RunSummary.from_row(row) for row in frame[list(CSV_COLUMNS)].to_dict(orient='records')]


def _seeds(args, base):
    return args.seeds or [base.seed]


def _policies(args, base, default):
    if args.policies:
        return args.policies
    if args.policy:
        return [args.policy]
    return default


def cmd_run(args):
    config = _scenario(args, n_tcp=args.n_tcp, n_dch=args.n_dch)
    def inject(sim):
        for conn, packets, at in args.inject:
            sim.inject_burst(conn, packets, at)

    summary, digest = run_simulation(config, trace_path=args.trace, audit=args.audit, setup=inject)
    if digest:
        logger.info(f"Trace digest sha256={digest}")
    _emit(summaries_frame([summary]), args.out)
    _store(args, [summary], config.label())


def cmd_sweep(args):
    base = _scenario(args, n_tcp=args.n_tcp, n_dch=args.n_dch)
    spec = SweepSpec(
        args.parameter,
        args.values or list(DEFAULT_SWEEP_VALUES),
        _policies(args, base, ALL_POLICIES),
        _seeds(args, base),
    )
    frame, aggregates = sweep(spec, base, workers=args.workers)
    _emit(frame[list(CSV_COLUMNS)], args.out)
    summary_out = args.summary_out or (f"{args.out}.summary.csv" if args.out else None)
    if summary_out:
        _emit(aggregates, summary_out)
    else:
        sys.stdout.write('\n')
        write_table(aggregates, sys.stdout)
    _store(args, _frame_summaries(frame), f"sweep {spec.parameter or 'auto'}")


def cmd_compare(args):
    base = _scenario(args)
    policies = _policies(args, base, ALL_POLICIES)
    seeds = _seeds(args, base)
    values = args.values or list(DEFAULT_SWEEP_VALUES)
    n_tcp_values = args.n_tcp or [base.n_tcp]
    n_dch_values = args.n_dch or [base.n_dch]
    if len(n_tcp_values) == 1 and len(n_dch_values) == 1:
        base = base.with_overrides(n_tcp=n_tcp_values[0], n_dch=n_dch_values[0]).validate()
        frame, ranking = compare(policies, base, seeds, values, workers=args.workers)
        _emit(ranking, args.out)
        _store(args, _frame_summaries(frame), "compare")
        return
    rankings, best = compare_matrix(policies, base, seeds, values, n_tcp_values, n_dch_values,
                                    workers=args.workers)
    _emit(rankings, args.out)
    if args.summary_out:
        _emit(best, args.summary_out)
    else:
        sys.stdout.write('\n')
        write_table(best, sys.stdout)


def cmd_calc(args):
    _emit(calc_table(args.n_packets, args.packet_bytes), args.out)


def cmd_serve(args):
    from server import serve
    serve(host=args.host, port=args.port, database_url=args.store)


COMMANDS = {
    'run': cmd_run,
    'sweep': cmd_sweep,
    'compare': cmd_compare,
    'calc': cmd_calc,
    'serve': cmd_serve,
}


def main(argv=None):
    """Exit 0 ok, 1 validation error, 2 runtime failure"""
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
        return 0
    except Exception as e:
        code = exit_code_for(e)
        if code == 1:
            logger.error(f"Invalid input: {e}")
        else:
            logger.log_error_with_context(e, {'argv': argv if argv is not None else sys.argv[1:]})
        sys.stderr.write(f"error: {e}\n")
        return code


if __name__ == '__main__':
    sys.exit(main())
