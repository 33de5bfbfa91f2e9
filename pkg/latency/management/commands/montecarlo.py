import io

from latency.barycentre_mc import dist_curve, scan_axis_distance
from latency.csvio import format_real, write_table
from latency.exceptions import ParameterError
from latency.models import RunKind

from ._base import ToolCommand

HEADER = ['n', 'mean_row', 'sd_row', 'mean_col', 'sd_col', 'mean_ms', 'sd_ms']


def _counts(text):
    try:
        values = [int(part) for part in text.split(',')]
    except ValueError:
        raise ParameterError(f"--n-values must be a comma-separated list of integers, got '{text}'")
    if any(v < 1 for v in values):
        raise ParameterError("--n-values counts must be >= 1")
    return values


class Command(ToolCommand):
    help = ("Monte Carlo distance between the barycentre of the displayed stimuli and the "
            "photodiode, for one or several stimulus counts, as CSV.")
    kind = RunKind.MONTECARLO
    config_required = True

    def add_command_arguments(self, parser):
        parser.add_argument('--n-values', metavar='N,N,...', help='stimulus counts to sweep')
        parser.add_argument('--trials', type=int, metavar='N', help='trials per stimulus count')
        parser.add_argument('--block-trials', type=int, metavar='N', help='trials per RNG block')
        parser.add_argument('--workers', type=int, metavar='N', help='threads drawing blocks')
        parser.add_argument('--signed', action='store_true',
                            help='report signed barycentre - photodiode statistics')
        parser.add_argument('--metadata', action='store_true',
                            help='prefix the CSV with # comment lines describing the run')

    def run(self, run_config, run, **options):
        run_config.require('screen', 'matrix')
        for name in ('trials', 'block_trials', 'workers'):
            if options[name] is not None and options[name] < 1:
                raise ParameterError(f"--{name.replace('_', '-')} must be >= 1")
        config = run_config.mc_config(
            seed=options['seed'], n_trials=options['trials'], block_trials=options['block_trials'],
        )
        mc = run_config.mc
        workers = options['workers'] or (mc.workers if mc else 1)
        if options['n_values']:
            n_values = _counts(options['n_values'])
        elif mc and mc.n_values:
            n_values = list(mc.n_values)
        else:
            n_values = [config.n_stimuli]

        points = dist_curve(config, n_values, workers=workers, signed=options['signed'])
        rows = []
        for point in points:
            result = point.result
            if options['signed']:
                row_stats = result.mean_row_signed, result.sd_row_signed
                col_stats = result.mean_col_signed, result.sd_col_signed
            else:
                row_stats = result.mean_row_dist, result.sd_row_dist
                col_stats = result.mean_col_dist, result.sd_col_dist
            rows.append([
                str(point.n), *map(format_real, row_stats), *map(format_real, col_stats),
                format_real(result.mean_latency_ms), format_real(result.sd_latency_ms),
            ])
        run.summary = {'points': [p.result.as_summary() for p in points]}

        buffer = io.StringIO()
        if options['metadata']:
            photo = config.photodiode
            mean, sd = scan_axis_distance(points[-1].result, config.screen, options['signed'])
            buffer.write(f"# rng={points[-1].result.rng_algorithm} seed={config.seed} "
                         f"block_trials={config.block_trials} trials={config.n_trials}\n")
            buffer.write(f"# sampler={config.sampler} photodiode=({photo.i_bar!r},{photo.j_bar!r}) "
                         f"orientation={config.screen.orientation}\n")
            buffer.write(f"# scan_axis n={points[-1].n} mean={mean!r} sd={sd!r}\n")
        write_table(HEADER, rows, buffer)
        return buffer.getvalue()
