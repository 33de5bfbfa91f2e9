from latency.models import RunKind
from latency.report import build_report, render_html, render_markdown

from ._base import ToolCommand


class Command(ToolCommand):
    help = "Check a screen/matrix/pipeline configuration against the tagging guidelines."
    kind = RunKind.REPORT
    config_required = True

    def add_command_arguments(self, parser):
        parser.add_argument('--format', choices=['markdown', 'html'], default='markdown')
        parser.add_argument('--workers', type=int, default=None, metavar='N',
                            help='threads for the barycentre Monte Carlo')

    def run(self, run_config, run, **options):
        run_config.require('screen', 'matrix', 'pipeline')
        mc_config = run_config.mc_config(seed=options['seed'])
        workers = options['workers'] or (run_config.mc.workers if run_config.mc else 1)
        report = build_report(run_config, mc_config, workers=workers)
        run.summary = {
            'uncertainty_bound_ms': report.uncertainty_bound_ms,
            'nominal_bound_ms': report.nominal_bound_ms,
            'warnings': [check.key for check in report.warnings],
        }
        text = render_markdown(report, run_config)
        if options['format'] == 'html':
            return render_html(text)
        return text + "\n"
