import io

from latency.csvio import format_real, write_table
from latency.models import RunKind
from latency.services import latency_table

from ._base import ToolCommand

HEADER = ['i', 'j', 'h', 'pscr_ms', 'total_ms']


def _cell(value):
    return str(value) if isinstance(value, int) else format_real(value)


class Command(ToolCommand):
    help = "Latency of every stimulus of the matrix, then of the matrix barycentre, as CSV."
    kind = RunKind.MODEL
    config_required = True

    def run(self, run_config, run, **options):
        rows = latency_table(run_config)
        run.summary = {
            'cells': len(rows) - 1,
            'min_total_ms': min(r[4] for r in rows[:-1]),
            'max_total_ms': max(r[4] for r in rows[:-1]),
        }
        buffer = io.StringIO()
        write_table(HEADER, [[_cell(v) for v in row] for row in rows], buffer)
        return buffer.getvalue()
