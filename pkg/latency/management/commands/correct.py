import io

from latency.csvio import read_epochs_csv, write_epochs_csv
from latency.epoch_tools import correct_offset
from latency.models import RunKind

from ._base import ToolCommand


class Command(ToolCommand):
    help = ("Shift every epoch of an epochs CSV (epoch,sample,value) earlier by a measured "
            "latency, zero-filling the end.")
    kind = RunKind.CORRECT

    def add_command_arguments(self, parser):
        parser.add_argument('epochs', help='epochs CSV with header epoch,sample,value')
        parser.add_argument('--offset-ms', type=float, required=True, metavar='MS',
                            help='latency to remove; negative values shift later')
        parser.add_argument('--fs', type=float, required=True, metavar='HZ',
                            help='sample rate of the epochs')
        parser.add_argument('--t0-ms', type=float, default=0.0, metavar='MS',
                            help='stimulus onset inside each epoch')

    def run(self, run_config, run, **options):
        with self.read_input(options['epochs'], 'epochs') as stream:
            epochs = read_epochs_csv(stream, options['fs'], options['t0_ms'])
        corrected = correct_offset(epochs, options['offset_ms'])
        run.summary = {
            'n_epochs': corrected.n_epochs,
            'n_samples': corrected.n_samples,
            'shift_samples': corrected.shift_samples,
        }
        buffer = io.StringIO()
        write_epochs_csv(corrected, buffer)
        return buffer.getvalue()
