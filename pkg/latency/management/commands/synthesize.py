import io

import numpy as np

from latency.csvio import format_real, write_table, write_trace_csv
from latency.exceptions import ParameterError
from latency.models import RunKind
from latency.trace_analysis import DEFAULT_PULSE_WIDTH_MS, synthesize_trace

from ._base import ToolCommand


class Command(ToolCommand):
    help = ("Write a synthetic trace CSV with known tag-to-photodiode latencies, "
            "for checking the analysis end to end.")
    kind = RunKind.SYNTHESIZE

    def add_command_arguments(self, parser):
        parser.add_argument('--fs', type=float, default=1000.0, metavar='HZ')
        parser.add_argument('--events', type=int, default=100, metavar='N')
        parser.add_argument('--first-ms', type=float, default=500.0, metavar='MS',
                            help='time of the first tag')
        parser.add_argument('--interval-ms', type=float, default=1000.0, metavar='MS',
                            help='time between two tags')
        parser.add_argument('--latency-mean-ms', type=float, default=38.0, metavar='MS')
        parser.add_argument('--latency-sd-ms', type=float, default=5.3, metavar='MS')
        parser.add_argument('--second-mean-ms', type=float, metavar='MS',
                            help='mean of a second latency mode (multi-pass rendering)')
        parser.add_argument('--second-sd-ms', type=float, metavar='MS',
                            help='SD of the second mode, default --latency-sd-ms')
        parser.add_argument('--second-fraction', type=float, default=0.5, metavar='F',
                            help='share of events drawn from the second mode')
        parser.add_argument('--noise-sd', type=float, default=0.0)
        parser.add_argument('--drift', type=float, default=0.0, help='drift amplitude')
        parser.add_argument('--drift-period-ms', type=float, default=10000.0, metavar='MS')
        parser.add_argument('--pulse-width-ms', type=float, default=DEFAULT_PULSE_WIDTH_MS, metavar='MS')
        parser.add_argument('--latencies-out', metavar='PATH',
                            help='write the injected per-event latencies here')

    def run(self, run_config, run, **options):
        if options['events'] < 1:
            raise ParameterError("--events must be >= 1")
        if not options['interval_ms'] > 0:
            raise ParameterError("--interval-ms must be > 0")
        if not 0.0 <= options['second_fraction'] <= 1.0:
            raise ParameterError("--second-fraction must be in [0, 1]")
        if not options['fs'] > 0:
            raise ParameterError(f"--fs must be > 0, got {options['fs']:g}")
        for name in ('latency_sd_ms', 'second_sd_ms', 'noise_sd'):
            if options[name] is not None and not options[name] >= 0:
                raise ParameterError(f"--{name.replace('_', '-')} must be >= 0")
        seed = options['seed'] if options['seed'] is not None else 0
        times = options['first_ms'] + options['interval_ms'] * np.arange(options['events'])

        latencies = None
        if options['second_mean_ms'] is not None:
            rng = np.random.default_rng([seed, 1])
            second_sd = options['second_sd_ms']
            if second_sd is None:
                second_sd = options['latency_sd_ms']
            second = rng.random(options['events']) < options['second_fraction']
            latencies = np.where(
                second,
                rng.normal(options['second_mean_ms'], second_sd, options['events']),
                rng.normal(options['latency_mean_ms'], options['latency_sd_ms'], options['events']),
            )

        recording = synthesize_trace(
            times.tolist(), options['latency_mean_ms'], options['latency_sd_ms'], options['fs'],
            noise_sd=options['noise_sd'], drift_amplitude=options['drift'], seed=seed,
            pulse_width_ms=options['pulse_width_ms'], drift_period_ms=options['drift_period_ms'],
            latencies_ms=latencies,
        )
        injected = np.asarray(recording.injected_latencies_ms)
        run.summary = {
            'samples': recording.n_samples,
            'events': int(injected.size),
            'injected_mean_ms': float(injected.mean()),
        }

        if options['latencies_out']:
            buffer = io.StringIO()
            write_table(['event', 'latency_ms'],
                        [[str(k), format_real(v)] for k, v in enumerate(injected.tolist())], buffer)
            self.emit(buffer.getvalue(), options['latencies_out'])

        buffer = io.StringIO()
        write_trace_csv(recording, buffer)
        return buffer.getvalue()
