import io
from pathlib import Path

from latency.csvio import format_real, read_trace_csv, write_table
from latency.exceptions import ParameterError
from latency.models import RunKind
from latency.services import analyze_recording

from ._base import ToolCommand

EVENTS_HEADER = ['event', 'tag_sample', 'photo_sample', 'latency_ms']


class Command(ToolCommand):
    help = "Estimate the tag-to-photodiode latency of a recorded trace CSV (sample,tag,photo)."
    kind = RunKind.ANALYZE

    def add_command_arguments(self, parser):
        parser.add_argument('trace', help='trace CSV with header sample,tag,photo')
        parser.add_argument('--fs', type=float, metavar='HZ', help='sample rate of the trace')
        parser.add_argument('--threshold', type=float, metavar='F',
                            help='onset threshold as a fraction of the signal range')
        parser.add_argument('--hysteresis', type=float, metavar='F',
                            help='re-arm margin below the threshold, fraction of the range')
        parser.add_argument('--window-ms', type=float, metavar='W', help='drift-removal window')
        parser.add_argument('--max-latency-ms', type=float, metavar='M',
                            help='longest tag-to-photodiode delay that still pairs')
        parser.add_argument('--min-separation-ms', type=float, metavar='S',
                            help='onsets closer than this to the previous one are ignored')
        parser.add_argument('--multipass-threshold-ms', type=float, metavar='T',
                            help='cluster separation above which latencies count as bimodal')
        parser.add_argument('--events-out', metavar='PATH', help='write per-event latencies here')

    def run(self, run_config, run, **options):
        fs = options['fs'] or run_config.analysis.get('sample_rate_hz')
        if fs is None:
            raise ParameterError("analyze needs --fs HZ (or analysis.sample_rate_hz in the config)")
        if not fs > 0:
            raise ParameterError(f"--fs must be > 0, got {fs}")

        with self.read_input(options['trace'], 'trace') as stream:
            recording = read_trace_csv(stream, fs)
        analysis, params, threshold = analyze_recording(
            recording, run_config, options['multipass_threshold_ms'],
            threshold_fraction=options['threshold'],
            hysteresis_fraction=options['hysteresis'],
            window_ms=options['window_ms'],
            max_latency_ms=options['max_latency_ms'],
            min_separation_ms=options['min_separation_ms'],
        )
        estimate, pairing = analysis.estimate, analysis.pairing
        run.measurement(options['trace'], fs, analysis)
        run.summary = {
            'mean_ms': estimate.mean_ms,
            'sd_ms': estimate.sd_ms,
            'n_events': estimate.n_events,
            'bimodal': analysis.split.bimodal,
            'parameters': params,
        }

        if options['events_out']:
            buffer = io.StringIO()
            rows = [
                [str(k), str(t), str(p), format_real(latency)]
                for k, ((t, p), latency) in enumerate(zip(pairing.pairs, estimate.per_event_ms))
            ]
            write_table(EVENTS_HEADER, rows, buffer)
            self.emit(buffer.getvalue(), options['events_out'])

        lines = [
            f"trace: {Path(options['trace']).name}",
            f"sample_rate_hz: {fs:g}",
            f"events: {estimate.n_events}",
            f"mean_ms: {estimate.mean_ms:.3f}",
            f"sd_ms: {estimate.sd_ms:.3f}",
            f"unpaired_tags: {len(pairing.unpaired_tags)}",
            f"unpaired_photos: {len(pairing.unpaired_photos)}",
            f"bimodal: {'yes' if analysis.split.bimodal else 'no'} "
            f"(clusters {analysis.split.low_mean_ms:.3f} / {analysis.split.high_mean_ms:.3f} ms, "
            f"threshold {threshold:g} ms)",
        ]
        if analysis.lofap_ms is not None:
            lines.append(f"lofap_ms: {analysis.lofap_ms:.3f}")
        lines.extend(f"warning: {note}" for note in analysis.warnings)
        return "\n".join(lines) + "\n"
