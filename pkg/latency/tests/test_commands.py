import csv
import io
import tempfile
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from latency.models import LatencyMeasurement, RunKind, RunStatus, ToolRun

from .factories import CONFIG_60HZ, CONFIG_140HZ


class CommandTestCase(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def write(self, name, text):
        path = self.dir / name
        path.write_text(text, encoding='utf-8')
        return str(path)

    def call(self, *args):
        out = io.StringIO()
        call_command(*args, stdout=out)
        return out.getvalue()

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return str(ctx.exception)


class ModelCommandTests(CommandTestCase):
    def rows(self, config_text):
        output = self.call('model', '--config', self.write('run.cfg', config_text))
        return list(csv.DictReader(io.StringIO(output)))

    def test_every_cell_then_the_barycentre(self):
        rows = self.rows(CONFIG_60HZ)
        self.assertEqual(len(rows), 37)
        self.assertEqual(list(rows[0]), ['i', 'j', 'h', 'pscr_ms', 'total_ms'])
        self.assertEqual((rows[-1]['i'], rows[-1]['j']), ('2.5', '2.5'))

    def test_rows_share_latency_on_a_normal_screen(self):
        rows = self.rows(CONFIG_60HZ)[:-1]
        for i in range(6):
            self.assertEqual(len({r['total_ms'] for r in rows if r['i'] == str(i)}), 1)
        self.assertEqual(len({r['total_ms'] for r in rows}), 6)

    def test_columns_share_latency_on_a_turned_screen(self):
        rows = self.rows(CONFIG_60HZ + "screen.orientation = turned_90\n")[:-1]
        for j in range(6):
            self.assertEqual(len({r['total_ms'] for r in rows if r['j'] == str(j)}), 1)

    def test_single_cell(self):
        text = CONFIG_60HZ.replace("matrix.rows = 6", "matrix.rows = 1").replace(
            "matrix.cols = 6", "matrix.cols = 1").replace("mc.n_stimuli = 12\n", "")
        rows = self.rows(text)
        self.assertEqual(len(rows), 2)
        # h = 100 / 1080 of a 16 ms scan, plus b
        self.assertAlmostEqual(float(rows[0]['total_ms']), 16.0 * 100.0 / 1080 + 6.0)

    def test_config_errors_exit_2_with_the_line(self):
        path = self.write('bad.cfg', CONFIG_60HZ.replace("matrix.rows = 6", "matrix.rows = six"))
        message = self.assertExitCode(2, 'model', '--config', path)
        self.assertIn("line 8", message)

    def test_config_is_required(self):
        self.assertExitCode(2, 'model')

    def test_missing_config_file(self):
        self.assertExitCode(2, 'model', '--config', str(self.dir / 'nope.cfg'))

    def test_output_file(self):
        out = self.dir / 'table.csv'
        stdout = self.call('model', '--config', self.write('run.cfg', CONFIG_60HZ), '--out', str(out))
        self.assertEqual(stdout, '')
        self.assertTrue(out.read_text(encoding='utf-8').startswith('i,j,h,pscr_ms,total_ms\n'))


class MonteCarloCommandTests(CommandTestCase):
    def test_curve_output(self):
        path = self.write('run.cfg', CONFIG_60HZ)
        output = self.call('montecarlo', '--config', path, '--n-values', '1,12,36')
        rows = list(csv.DictReader(io.StringIO(output)))
        self.assertEqual(list(rows[0]), ['n', 'mean_row', 'sd_row', 'mean_col', 'sd_col', 'mean_ms', 'sd_ms'])
        self.assertEqual([r['n'] for r in rows], ['1', '12', '36'])
        self.assertAlmostEqual(float(rows[1]['mean_row']), 0.39, delta=0.03)

    def test_identical_runs_and_worker_counts(self):
        path = self.write('run.cfg', CONFIG_60HZ)
        first = self.call('montecarlo', '--config', path, '--seed', '99', '--metadata')
        second = self.call('montecarlo', '--config', path, '--seed', '99', '--metadata')
        parallel = self.call('montecarlo', '--config', path, '--seed', '99', '--metadata',
                             '--workers', '4')
        self.assertEqual(first, second)
        self.assertEqual(first, parallel)
        self.assertTrue(first.startswith('# rng='))

    def test_signed_statistics(self):
        path = self.write('run.cfg', CONFIG_60HZ + "mc.photodiode_i = 0\n")
        rows = list(csv.DictReader(io.StringIO(self.call('montecarlo', '--config', path, '--signed'))))
        self.assertAlmostEqual(float(rows[0]['mean_row']), 2.5, delta=0.1)

    def test_exhaustive_sweep(self):
        path = self.write('run.cfg', CONFIG_60HZ + "mc.sampler = without_replacement\n")
        rows = list(csv.DictReader(io.StringIO(self.call('montecarlo', '--config', path,
                                                         '--n-values', '36'))))
        self.assertEqual(float(rows[0]['sd_row']), 0.0)

    def test_bad_counts(self):
        path = self.write('run.cfg', CONFIG_60HZ)
        self.assertExitCode(2, 'montecarlo', '--config', path, '--n-values', '3,x')

    def test_run_is_recorded(self):
        self.call('montecarlo', '--config', self.write('run.cfg', CONFIG_60HZ))
        run = ToolRun.objects.get()
        self.assertEqual(run.kind, RunKind.MONTECARLO)
        self.assertEqual(run.status, RunStatus.COMPLETED)
        self.assertEqual(run.summary['points'][0]['n_stimuli'], 12)
        self.assertIsNotNone(run.completed_at)

    def test_no_record(self):
        self.call('montecarlo', '--config', self.write('run.cfg', CONFIG_60HZ), '--no-record')
        self.assertFalse(ToolRun.objects.exists())

    @override_settings(RECORD_RUNS=False)
    def test_recording_disabled_in_settings(self):
        self.call('montecarlo', '--config', self.write('run.cfg', CONFIG_60HZ))
        self.assertFalse(ToolRun.objects.exists())


class SynthesizeAnalyzeTests(CommandTestCase):
    def synthesize(self, *args):
        path = self.write('trace.csv', self.call('synthesize', '--seed', '3', *args))
        return path

    def test_closed_loop(self):
        trace = self.synthesize('--latency-mean-ms', '38', '--latency-sd-ms', '5.3')
        output = self.call('analyze', trace, '--fs', '1000')
        values = dict(line.split(': ', 1) for line in output.splitlines() if ': ' in line)
        self.assertEqual(values['events'], '100')
        self.assertAlmostEqual(float(values['mean_ms']), 38.0, delta=1.5)
        self.assertAlmostEqual(float(values['sd_ms']), 5.3, delta=1.5)
        self.assertTrue(values['bimodal'].startswith('no'))

    def test_measurement_is_recorded(self):
        trace = self.synthesize('--events', '20')
        self.call('analyze', trace, '--fs', '1000')
        measurement = LatencyMeasurement.objects.get()
        self.assertEqual(measurement.n_events, 20)
        self.assertEqual(len(measurement.per_event_ms), 20)
        self.assertEqual(measurement.run.kind, RunKind.ANALYZE)

    def test_two_latency_modes_are_flagged(self):
        trace = self.synthesize('--latency-mean-ms', '117', '--latency-sd-ms', '2',
                                '--second-mean-ms', '143')
        output = self.call('analyze', trace, '--fs', '1000', '--multipass-threshold-ms', '20')
        self.assertIn('bimodal: yes', output)
        self.assertIn('warning: bimodal latencies', output)
        self.assertIn('lofap_ms: 11', output)

    def test_injected_latencies_and_events_out(self):
        latencies = self.dir / 'injected.csv'
        trace = self.synthesize('--events', '10', '--latencies-out', str(latencies))
        events = self.dir / 'events.csv'
        self.call('analyze', trace, '--fs', '1000', '--events-out', str(events))
        injected = list(csv.DictReader(io.StringIO(latencies.read_text(encoding='utf-8'))))
        measured = list(csv.DictReader(io.StringIO(events.read_text(encoding='utf-8'))))
        self.assertEqual(len(injected), 10)
        for a, b in zip(injected, measured):
            self.assertAlmostEqual(float(a['latency_ms']), float(b['latency_ms']), delta=1.0)

    def test_invalid_synthesis_flags_exit_2(self):
        for flags in (('--latency-sd-ms', '-1'), ('--fs', '-1000'), ('--noise-sd', '-0.5'),
                      ('--second-mean-ms', '60', '--second-sd-ms', '-2')):
            with self.subTest(flags=flags):
                self.assertExitCode(2, 'synthesize', *flags)

    def test_synthesis_is_deterministic(self):
        args = ('synthesize', '--seed', '5', '--events', '5', '--noise-sd', '0.05', '--drift', '0.5')
        self.assertEqual(self.call(*args), self.call(*args))

    def test_sample_rate_from_config(self):
        trace = self.synthesize('--events', '5')
        config = self.write('analysis.cfg', "analysis.sample_rate_hz = 1000\n")
        self.assertIn('events: 5', self.call('analyze', trace, '--config', config))

    def test_sample_rate_is_required(self):
        self.assertExitCode(2, 'analyze', self.synthesize('--events', '5'))

    def test_malformed_trace_exits_3_with_the_row(self):
        trace = self.write('bad.csv', "sample,tag,photo\n0,0,0\n1,zero,0\n")
        message = self.assertExitCode(3, 'analyze', trace, '--fs', '1000')
        self.assertIn('row 3', message)

    def test_wrong_header(self):
        trace = self.write('bad.csv', "t,tag,photo\n0,0,0\n")
        self.assertExitCode(3, 'analyze', trace, '--fs', '1000')

    def test_trace_without_events_exits_4(self):
        rows = ''.join(f"{k},0.0,0.0\n" for k in range(2000))
        trace = self.write('flat.csv', "sample,tag,photo\n" + rows)
        self.assertExitCode(4, 'analyze', trace, '--fs', '1000')
        run = ToolRun.objects.get()
        self.assertEqual(run.status, RunStatus.FAILED)
        self.assertEqual(run.exit_code, 4)


class CorrectCommandTests(CommandTestCase):
    def test_shift_epochs(self):
        epochs = self.write('epochs.csv', "epoch,sample,value\n0,0,0\n0,1,0\n0,2,1\n0,3,2\n0,4,3\n")
        output = self.call('correct', epochs, '--offset-ms', '2', '--fs', '1000')
        self.assertEqual(output, "epoch,sample,value\n0,0,1.0\n0,1,2.0\n0,2,3.0\n0,3,0.0\n0,4,0.0\n")

    def test_offset_longer_than_epoch(self):
        epochs = self.write('epochs.csv', "epoch,sample,value\n0,0,0\n0,1,1\n")
        self.assertExitCode(2, 'correct', epochs, '--offset-ms', '5', '--fs', '1000')

    def test_out_of_sequence_epoch_rows(self):
        epochs = self.write('epochs.csv', "epoch,sample,value\n0,0,0\n0,2,1\n")
        self.assertIn('row 3', self.assertExitCode(3, 'correct', epochs, '--offset-ms', '0',
                                                   '--fs', '1000'))


class ReportCommandTests(CommandTestCase):
    def test_markdown_report(self):
        output = self.call('report', '--config', self.write('run.cfg', CONFIG_60HZ))
        self.assertIn('**44.0 ms**', output)
        self.assertIn('**40.0 ms**', output)
        self.assertEqual(output, self.call('report', '--config', self.write('run.cfg', CONFIG_60HZ)))

    def test_faster_screen(self):
        output = self.call('report', '--config', self.write('fast.cfg', CONFIG_140HZ))
        self.assertIn('2 x (a + b): **26.0 ms**', output)

    def test_html_report(self):
        output = self.call('report', '--config', self.write('run.cfg', CONFIG_60HZ), '--format', 'html')
        self.assertTrue(output.startswith('<h1>'))
        self.assertIn('<div class="tip">', output)

    def test_report_needs_a_pipeline(self):
        text = CONFIG_60HZ.replace("pipeline.variant = A\n", "").replace("pipeline.fps = 60\n", "")
        self.assertIn('[pipeline]', self.assertExitCode(2, 'report', '--config', self.write('run.cfg', text)))
