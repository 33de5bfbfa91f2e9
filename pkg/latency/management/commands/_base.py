import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from latency.exceptions import DataFormatError, LatencyToolkitError, ParameterError
from latency.runconfig import RunConfig, load_run_config
from latency.services import record_run

logger = logging.getLogger(__name__)

DJANGO_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks',
}


class ToolCommand(BaseCommand):
    """Base for the toolkit commands.

    Adds the global flags, turns toolkit errors into CommandError with the
    matching exit code and records every invocation in the run ledger.
    Subclasses implement `run(run_config, **options)` and return the text to
    emit.
    """
    requires_system_checks = []
    kind = None
    config_required = False

    def add_arguments(self, parser):
        parser.add_argument('--config', metavar='PATH', help='run configuration file')
        parser.add_argument('--seed', type=int, metavar='N', help='random seed (unsigned 64-bit)')
        parser.add_argument('--out', metavar='PATH', help='write output here instead of stdout')
        parser.add_argument('--no-record', action='store_true',
                            help='do not record this run in the database')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        parameters = {
            k: v for k, v in options.items()
            if k not in DJANGO_OPTIONS and isinstance(v, (str, int, float, bool, type(None)))
        }
        enabled = settings.RECORD_RUNS and not options['no_record']
        try:
            if options['seed'] is not None and not 0 <= options['seed'] < 2 ** 64:
                raise ParameterError(f"--seed must be a 64-bit unsigned integer, got {options['seed']}")
            run_config = self.load_config(options['config'])
            with record_run(self.kind, parameters, options['config'], options['seed'], enabled) as run:
                text = self.run(run_config, run=run, **options)
                self.emit(text, options['out'])
        except LatencyToolkitError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code)
        except UnicodeDecodeError as exc:
            raise CommandError(f"input is not valid UTF-8: {exc.reason}", returncode=DataFormatError.exit_code)

    def load_config(self, path):
        if path is None:
            if self.config_required:
                raise ParameterError(f"{self.kind} needs --config PATH")
            return RunConfig()
        return load_run_config(path)

    def read_input(self, path, what):
        try:
            return open(path, encoding='utf-8', newline='')
        except OSError as exc:
            raise ParameterError(f"cannot read {what} {path}: {exc.strerror or exc}")

    def emit(self, text, out=None):
        if out is None:
            self.stdout.write(text, ending='')
            return
        try:
            Path(out).write_text(text, encoding='utf-8', newline='')
        except OSError as exc:
            raise ParameterError(f"cannot write {out}: {exc.strerror or exc}")
        logger.info("[Run] wrote %s", out)

    def run(self, run_config, **options):
        raise NotImplementedError
