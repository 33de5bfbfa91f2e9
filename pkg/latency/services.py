import logging
from contextlib import contextmanager

from django.conf import settings
from django.utils import timezone

from .display_model import barycentre, height, position, position_at
from .models import LatencyMeasurement, RunStatus, ToolRun
from .pipeline_model import barycentre_latency, pipeline_latency
from .trace_analysis import DEFAULT_MULTIPASS_THRESHOLD_MS, analyze_trace

logger = logging.getLogger(__name__)

TRACE_SETTING_NAMES = {
    'threshold_fraction': 'TRACE_THRESHOLD_FRACTION',
    'hysteresis_fraction': 'TRACE_HYSTERESIS_FRACTION',
    'window_ms': 'TRACE_DRIFT_WINDOW_MS',
    'max_latency_ms': 'TRACE_MAX_LATENCY_MS',
    'min_separation_ms': 'TRACE_MIN_SEPARATION_MS',
}
MC_SETTING_NAMES = {
    'n_trials': 'MC_DEFAULT_TRIALS',
    'block_trials': 'MC_BLOCK_TRIALS',
}


def _preferences(section, names):
    """Read a preference section, falling back to settings when it is unavailable."""
    values = {key: getattr(settings, setting) for key, setting in names.items()}
    try:
        from dynamic_preferences.registries import global_preferences_registry
        global_prefs = global_preferences_registry.manager()
        for key in names:
            value = global_prefs.get(f'{section}__{key}')
            if value is not None:
                values[key] = value
    except Exception as e:
        logger.info("[Config] Could not load %s preferences: %s, using settings", section, e)
    return values


def get_analysis_settings(config_overrides=None, **flags):
    """Trace-analysis parameters: flags > config `analysis.` > preferences > settings."""
    values = _preferences('trace_analysis', TRACE_SETTING_NAMES)
    values.update({k: v for k, v in (config_overrides or {}).items() if k in values})
    values.update({k: v for k, v in flags.items() if v is not None and k in values})
    logger.debug("[Config] trace analysis settings %s", values)
    return values


def get_montecarlo_settings():
    return _preferences('montecarlo', MC_SETTING_NAMES)


def multipass_threshold(run_config=None, flag=None):
    """Flag > config `report.` > MULTIPASS_THRESHOLD_MS > the screen's scan time > fallback."""
    if flag is not None:
        return flag
    if run_config is not None and run_config.threshold_ms() is not None:
        return run_config.threshold_ms()
    if settings.MULTIPASS_THRESHOLD_MS is not None:
        return settings.MULTIPASS_THRESHOLD_MS
    if run_config is not None and run_config.screen is not None:
        return run_config.screen.scan_time_a_ms
    return DEFAULT_MULTIPASS_THRESHOLD_MS


def latency_table(run_config):
    """Rows `i, j, h, pscr_ms, total_ms` for every cell, then the matrix barycentre."""
    run_config.require('screen', 'matrix', 'pipeline')
    screen, matrix, pipeline = run_config.screen, run_config.matrix, run_config.pipeline
    rows = []
    for idx in matrix.cells():
        h = height(*position(matrix, screen, idx), screen)
        breakdown = pipeline_latency(pipeline, screen, matrix, idx)
        rows.append((idx.i, idx.j, h, breakdown.pscr_ms, breakdown.total_ms))
    bary = barycentre(matrix.cells())
    h = height(*position_at(matrix, screen, bary.i_bar, bary.j_bar), screen)
    breakdown = barycentre_latency(pipeline, screen, matrix, bary)
    rows.append((bary.i_bar, bary.j_bar, h, breakdown.pscr_ms, breakdown.total_ms))
    for flag in breakdown.flags:
        logger.warning("[Run] %s", flag.label)
    return rows


def analyze_recording(recording, run_config=None, threshold_ms=None, **flags):
    params = get_analysis_settings(run_config.analysis if run_config else None, **flags)
    threshold = multipass_threshold(run_config, threshold_ms)
    return analyze_trace(recording, multipass_threshold_ms=threshold, **params), params, threshold


class RunHandle:
    """The ledger row of the running command; a no-op when recording is off."""

    def __init__(self, run=None):
        self.run = run
        self.summary = {}

    def measurement(self, source, sample_rate_hz, analysis):
        if self.run is None:
            return
        try:
            estimate, pairing = analysis.estimate, analysis.pairing
            LatencyMeasurement.objects.create(
                run=self.run,
                source=source,
                sample_rate_hz=sample_rate_hz,
                mean_ms=estimate.mean_ms,
                sd_ms=estimate.sd_ms,
                n_events=estimate.n_events,
                unpaired_tags=len(pairing.unpaired_tags),
                unpaired_photos=len(pairing.unpaired_photos),
                bimodal=analysis.split.bimodal,
                lofap_ms=analysis.lofap_ms,
                per_event_ms=list(estimate.per_event_ms),
            )
        except Exception as e:
            logger.warning("[Run] Could not record measurement: %s", e)


def _open_run(kind, parameters, config_path, seed):
    try:
        return ToolRun.objects.create(
            kind=kind,
            status=RunStatus.PROCESSING,
            config_path=config_path or '',
            seed=seed,
            parameters=parameters,
        )
    except Exception as e:
        logger.warning("[Run] Could not record %s run: %s", kind, e)
        return None


def _close_run(run, status, summary=None, error='', exit_code=0):
    try:
        run.status = status
        run.summary = summary or {}
        run.error_message = error
        run.exit_code = exit_code
        run.completed_at = timezone.now()
        run.save()
    except Exception as e:
        logger.warning("[Run] Could not update run %s: %s", run.pk, e)


@contextmanager
def record_run(kind, parameters, config_path=None, seed=None, enabled=True):
    """Record a command in the ToolRun ledger.

    Recording problems are logged and never reach the caller; errors raised
    by the command itself mark the run failed and propagate.
    """
    run = _open_run(kind, parameters, config_path, seed) if enabled else None
    handle = RunHandle(run)
    try:
        yield handle
    except Exception as e:
        if run is not None:
            _close_run(run, RunStatus.FAILED, handle.summary, str(e), getattr(e, 'exit_code', 1))
        raise
    if run is not None:
        _close_run(run, RunStatus.COMPLETED, handle.summary)
        logger.info("[Run] %s run %s completed", kind, run.pk)
