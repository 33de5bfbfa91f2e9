"""Guideline-compliance report for a display/pipeline/matrix configuration.

Mechanical checks are computed from the models; the guidelines about subjects
and perception have no model and are printed as information.
"""

import logging
from dataclasses import dataclass, field

from django.db import models
from markdown_it import MarkdownIt
from mdit_py_plugins.container import container_plugin

from .barycentre_mc import run_mc
from .display_model import GridIndex, barycentre, barycentre_offsets, max_latency_spread
from .pipeline_model import (
    PipelineVariant, TagDispatch, camera_latencies, jitter_budget, lofap_select, texture_interval_ms,
)
from .services import multipass_threshold

logger = logging.getLogger(__name__)

# The full-refresh time quoted for a 60 Hz screen; scaled by 60 / RR elsewhere.
NOMINAL_REFRESH_AT_60HZ_MS = 20.0
PUBLISHED_BAND_MS = (30.0, 40.0)
AT_LIMIT_RATIO = 0.9
PHOTODIODE_OFFSET_WARN_MS = 1.0


class CheckStatus(models.TextChoices):
    PASS = 'pass', 'Pass'
    WARN = 'warn', 'Warning'
    AT_LIMIT = 'at_limit', 'At limit'
    INFO = 'info', 'Information'


@dataclass(frozen=True)
class GuidelineCheck:
    key: str
    title: str
    status: CheckStatus
    detail: str


@dataclass(frozen=True)
class ComplianceReport:
    uncertainty_bound_ms: float
    nominal_bound_ms: float
    max_spread_ms: float
    jitter_budget_ms: float
    checks: tuple = field(default=())

    @property
    def warnings(self):
        return [c for c in self.checks if c.status in (CheckStatus.WARN, CheckStatus.AT_LIMIT)]


def nominal_full_refresh_ms(screen):
    return NOMINAL_REFRESH_AT_60HZ_MS * 60.0 / screen.refresh_rate_hz


def _uncertainty_check(screen, bound, nominal):
    low, high = PUBLISHED_BAND_MS
    if bound > high:
        place = "above"
    elif bound < low:
        place = "below"
    else:
        place = "inside"
    detail = (
        f"Comparing two averaged ERPs accumulates up to 2 x (a + b) = 2 x "
        f"({screen.scan_time_a_ms:g} + {screen.pixel_response_b_ms:g}) = {bound:.1f} ms "
        f"({place} the published {low:g}-{high:g} ms band for 60 Hz). Reading the full "
        f"refresh as {NOMINAL_REFRESH_AT_60HZ_MS:g} ms at 60 Hz gives 2 x "
        f"{nominal / 2:.1f} = {nominal:.1f} ms. The two readings differ because the quoted "
        f"refresh time does not say whether the pixel response b overlaps the scan."
    )
    return GuidelineCheck('uncertainty', 'Cumulative uncertainty bound', CheckStatus.INFO, detail)


def _spread_check(screen, spread):
    a = screen.scan_time_a_ms
    if spread >= AT_LIMIT_RATIO * a:
        status = CheckStatus.AT_LIMIT
        verdict = "the matrix spans almost the whole scan; stimuli differ by nearly a full refresh"
    else:
        status = CheckStatus.PASS
        verdict = "below the full refresh time"
    detail = f"Maximum latency spread across the matrix is {spread:.2f} ms against a = {a:g} ms: {verdict}."
    return GuidelineCheck('spread', 'Latency spread across the matrix', status, detail)


def _pipeline_check(pipeline):
    variant, dispatch = pipeline.variant, pipeline.tag_dispatch
    if variant == PipelineVariant.A and dispatch == TagDispatch.SYNCHRONOUS:
        return GuidelineCheck('pipeline', 'Tagging pipeline (guideline 1)', CheckStatus.PASS,
                              "Pipeline A with synchronous tagging: only screen rendering adds latency.")
    if variant == PipelineVariant.B and dispatch == TagDispatch.ASYNCHRONOUS:
        return GuidelineCheck('pipeline', 'Tagging pipeline (guideline 1)', CheckStatus.PASS,
                              "Pipeline B with asynchronous tagging: the tag no longer waits for "
                              "rendering, which may give lower jitter than pipeline A.")
    if variant == PipelineVariant.B:
        return GuidelineCheck('pipeline', 'Tagging pipeline (guideline 1)', CheckStatus.WARN,
                              "Pipeline B with synchronous tagging adds the software rendering time "
                              "and its blocking jitter; prefer pipeline A, or dispatch tags asynchronously.")
    return GuidelineCheck('pipeline', 'Tagging pipeline (guideline 1)', CheckStatus.INFO,
                          "Pipeline A with asynchronous tagging: the tag may leave before the texture "
                          "is submitted; synchronous tagging is preferable with pipeline A.")


def _refresh_rate_check(screen):
    rr = screen.refresh_rate_hz
    status = CheckStatus.PASS if rr >= 120 else CheckStatus.INFO
    return GuidelineCheck('refresh_rate', 'Refresh rate (guideline 2)', status,
                          f"{rr:g} Hz, refresh period {screen.refresh_period_ms:.2f} ms. "
                          f"The higher the refresh rate the smaller every bound above; "
                          f"gaming monitors reach 140 Hz or more.")


def _frame_scheduling_check(screen, render):
    notes = []
    status = CheckStatus.PASS
    if not render.vsync:
        status = CheckStatus.WARN
        notes.append("vsync is off, so two frames can share one refresh (tearing)")
    interval = texture_interval_ms(screen, render)
    if render.fps < screen.refresh_rate_hz:
        status = CheckStatus.WARN
        notes.append(
            f"{render.fps:g} FPS is below the {screen.refresh_rate_hz:g} Hz refresh rate; "
            f"textures are {interval:.1f} ms apart"
        )
    if not notes:
        notes.append(f"vsync on, one texture every {interval:.2f} ms")
    detail = "; ".join(notes) + ". Use vsync, or a variable-refresh display that follows the frame rate."
    return GuidelineCheck('frame_scheduling', 'Frame scheduling (guideline 3)', status, detail[0].upper() + detail[1:])


def _camera_check(pipeline, screen, matrix, threshold_ms):
    render = pipeline.render
    if render.n_cameras == 1:
        return GuidelineCheck('cameras', 'Multiple cameras (guideline 4)', CheckStatus.PASS,
                              "Single camera: the stimulus is drawn within one frame.")
    centre = GridIndex(matrix.rows_I // 2, matrix.cols_J // 2)
    latencies = camera_latencies(pipeline, screen, matrix, centre)
    selection = lofap_select(latencies, screen, threshold_ms)
    spread = max(latencies) - min(latencies)
    if render.single_pass:
        return GuidelineCheck('cameras', 'Multiple cameras (guideline 4)', CheckStatus.PASS,
                              f"{render.n_cameras} cameras rendered in a single pass; all appearances "
                              f"share one latency ({selection.selected_ms:.1f} ms).")
    detail = (
        f"{render.n_cameras} cameras rendered in separate passes; appearances spread over "
        f"{spread:.1f} ms. Enable single-pass rendering, otherwise use the latency of the "
        f"first appearance ({selection.selected_ms:.1f} ms)."
    )
    if selection.multipass_detected:
        detail += f" The spread exceeds the {threshold_ms:g} ms threshold: expect two latency clusters."
    return GuidelineCheck('cameras', 'Multiple cameras (guideline 4)', CheckStatus.WARN, detail)


def _barycentre_checks(mc_config, matrix, screen, workers):
    result = run_mc(mc_config, workers=workers)
    full_grid = barycentre(matrix.cells())
    photo = mc_config.photodiode
    placement = GuidelineCheck(
        'barycentre', 'Barycentre predictability (guideline 5)', CheckStatus.INFO,
        f"With {mc_config.n_stimuli} stimuli ({mc_config.sampler.label.lower()}, "
        f"{mc_config.n_trials} trials) the barycentre lies {result.mean_latency_ms:.2f} ms "
        f"(SD {result.sd_latency_ms:.2f} ms) from the photodiode along the scan. More stimuli, "
        f"uniformly spread, make the barycentre more predictable."
    )
    offset_ms = float(barycentre_offsets(
        matrix, screen, photo.i_bar, photo.j_bar, full_grid.i_bar, full_grid.j_bar
    ))
    status = CheckStatus.WARN if offset_ms > PHOTODIODE_OFFSET_WARN_MS else CheckStatus.PASS
    photodiode = GuidelineCheck(
        'photodiode', 'Photodiode location (guideline 6)', status,
        f"Photodiode at ({photo.i_bar:g}, {photo.j_bar:g}), matrix barycentre at "
        f"({full_grid.i_bar:g}, {full_grid.j_bar:g}): {offset_ms:.2f} ms apart along the scan. "
        f"Keep the same photodiode location in every condition, close to the barycentre."
    )
    return [placement, photodiode]


INFORMATIONAL = (
    GuidelineCheck('subjects', 'Subjects (guideline 7)', CheckStatus.INFO,
                   "Assess every subject under both conditions and recruit enough subjects to "
                   "average out differences in perceived frame rate. Exclude subjects with trained "
                   "vision such as pilots or competitive gamers."),
    GuidelineCheck('perception', 'Perceived frame rate', CheckStatus.INFO,
                   "Frame-rate perception varies widely between people; its effect is not modelled "
                   "here and is assumed negligible for paired designs with many subjects."),
)


def build_report(run_config, mc_config=None, workers=1):
    run_config.require('screen', 'matrix', 'pipeline')
    screen, matrix, pipeline = run_config.screen, run_config.matrix, run_config.pipeline
    threshold = multipass_threshold(run_config)

    bound = 2.0 * screen.full_refresh_ms
    nominal = 2.0 * nominal_full_refresh_ms(screen)
    spread = max_latency_spread(matrix, screen)
    budget = jitter_budget(pipeline, screen)
    logger.info("[Report] bound %.1f ms, spread %.2f ms, jitter %.2f ms", bound, spread, budget)

    checks = [
        _uncertainty_check(screen, bound, nominal),
        _spread_check(screen, spread),
        _pipeline_check(pipeline),
        _refresh_rate_check(screen),
        _frame_scheduling_check(screen, pipeline.render),
        _camera_check(pipeline, screen, matrix, threshold),
    ]
    if mc_config is not None:
        checks.extend(_barycentre_checks(mc_config, matrix, screen, workers))
    checks.append(GuidelineCheck(
        'jitter', 'Jitter budget', CheckStatus.INFO,
        f"Estimated latency SD {budget:.2f} ms (e jitter, tag phase against the refresh"
        f"{', rendering block' if pipeline.variant == PipelineVariant.B and pipeline.tag_dispatch == TagDispatch.SYNCHRONOUS else ''}). "
        f"Jitter cannot be subtracted afterwards; it flattens averaged ERPs."
    ))
    checks.extend(INFORMATIONAL)
    return ComplianceReport(bound, nominal, spread, budget, tuple(checks))


STATUS_MARK = {
    CheckStatus.PASS: 'ok',
    CheckStatus.WARN: 'WARNING',
    CheckStatus.AT_LIMIT: 'AT LIMIT',
    CheckStatus.INFO: 'info',
}


def render_markdown(report, run_config):
    screen = run_config.screen
    lines = [
        "# Tagging latency guideline report",
        "",
        f"- Screen: {screen.width_px}x{screen.height_px} px, {screen.refresh_rate_hz:g} Hz, "
        f"a = {screen.scan_time_a_ms:g} ms, b = {screen.pixel_response_b_ms:g} ms, "
        f"{screen.orientation.label.lower()}",
        f"- Uncertainty bound 2 x (a + b): **{report.uncertainty_bound_ms:.1f} ms**",
        f"- Uncertainty bound from the nominal full refresh: **{report.nominal_bound_ms:.1f} ms**",
        f"- Maximum latency spread: {report.max_spread_ms:.2f} ms",
        f"- Jitter budget: {report.jitter_budget_ms:.2f} ms",
        "",
    ]
    for check in report.checks:
        lines.append(f"## {check.title} [{STATUS_MARK[check.status]}]")
        lines.append("")
        if check.status in (CheckStatus.WARN, CheckStatus.AT_LIMIT):
            lines.extend(["::: warning", check.detail, ":::"])
        elif check.status == CheckStatus.INFO:
            lines.extend(["::: tip", check.detail, ":::"])
        else:
            lines.append(check.detail)
        lines.append("")
    return "\n".join(lines)


def render_html(markdown_text):
    md = (
        MarkdownIt('commonmark', {'breaks': True, 'html': False})
        .use(container_plugin, name='warning')
        .use(container_plugin, name='tip')
    )
    return md.render(markdown_text)
