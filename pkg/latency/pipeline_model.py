"""End-to-end tag-to-photodiode latency for tagging pipelines A and B.

Pipeline A tags after software rendering (SoR), pipeline B before it:

    A: SoR -> Tagging -> ScR -> Observation    L(h) = PScR(h) + e
    B: Tagging -> SoR -> ScR -> Observation    L(h) = SoR + PScR(h) + e

PScR is the screen rendering time as perceived once frame scheduling (vsync,
tearing, FPS below the refresh rate) is taken into account. SoR and e are
constants here; their jitter only enters through simulate_latencies and
jitter_budget.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from django.db import models

from .display_model import height, position, position_at, scr
from .exceptions import ConfigError, EmptyInputError, RangeError

# Used when a Generator is not supplied; keeps simulate_latencies reproducible.
DEFAULT_SEED = 0
PHASE_TOL_MS = 1e-9


class PipelineVariant(models.TextChoices):
    A = 'A', 'Tag after software rendering'
    B = 'B', 'Tag before software rendering'


class TagDispatch(models.TextChoices):
    SYNCHRONOUS = 'synchronous', 'Synchronous'
    ASYNCHRONOUS = 'asynchronous', 'Asynchronous'


class LatencyFlag(models.TextChoices):
    TEARING = 'tearing_possible', 'Vsync off: two frames may share one refresh'
    LOW_FPS = 'fps_below_refresh', 'FPS below refresh rate: textures held over several refreshes'
    MULTIPASS = 'multipass_rendering', 'Several cameras rendered in separate passes'


@dataclass(frozen=True)
class RenderConfig:
    fps: float
    vsync: bool = True
    n_cameras: int = 1
    single_pass: bool = False
    sor_ms: float = 0.0

    def __post_init__(self):
        if not self.fps > 0:
            raise ConfigError(f"fps must be > 0, got {self.fps}")
        if self.n_cameras < 1:
            raise ConfigError(f"n_cameras must be >= 1, got {self.n_cameras}")
        if not (self.sor_ms >= 0 and math.isfinite(self.sor_ms)):
            raise ConfigError(f"sor_ms must be finite and >= 0, got {self.sor_ms}")

    @property
    def frame_time_ms(self):
        return 1000.0 / self.fps

    @property
    def multipass(self):
        return self.n_cameras > 1 and not self.single_pass


@dataclass(frozen=True)
class PipelineConfig:
    variant: PipelineVariant
    render: RenderConfig
    tag_dispatch: TagDispatch = TagDispatch.SYNCHRONOUS
    e_mean_ms: float = 0.0
    e_jitter_sd_ms: float = 0.0
    # tag emitted on a refresh boundary (e.g. from a vblank callback)
    phase_locked: bool = False

    def __post_init__(self):
        for name in ('e_mean_ms', 'e_jitter_sd_ms'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value}")
        object.__setattr__(self, 'variant', PipelineVariant(self.variant))
        object.__setattr__(self, 'tag_dispatch', TagDispatch(self.tag_dispatch))


@dataclass(frozen=True)
class LatencyBreakdown:
    sor_ms: float
    pscr_ms: float
    e_ms: float
    total_ms: float
    flags: tuple = field(default=())

    @classmethod
    def compose(cls, sor_ms, pscr_ms, e_ms, flags=()):
        return cls(sor_ms, pscr_ms, e_ms, sor_ms + pscr_ms + e_ms, tuple(flags))


class LofapSelection(NamedTuple):
    selected_ms: float
    multipass_detected: bool


def texture_interval_ms(screen, render):
    """Time between two displayed textures.

    With vsync a texture can only be swapped in on a refresh boundary, so a
    frame time longer than the refresh period is rounded up to whole periods.
    """
    period = screen.refresh_period_ms
    if not render.vsync:
        return render.frame_time_ms
    periods = math.ceil(render.frame_time_ms / period - 1e-9)
    return max(1, periods) * period


def pscr(screen, render, h, texture_ready_offset_ms):
    """Perceived screen rendering time of line h, counted from texture readiness.

    `texture_ready_offset_ms` is when the texture is complete, relative to the
    most recent refresh boundary (any non-negative value; it is reduced modulo
    the refresh period).
    """
    if texture_ready_offset_ms < 0 or not math.isfinite(texture_ready_offset_ms):
        raise RangeError(f"texture_ready_offset_ms must be >= 0, got {texture_ready_offset_ms}")
    line_time = scr(screen, h)
    period = screen.refresh_period_ms
    phase = math.fmod(texture_ready_offset_ms, period)
    if (math.isclose(phase, 0.0, abs_tol=PHASE_TOL_MS)
            or math.isclose(phase, period, abs_tol=PHASE_TOL_MS)):
        # on a refresh boundary up to float rounding
        phase = 0.0
    if render.vsync:
        wait = (period - phase) if phase > 0 else 0.0
        return wait + line_time
    # Tearing: the new texture is scanned out from wherever the raster is.
    line_reached_at = screen.scan_time_a_ms * h
    if line_reached_at >= phase:
        return line_time - phase
    return period - phase + line_time


def _flags(render, screen):
    flags = []
    if not render.vsync:
        flags.append(LatencyFlag.TEARING)
    if render.fps < screen.refresh_rate_hz:
        flags.append(LatencyFlag.LOW_FPS)
    if render.multipass:
        flags.append(LatencyFlag.MULTIPASS)
    return flags


def pipeline_latency_at_height(pipeline, screen, h, tag_phase_ms=0.0):
    render = pipeline.render
    sor_ms = render.sor_ms if pipeline.variant == PipelineVariant.B else 0.0
    pscr_ms = pscr(screen, render, h, tag_phase_ms + sor_ms)
    return LatencyBreakdown.compose(sor_ms, pscr_ms, pipeline.e_mean_ms, _flags(render, screen))


def pipeline_latency(pipeline, screen, matrix, idx, tag_phase_ms=0.0):
    """Deterministic latency of the stimulus at `idx`.

    The tag fires `tag_phase_ms` after a refresh boundary (0: aligned). In
    pipeline A the texture is ready when the tag fires; in pipeline B it is
    ready SoR milliseconds later.
    """
    x, y = position(matrix, screen, idx)
    return pipeline_latency_at_height(pipeline, screen, height(x, y, screen), tag_phase_ms)


def barycentre_latency(pipeline, screen, matrix, bary, tag_phase_ms=0.0):
    x, y = position_at(matrix, screen, bary.i_bar, bary.j_bar)
    return pipeline_latency_at_height(pipeline, screen, height(x, y, screen), tag_phase_ms)


def camera_latencies(pipeline, screen, matrix, idx, tag_phase_ms=0.0):
    """Latency of each camera's appearance of the stimulus.

    Multi-pass rendering finishes camera k one frame time after camera k - 1;
    single-pass rendering finishes all cameras in the same frame.
    """
    render = pipeline.render
    latencies = []
    for k in range(render.n_cameras):
        extra = k * render.frame_time_ms if render.multipass else 0.0
        breakdown = pipeline_latency(pipeline, screen, matrix, idx, tag_phase_ms + extra)
        latencies.append(breakdown.total_ms + extra)
    return latencies


def lofap_select(camera_latencies_ms: Sequence[float], screen, threshold_ms=None):
    """Latency-of-first-appearance: keep the earliest camera.

    Multi-pass rendering is detected when the appearances spread over more than
    `threshold_ms` (default: the screen's scan time a).
    """
    values = [float(v) for v in camera_latencies_ms]
    if not values:
        raise EmptyInputError("lofap_select needs at least one camera latency")
    if any(v < 0 or math.isnan(v) for v in values):
        raise RangeError(f"camera latencies must be >= 0, got {values}")
    if threshold_ms is None:
        threshold_ms = screen.scan_time_a_ms
    selected = min(values)
    return LofapSelection(selected, max(values) - selected > threshold_ms)


def jitter_budget(pipeline, screen):
    """Standard deviation estimate of the tag-to-photodiode latency.

    Root-sum-square of the active sources: e jitter, the tag phase against the
    refresh (uniform over one period, period / sqrt(12)) unless phase locked,
    and for synchronous tagging in pipeline B the tag blocked behind the
    frame being rendered (uniform over one frame time). Asynchronous dispatch
    removes that last term.
    """
    terms = [pipeline.e_jitter_sd_ms]
    if not pipeline.phase_locked:
        terms.append(screen.refresh_period_ms / math.sqrt(12.0))
    if pipeline.variant == PipelineVariant.B and pipeline.tag_dispatch == TagDispatch.SYNCHRONOUS:
        terms.append(pipeline.render.frame_time_ms / math.sqrt(12.0))
    return math.hypot(*terms)


def simulate_latencies(pipeline, screen, matrix, idx, n, rng=None):
    """Draw n latencies with random tag phase, e jitter and dispatch blocking."""
    if rng is None:
        rng = np.random.default_rng(DEFAULT_SEED)
    period = screen.refresh_period_ms
    if pipeline.phase_locked:
        phases = np.zeros(n)
    else:
        phases = rng.uniform(0.0, period, size=n)
    e_draws = np.clip(rng.normal(pipeline.e_mean_ms, pipeline.e_jitter_sd_ms, size=n), 0.0, None)
    blocked = (
        pipeline.variant == PipelineVariant.B
        and pipeline.tag_dispatch == TagDispatch.SYNCHRONOUS
    )
    if blocked:
        # stimulus rendering waits behind the frame in flight
        delays = rng.uniform(0.0, pipeline.render.frame_time_ms, size=n)
    else:
        delays = np.zeros(n)
    out = np.empty(n)
    for k in range(n):
        breakdown = pipeline_latency(pipeline, screen, matrix, idx, float(phases[k] + delays[k]))
        out[k] = delays[k] + breakdown.sor_ms + breakdown.pscr_ms + e_draws[k]
    return out
