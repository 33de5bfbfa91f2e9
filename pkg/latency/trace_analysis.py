"""Latency estimation from a tag channel and a photodiode channel.

The measurement chain is remove_drift (photodiode only) -> detect_onsets ->
pair_events -> estimate_latency, with split_two_means flagging recordings where
the stimulus showed up at two latencies (multi-pass rendering).
synthesize_trace builds recordings with known latencies for closed-loop checks.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d

from .exceptions import EmptyInputError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_DRIFT_WINDOW_MS = 500.0
DEFAULT_THRESHOLD_FRACTION = 0.5
DEFAULT_HYSTERESIS_FRACTION = 0.1
DEFAULT_MIN_SEPARATION_MS = 100.0
DEFAULT_MAX_LATENCY_MS = 250.0
DEFAULT_PULSE_WIDTH_MS = 50.0
# bimodality threshold when neither a config, the settings nor a screen gives one
DEFAULT_MULTIPASS_THRESHOLD_MS = 20.0


@dataclass(frozen=True)
class TraceRecording:
    sample_rate_hz: float
    tag: np.ndarray
    photo: np.ndarray
    # per-event latencies used to build a synthetic recording
    injected_latencies_ms: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ParameterError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        tag = np.asarray(self.tag, dtype=float)
        photo = np.asarray(self.photo, dtype=float)
        if tag.ndim != 1 or photo.ndim != 1 or tag.shape != photo.shape:
            raise ParameterError(
                f"tag and photodiode channels differ in length ({tag.size} vs {photo.size})"
            )
        if not (np.all(np.isfinite(tag)) and np.all(np.isfinite(photo))):
            raise ParameterError("trace contains non-finite samples")
        object.__setattr__(self, 'tag', tag)
        object.__setattr__(self, 'photo', photo)

    @property
    def n_samples(self):
        return self.tag.size


@dataclass(frozen=True)
class LatencyEstimate:
    per_event_ms: tuple
    mean_ms: float
    sd_ms: float
    n_events: int


class EventPair(NamedTuple):
    tag_idx: int
    photo_idx: int


@dataclass(frozen=True)
class PairingResult:
    pairs: tuple
    unpaired_tags: tuple
    unpaired_photos: tuple

    @property
    def warnings(self):
        notes = []
        if self.unpaired_tags:
            notes.append(f"{len(self.unpaired_tags)} tag onset(s) without a photodiode onset")
        if self.unpaired_photos:
            notes.append(f"{len(self.unpaired_photos)} photodiode onset(s) without a tag")
        return notes


@dataclass(frozen=True)
class TwoMeansSplit:
    low_mean_ms: float
    high_mean_ms: float
    n_low: int
    n_high: int
    threshold_ms: float

    @property
    def separation_ms(self):
        return self.high_mean_ms - self.low_mean_ms

    @property
    def bimodal(self):
        return self.n_low > 0 and self.n_high > 0 and self.separation_ms > self.threshold_ms


@dataclass(frozen=True)
class TraceAnalysis:
    estimate: LatencyEstimate
    pairing: PairingResult
    split: TwoMeansSplit
    tag_onsets: tuple
    photo_onsets: tuple

    @property
    def lofap_ms(self):
        """Latency of the first appearance when the events split in two clusters."""
        return self.split.low_mean_ms if self.split.bimodal else None

    @property
    def warnings(self):
        notes = list(self.pairing.warnings)
        if self.split.bimodal:
            notes.append(
                f"bimodal latencies: {self.split.low_mean_ms:.1f} ms and "
                f"{self.split.high_mean_ms:.1f} ms are {self.split.separation_ms:.1f} ms apart "
                f"(> {self.split.threshold_ms:.1f} ms); multi-pass rendering likely, "
                f"use the first appearance"
            )
        return notes


def _samples(ms, sample_rate_hz):
    return ms * sample_rate_hz / 1000.0


def remove_drift(signal, sample_rate_hz, window_ms=DEFAULT_DRIFT_WINDOW_MS):
    """Subtract a centered moving average of `window_ms` from the signal."""
    signal = np.asarray(signal, dtype=float)
    if not window_ms > 0:
        raise ParameterError(f"window_ms must be > 0, got {window_ms}")
    width = int(round(_samples(window_ms, sample_rate_hz)))
    # odd width keeps the window centred on each sample
    width = max(1, width | 1)
    if width > signal.size:
        raise ParameterError(
            f"drift window of {window_ms} ms ({width} samples) is longer than the "
            f"recording ({signal.size} samples)"
        )
    return signal - uniform_filter1d(signal, size=width, mode='nearest')


def detect_onsets(signal, threshold_fraction=DEFAULT_THRESHOLD_FRACTION,
                  min_separation_ms=DEFAULT_MIN_SEPARATION_MS, sample_rate_hz=1000.0,
                  hysteresis_fraction=DEFAULT_HYSTERESIS_FRACTION):
    """Rising crossings of min + threshold_fraction * (max - min).

    An onset is the first sample at or above the level. After an onset the
    detector re-arms only once the signal falls below the level minus
    `hysteresis_fraction` of the range, and crossings closer than
    `min_separation_ms` to the previous onset are dropped.
    """
    if not 0.0 < threshold_fraction < 1.0:
        raise ParameterError(f"threshold_fraction must be in (0, 1), got {threshold_fraction}")
    signal = np.asarray(signal, dtype=float)
    if signal.size < 2:
        return []
    low, high = float(signal.min()), float(signal.max())
    span = high - low
    if span <= 0:
        return []
    level = low + threshold_fraction * span
    rearm = level - hysteresis_fraction * span
    crossings = np.nonzero((signal[1:] >= level) & (signal[:-1] < level))[0] + 1
    below = np.nonzero(signal < rearm)[0]
    separation = _samples(min_separation_ms, sample_rate_hz)

    onsets = []
    for candidate in crossings.tolist():
        if onsets:
            previous = onsets[-1]
            if candidate - previous < separation:
                continue
            k = np.searchsorted(below, previous, side='right')
            if k >= below.size or below[k] >= candidate:
                continue
        onsets.append(candidate)
    return onsets


def pair_events(tag_onsets, photo_onsets, max_latency_ms=DEFAULT_MAX_LATENCY_MS,
                sample_rate_hz=1000.0):
    """Pair every tag with the earliest later photodiode onset within max_latency_ms.

    Both sequences are walked once, so pairs never cross; onsets left over on
    either side are reported, not dropped.
    """
    tags = list(tag_onsets)
    photos = list(photo_onsets)
    for name, seq in (('tag', tags), ('photodiode', photos)):
        if any(b <= a for a, b in zip(seq, seq[1:])):
            raise ParameterError(f"{name} onsets must be strictly increasing")

    pairs, unpaired_tags, unpaired_photos = [], [], []
    p = 0
    for t in tags:
        while p < len(photos) and photos[p] <= t:
            unpaired_photos.append(photos[p])
            p += 1
        if p < len(photos) and (photos[p] - t) * 1000.0 / sample_rate_hz <= max_latency_ms:
            pairs.append(EventPair(t, photos[p]))
            p += 1
        else:
            unpaired_tags.append(t)
    unpaired_photos.extend(photos[p:])

    result = PairingResult(tuple(pairs), tuple(unpaired_tags), tuple(unpaired_photos))
    for note in result.warnings:
        logger.warning("[Trace] %s", note)
    return result


def estimate_latency(pairs, sample_rate_hz):
    pairs = list(pairs)
    if not pairs:
        raise EmptyInputError("no paired events to estimate latency from")
    per_event = np.array([(p - t) * 1000.0 / sample_rate_hz for t, p in pairs])
    sd = float(np.std(per_event, ddof=1)) if per_event.size > 1 else 0.0
    return LatencyEstimate(
        per_event_ms=tuple(per_event.tolist()),
        mean_ms=float(per_event.mean()),
        sd_ms=sd,
        n_events=int(per_event.size),
    )


def split_two_means(latencies_ms: Sequence[float], threshold_ms):
    """Exact 1-D two-means split (minimum within-cluster sum of squares)."""
    values = np.sort(np.asarray(latencies_ms, dtype=float))
    n = values.size
    if n == 0:
        raise EmptyInputError("cannot split an empty latency set")
    if n == 1:
        return TwoMeansSplit(float(values[0]), float(values[0]), 1, 0, threshold_ms)
    csum = np.cumsum(values)
    csq = np.cumsum(values ** 2)
    k = np.arange(1, n)
    left_sse = csq[:-1] - csum[:-1] ** 2 / k
    right_sum = csum[-1] - csum[:-1]
    right_sse = (csq[-1] - csq[:-1]) - right_sum ** 2 / (n - k)
    best = int(np.argmin(left_sse + right_sse))
    n_low = best + 1
    return TwoMeansSplit(
        low_mean_ms=float(values[:n_low].mean()),
        high_mean_ms=float(values[n_low:].mean()),
        n_low=n_low,
        n_high=n - n_low,
        threshold_ms=threshold_ms,
    )


def analyze_trace(recording, threshold_fraction=DEFAULT_THRESHOLD_FRACTION,
                  window_ms=DEFAULT_DRIFT_WINDOW_MS, max_latency_ms=DEFAULT_MAX_LATENCY_MS,
                  min_separation_ms=DEFAULT_MIN_SEPARATION_MS,
                  hysteresis_fraction=DEFAULT_HYSTERESIS_FRACTION,
                  multipass_threshold_ms=DEFAULT_MULTIPASS_THRESHOLD_MS):
    fs = recording.sample_rate_hz
    photo = remove_drift(recording.photo, fs, window_ms)
    tag_onsets = detect_onsets(recording.tag, threshold_fraction, min_separation_ms, fs,
                               hysteresis_fraction)
    photo_onsets = detect_onsets(photo, threshold_fraction, min_separation_ms, fs,
                                 hysteresis_fraction)
    logger.info("[Trace] %d tag onsets, %d photodiode onsets", len(tag_onsets), len(photo_onsets))
    pairing = pair_events(tag_onsets, photo_onsets, max_latency_ms, fs)
    estimate = estimate_latency(pairing.pairs, fs)
    split = split_two_means(estimate.per_event_ms, multipass_threshold_ms)
    if split.bimodal:
        logger.warning("[Trace] bimodal latency distribution, separation %.1f ms",
                       split.separation_ms)
    return TraceAnalysis(estimate, pairing, split, tuple(tag_onsets), tuple(photo_onsets))


def synthesize_trace(event_times_ms, latency_mean_ms, latency_sd_ms, sample_rate_hz,
                     noise_sd=0.0, drift_amplitude=0.0, seed=0,
                     pulse_width_ms=DEFAULT_PULSE_WIDTH_MS, duration_ms=None,
                     drift_period_ms=10000.0, latencies_ms=None):
    """Rectangular tag pulses and photodiode pulses delayed by per-event latencies.

    Latencies are drawn from Normal(latency_mean_ms, latency_sd_ms) unless
    `latencies_ms` gives them explicitly. The photodiode channel also gets
    white noise and a slow sinusoidal drift.
    """
    if not (sample_rate_hz > 0 and math.isfinite(sample_rate_hz)):
        raise ParameterError(f"sample_rate_hz must be > 0, got {sample_rate_hz}")
    if not latency_sd_ms >= 0:
        raise ParameterError(f"latency_sd_ms must be >= 0, got {latency_sd_ms}")
    if not noise_sd >= 0:
        raise ParameterError(f"noise_sd must be >= 0, got {noise_sd}")
    if not pulse_width_ms > 0:
        raise ParameterError(f"pulse_width_ms must be > 0, got {pulse_width_ms}")
    times = [float(t) for t in event_times_ms]
    if any(t < 0 for t in times):
        raise ParameterError("event times must be >= 0")
    if any(b - a < pulse_width_ms for a, b in zip(times, times[1:])):
        raise ParameterError(
            f"event times must be sorted and at least {pulse_width_ms} ms apart"
        )
    rng = np.random.default_rng(seed)
    if latencies_ms is None:
        latencies = rng.normal(latency_mean_ms, latency_sd_ms, size=len(times))
    else:
        latencies = np.asarray(latencies_ms, dtype=float)
        if latencies.size != len(times):
            raise ParameterError(
                f"{latencies.size} latencies given for {len(times)} events"
            )
    if np.any(latencies <= 0):
        raise ParameterError("synthetic latencies must be > 0")

    if duration_ms is None:
        if times:
            duration_ms = times[-1] + float(latencies.max()) + pulse_width_ms + 1000.0
        else:
            duration_ms = 1000.0
    n = int(math.ceil(_samples(duration_ms, sample_rate_hz)))
    width = max(1, int(round(_samples(pulse_width_ms, sample_rate_hz))))
    tag = np.zeros(n)
    photo = np.zeros(n)
    for t, lat in zip(times, latencies):
        start = int(round(_samples(t, sample_rate_hz)))
        tag[start:start + width] = 1.0
        start = int(round(_samples(t + lat, sample_rate_hz)))
        photo[start:start + width] = 1.0

    if noise_sd > 0:
        photo += rng.normal(0.0, noise_sd, size=n)
    if drift_amplitude:
        t_ms = np.arange(n) * 1000.0 / sample_rate_hz
        photo += drift_amplitude * np.sin(2.0 * np.pi * t_ms / drift_period_ms)

    return TraceRecording(sample_rate_hz, tag, photo, tuple(latencies.tolist()))
