"""Latency correction and averaging of stimulus-locked epochs."""

import logging
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochSet:
    sample_rate_hz: float
    epochs: np.ndarray
    t0_ms: float = 0.0
    # total samples the content has been moved earlier by correct_offset
    shift_samples: int = 0

    def __post_init__(self):
        epochs = np.asarray(self.epochs, dtype=float)
        if epochs.ndim != 2 or epochs.shape[0] < 1 or epochs.shape[1] < 1:
            raise ParameterError(f"epochs must be a non-empty 2-D matrix, got shape {epochs.shape}")
        if not self.sample_rate_hz > 0:
            raise ParameterError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        if not 0.0 <= self.t0_ms < self.duration_ms_for(epochs.shape[1]):
            raise ParameterError(f"t0_ms={self.t0_ms} is outside the epoch")
        object.__setattr__(self, 'epochs', epochs)

    def duration_ms_for(self, n_samples):
        return n_samples / self.sample_rate_hz * 1000.0

    @property
    def n_epochs(self):
        return self.epochs.shape[0]

    @property
    def n_samples(self):
        return self.epochs.shape[1]

    @property
    def duration_ms(self):
        return self.duration_ms_for(self.n_samples)


def offset_to_samples(offset_ms, sample_rate_hz):
    return int(round(offset_ms * sample_rate_hz / 1000.0))


def correct_offset(epochs: EpochSet, offset_ms):
    """Move every epoch `offset_ms` earlier (later if negative), zero-filling the gap.

    Only a constant latency can be removed this way; jitter stays in the data.
    """
    if not abs(offset_ms) < epochs.duration_ms:
        raise ParameterError(
            f"offset {offset_ms} ms is not shorter than the {epochs.duration_ms} ms epoch"
        )
    k = offset_to_samples(offset_ms, epochs.sample_rate_hz)
    data = epochs.epochs
    shifted = np.zeros_like(data)
    if k > 0:
        shifted[:, :-k] = data[:, k:]
    elif k < 0:
        shifted[:, -k:] = data[:, :k]
    else:
        shifted[:] = data
    logger.debug("[Epochs] shifted %d epochs by %d samples", epochs.n_epochs, k)
    return replace(epochs, epochs=shifted, shift_samples=epochs.shift_samples + k)


def average(epochs: EpochSet):
    return epochs.epochs.mean(axis=0)


def jitter_attenuation(pulse_sd_ms, jitter_sd_ms, n_epochs, sample_rate_hz, seed=0):
    """Peak of the average of jittered Gaussian pulses over the peak of one pulse.

    Analytically sigma_p / sqrt(sigma_p**2 + sigma_j**2) for many epochs.
    """
    if not pulse_sd_ms > 0:
        raise ParameterError(f"pulse_sd_ms must be > 0, got {pulse_sd_ms}")
    if jitter_sd_ms < 0:
        raise ParameterError(f"jitter_sd_ms must be >= 0, got {jitter_sd_ms}")
    if n_epochs < 1:
        raise ParameterError(f"n_epochs must be >= 1, got {n_epochs}")
    rng = np.random.default_rng(seed)
    half_span_ms = 6.0 * np.hypot(pulse_sd_ms, jitter_sd_ms) + pulse_sd_ms
    half = int(np.ceil(half_span_ms * sample_rate_hz / 1000.0))
    t_ms = np.arange(-half, half + 1) * 1000.0 / sample_rate_hz
    onsets = rng.normal(0.0, jitter_sd_ms, size=n_epochs) if jitter_sd_ms > 0 else np.zeros(n_epochs)

    # accumulate in chunks to keep memory flat for large n_epochs
    total = np.zeros_like(t_ms)
    for start in range(0, n_epochs, 1000):
        chunk = onsets[start:start + 1000, None]
        total += np.exp(-0.5 * ((t_ms[None, :] - chunk) / pulse_sd_ms) ** 2).sum(axis=0)
    averaged = total / n_epochs
    return float(min(1.0, averaged.max()))
