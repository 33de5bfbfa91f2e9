"""Monte Carlo distance between the barycentre of displayed stimuli and the photodiode.

Each trial draws `n_stimuli` cells of the matrix, takes their barycentre and
measures how far it falls from the cell under the photodiode, in stimulus
units per axis and in milliseconds along the scan axis.

Trials run in blocks of `block_trials`. Block k draws from
Philox(SeedSequence([seed, k])), so a result depends only on the seed and the
block size, never on how many worker threads evaluated the blocks.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from django.db import models

from .display_model import (
    Barycentre, GridIndex, Orientation, ScreenModel, StimulusMatrix,
    barycentres, barycentre_offsets, check_barycentre,
)
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "Philox4x64-10 via SeedSequence([seed, block])"
DEFAULT_BLOCK_TRIALS = 250


class Sampler(models.TextChoices):
    WITH_REPLACEMENT = 'with_replacement', 'With replacement'
    WITHOUT_REPLACEMENT = 'without_replacement', 'Without replacement'


@dataclass(frozen=True)
class McConfig:
    matrix: StimulusMatrix
    screen: ScreenModel
    n_stimuli: int
    photodiode_idx: GridIndex | Barycentre
    n_trials: int = 10000
    sampler: Sampler = Sampler.WITH_REPLACEMENT
    seed: int = 0
    keep_per_trial: bool = False
    block_trials: int = DEFAULT_BLOCK_TRIALS

    def __post_init__(self):
        object.__setattr__(self, 'sampler', Sampler(self.sampler))
        if self.n_stimuli < 1:
            raise ConfigError(f"n_stimuli must be >= 1, got {self.n_stimuli}")
        if self.n_trials < 1:
            raise ConfigError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.block_trials < 1:
            raise ConfigError(f"block_trials must be >= 1, got {self.block_trials}")
        if self.sampler == Sampler.WITHOUT_REPLACEMENT and self.n_stimuli > self.matrix.size:
            raise ConfigError(
                f"cannot draw {self.n_stimuli} distinct stimuli from a "
                f"{self.matrix.rows_I}x{self.matrix.cols_J} matrix"
            )
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        self.matrix.check_fits(self.screen)
        check_barycentre(self.matrix, self.photodiode)

    @property
    def photodiode(self):
        if isinstance(self.photodiode_idx, GridIndex):
            return Barycentre(float(self.photodiode_idx.i), float(self.photodiode_idx.j))
        return self.photodiode_idx


@dataclass(frozen=True)
class McResult:
    n_stimuli: int
    n_trials: int
    mean_row_dist: float
    sd_row_dist: float
    mean_col_dist: float
    sd_col_dist: float
    mean_latency_ms: float
    sd_latency_ms: float
    mean_row_signed: float
    sd_row_signed: float
    mean_col_signed: float
    sd_col_signed: float
    rng_algorithm: str = RNG_ALGORITHM
    block_trials: int = DEFAULT_BLOCK_TRIALS
    workers: int = 1
    per_trial: tuple | None = field(default=None, repr=False)

    def as_summary(self):
        """JSON-friendly summary, without the per-trial barycentres."""
        return {
            'n_stimuli': self.n_stimuli,
            'n_trials': self.n_trials,
            'mean_row_dist': self.mean_row_dist,
            'sd_row_dist': self.sd_row_dist,
            'mean_col_dist': self.mean_col_dist,
            'sd_col_dist': self.sd_col_dist,
            'mean_latency_ms': self.mean_latency_ms,
            'sd_latency_ms': self.sd_latency_ms,
            'rng_algorithm': self.rng_algorithm,
            'block_trials': self.block_trials,
        }


@dataclass(frozen=True)
class CurvePoint:
    n: int
    mean_dist: float
    sd_dist: float
    result: McResult


def _block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _draw_block(config, block, trials):
    rng = _block_rng(config.seed, block)
    population = config.matrix.size
    if config.sampler == Sampler.WITH_REPLACEMENT:
        cells = rng.integers(0, population, size=(trials, config.n_stimuli))
    else:
        deck = np.tile(np.arange(population), (trials, 1))
        cells = rng.permuted(deck, axis=1)[:, :config.n_stimuli]
    rows, cols = np.divmod(cells, config.matrix.cols_J)
    return barycentres(rows, cols)


def _sd(values):
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def run_mc(config: McConfig, workers=1):
    """Run the Monte Carlo; deterministic for a fixed seed and block size."""
    n_blocks, tail = divmod(config.n_trials, config.block_trials)
    sizes = [config.block_trials] * n_blocks + ([tail] if tail else [])
    logger.info(
        "[MC] %d trials of %d stimuli in %d blocks (%s, workers=%d)",
        config.n_trials, config.n_stimuli, len(sizes), config.sampler, workers,
    )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda k: _draw_block(config, k, sizes[k]), range(len(sizes))))
    else:
        parts = [_draw_block(config, k, size) for k, size in enumerate(sizes)]

    i_bars = np.concatenate([p[0] for p in parts])
    j_bars = np.concatenate([p[1] for p in parts])
    photo = config.photodiode
    row_signed = i_bars - photo.i_bar
    col_signed = j_bars - photo.j_bar
    row_dist = np.abs(row_signed)
    col_dist = np.abs(col_signed)
    latencies = barycentre_offsets(
        config.matrix, config.screen, i_bars, j_bars, photo.i_bar, photo.j_bar
    )

    per_trial = None
    if config.keep_per_trial:
        per_trial = tuple(zip(i_bars.tolist(), j_bars.tolist()))

    return McResult(
        n_stimuli=config.n_stimuli,
        n_trials=config.n_trials,
        mean_row_dist=float(row_dist.mean()),
        sd_row_dist=_sd(row_dist),
        mean_col_dist=float(col_dist.mean()),
        sd_col_dist=_sd(col_dist),
        mean_latency_ms=float(latencies.mean()),
        sd_latency_ms=_sd(latencies),
        mean_row_signed=float(row_signed.mean()),
        sd_row_signed=_sd(row_signed),
        mean_col_signed=float(col_signed.mean()),
        sd_col_signed=_sd(col_signed),
        block_trials=config.block_trials,
        workers=workers,
        per_trial=per_trial,
    )


def scan_axis_distance(result, screen, signed=False):
    """(mean, sd) of the distance along the axis the raster scans."""
    if screen.orientation == Orientation.TURNED_90:
        if signed:
            return result.mean_col_signed, result.sd_col_signed
        return result.mean_col_dist, result.sd_col_dist
    if signed:
        return result.mean_row_signed, result.sd_row_signed
    return result.mean_row_dist, result.sd_row_dist


def dist_curve(config: McConfig, n_values: Sequence[int], workers=1, signed=False):
    """Barycentre distance along the scan axis as the number of stimuli grows."""
    points = []
    for n in n_values:
        result = run_mc(replace(config, n_stimuli=int(n)), workers=workers)
        mean_dist, sd_dist = scan_axis_distance(result, config.screen, signed=signed)
        points.append(CurvePoint(int(n), mean_dist, sd_dist, result))
    return points
