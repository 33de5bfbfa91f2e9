"""Geometry and raster timing of a stimulus matrix on a scanned display.

A stimulus at grid cell (i, j) sits at a screen position P(i, j), which maps
to a fraction h of the scan extent (H), which the raster reaches
a * h + b milliseconds after the scan starts (ScR). Everything here is a pure
function over frozen values; times are real-valued milliseconds with no
quantisation to refresh ticks (that lives in pipeline_model).
"""

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from django.db import models

from .exceptions import EmptyInputError, GeometryError, GridIndexError, RangeError

NOMINAL_PIXEL_RESPONSE_MS = 6.0

# 16.67 ms entered for a 16.666... ms period must still count as fitting.
SCAN_FIT_TOLERANCE_MS = 0.01


class Orientation(models.TextChoices):
    NORMAL = 'normal', 'Scan along displayed height'
    TURNED_90 = 'turned_90', 'Scan along displayed width'


def _require_fraction(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise RangeError(f"{name}={value} outside [0, 1]")


@dataclass(frozen=True)
class ScreenModel:
    refresh_rate_hz: float
    scan_time_a_ms: float
    pixel_response_b_ms: float
    width_px: int
    height_px: int
    orientation: Orientation = Orientation.NORMAL

    def __post_init__(self):
        if not self.refresh_rate_hz > 0:
            raise GeometryError(f"refresh_rate_hz must be > 0, got {self.refresh_rate_hz}")
        if not self.scan_time_a_ms > 0:
            raise GeometryError(f"scan_time_a_ms must be > 0, got {self.scan_time_a_ms}")
        if not self.pixel_response_b_ms >= 0:
            raise GeometryError(f"pixel_response_b_ms must be >= 0, got {self.pixel_response_b_ms}")
        if self.width_px <= 0 or self.height_px <= 0:
            raise GeometryError(f"resolution must be positive, got {self.width_px}x{self.height_px}")
        if self.scan_time_a_ms > self.refresh_period_ms + SCAN_FIT_TOLERANCE_MS:
            raise GeometryError(
                f"scan_time_a_ms={self.scan_time_a_ms} does not fit in one refresh period "
                f"({self.refresh_period_ms:.3f} ms at {self.refresh_rate_hz} Hz)"
            )
        object.__setattr__(self, 'orientation', Orientation(self.orientation))

    @classmethod
    def with_nominal_timing(cls, refresh_rate_hz, width_px, height_px,
                            orientation=Orientation.NORMAL, pixel_response_b_ms=None):
        """a = floor(1000 / RR) (16 ms at 60 Hz) and b = 6 ms unless given."""
        scan = float(math.floor(1000.0 / refresh_rate_hz)) if refresh_rate_hz > 0 else 0.0
        if pixel_response_b_ms is None:
            pixel_response_b_ms = NOMINAL_PIXEL_RESPONSE_MS
        return cls(refresh_rate_hz, scan, pixel_response_b_ms, width_px, height_px, orientation)

    @property
    def refresh_period_ms(self):
        return 1000.0 / self.refresh_rate_hz

    @property
    def full_refresh_ms(self):
        """Time for the last pixel of a refresh to settle: a + b."""
        return self.scan_time_a_ms + self.pixel_response_b_ms

    @property
    def scan_extent_px(self):
        if self.orientation == Orientation.TURNED_90:
            return self.width_px
        return self.height_px


@dataclass(frozen=True)
class GridIndex:
    i: int
    j: int


@dataclass(frozen=True)
class Barycentre:
    i_bar: float
    j_bar: float


@dataclass(frozen=True)
class StimulusMatrix:
    rows_I: int
    cols_J: int
    pitch_ui_px: float
    pitch_uj_px: float
    margin_mi_px: float = 0.0
    margin_mj_px: float = 0.0

    def __post_init__(self):
        if self.rows_I < 1 or self.cols_J < 1:
            raise GeometryError(f"matrix must be at least 1x1, got {self.rows_I}x{self.cols_J}")
        if not (self.pitch_ui_px > 0 and self.pitch_uj_px > 0):
            raise GeometryError("stimulus pitches must be > 0")
        if self.margin_mi_px < 0 or self.margin_mj_px < 0:
            raise GeometryError("margins must be >= 0")

    @property
    def size(self):
        return self.rows_I * self.cols_J

    def check_fits(self, screen):
        last_row = self.margin_mi_px + (self.rows_I - 1) * self.pitch_ui_px
        last_col = self.margin_mj_px + (self.cols_J - 1) * self.pitch_uj_px
        if not last_row < screen.height_px:
            raise GeometryError(
                f"last row centre at {last_row} px is off a {screen.height_px} px high screen"
            )
        if not last_col < screen.width_px:
            raise GeometryError(
                f"last column centre at {last_col} px is off a {screen.width_px} px wide screen"
            )

    def check_index(self, idx):
        if not (0 <= idx.i < self.rows_I and 0 <= idx.j < self.cols_J):
            raise GridIndexError(
                f"index ({idx.i}, {idx.j}) outside a {self.rows_I}x{self.cols_J} matrix"
            )

    def cells(self):
        for i in range(self.rows_I):
            for j in range(self.cols_J):
                yield GridIndex(i, j)

    def scan_pitch_px(self, screen):
        if screen.orientation == Orientation.TURNED_90:
            return self.pitch_uj_px
        return self.pitch_ui_px


def position_at(matrix, screen, i, j):
    """Position of a (possibly fractional) grid coordinate as screen fractions."""
    matrix.check_fits(screen)
    x = (matrix.margin_mj_px + j * matrix.pitch_uj_px) / screen.width_px
    y = (matrix.margin_mi_px + i * matrix.pitch_ui_px) / screen.height_px
    return x, y


def position(matrix, screen, idx):
    """Centre of stimulus `idx` as (x, y) fractions of screen width and height."""
    matrix.check_index(idx)
    return position_at(matrix, screen, idx.i, idx.j)


def height(x, y, screen):
    _require_fraction('x', x)
    _require_fraction('y', y)
    if screen.orientation == Orientation.TURNED_90:
        return x
    return y


def scr(screen, h):
    """Screen rendering time of line h: ScR(h) = a * h + b."""
    _require_fraction('h', h)
    return screen.scan_time_a_ms * h + screen.pixel_response_b_ms


def scan_axis_factor(matrix, screen):
    """Milliseconds of raster time between two adjacent stimuli along the scan."""
    return screen.scan_time_a_ms * matrix.scan_pitch_px(screen) / screen.scan_extent_px


def _scan_coordinate(screen, i, j):
    return j if screen.orientation == Orientation.TURNED_90 else i


def delta_latency(matrix, screen, idx0, idx1):
    """Latency difference between two stimuli under single-pass rendering or LOFAP."""
    matrix.check_index(idx0)
    matrix.check_index(idx1)
    steps = abs(_scan_coordinate(screen, idx1.i, idx1.j) - _scan_coordinate(screen, idx0.i, idx0.j))
    return scan_axis_factor(matrix, screen) * steps


def barycentres(rows, cols):
    """Mean row and column along the last axis; works on one draw or a batch."""
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    return rows.mean(axis=-1), cols.mean(axis=-1)


def barycentre(stimuli: Iterable[GridIndex]):
    stimuli = list(stimuli)
    if not stimuli:
        raise EmptyInputError("barycentre of an empty stimulus sequence")
    i_bar, j_bar = barycentres([s.i for s in stimuli], [s.j for s in stimuli])
    return Barycentre(float(i_bar), float(j_bar))


def check_barycentre(matrix, bary):
    if not (0.0 <= bary.i_bar <= matrix.rows_I - 1 and 0.0 <= bary.j_bar <= matrix.cols_J - 1):
        raise RangeError(
            f"barycentre ({bary.i_bar}, {bary.j_bar}) outside a "
            f"{matrix.rows_I}x{matrix.cols_J} matrix"
        )


def barycentre_offsets(matrix, screen, i_bars, j_bars, ref_i, ref_j):
    """Vectorised barycentre_offset over arrays of barycentres; no bounds checks."""
    distance = np.abs(
        np.asarray(_scan_coordinate(screen, i_bars, j_bars), dtype=float)
        - _scan_coordinate(screen, ref_i, ref_j)
    )
    return scan_axis_factor(matrix, screen) * distance


def barycentre_offset(matrix, screen, bary, ref_idx):
    """Latency between the barycentre of the displayed stimuli and a reference cell."""
    check_barycentre(matrix, bary)
    matrix.check_index(ref_idx)
    return float(barycentre_offsets(matrix, screen, bary.i_bar, bary.j_bar, ref_idx.i, ref_idx.j))


def max_latency_spread(matrix, screen):
    """Latency between the first and last stimulus along the scan axis."""
    matrix.check_fits(screen)
    if screen.orientation == Orientation.TURNED_90:
        far = GridIndex(0, matrix.cols_J - 1)
    else:
        far = GridIndex(matrix.rows_I - 1, 0)
    return delta_latency(matrix, screen, GridIndex(0, 0), far)
