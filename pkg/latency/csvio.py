"""Reading and writing the trace, epoch and table CSV formats.

All files are UTF-8 with LF line endings and `.` decimals. Reals are written
with repr() so they read back to the same float.

    trace:  sample,tag,photo      one row per sample, sample counts from 0
    epochs: epoch,sample,value    long format, epoch-major, both count from 0
"""

import csv
import math

import numpy as np

from .epoch_tools import EpochSet
from .exceptions import DataFormatError
from .trace_analysis import TraceRecording

TRACE_HEADER = ['sample', 'tag', 'photo']
EPOCH_HEADER = ['epoch', 'sample', 'value']


def format_real(value):
    return repr(float(value))


def _writer(stream):
    return csv.writer(stream, lineterminator='\n')


def _check_header(reader, expected):
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("file is empty, expected header " + ','.join(expected), row=1)
    if [h.strip() for h in header] != expected:
        raise DataFormatError(f"header must be {','.join(expected)}, got {','.join(header)}", row=1)


def _int(text, row, name):
    try:
        return int(text)
    except ValueError:
        raise DataFormatError(f"{name} '{text}' is not an integer", row=row)


def _real(text, row, name):
    try:
        value = float(text)
    except ValueError:
        raise DataFormatError(f"{name} '{text}' is not a decimal number", row=row)
    if not math.isfinite(value):
        raise DataFormatError(f"{name} is not finite", row=row)
    return value


def read_trace_csv(stream, sample_rate_hz):
    reader = csv.reader(stream)
    _check_header(reader, TRACE_HEADER)
    tag, photo = [], []
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise DataFormatError(f"expected 3 fields, got {len(row)}", row=row_number)
        sample = _int(row[0], row_number, 'sample')
        if sample != len(tag):
            raise DataFormatError(f"sample {sample} out of sequence, expected {len(tag)}", row=row_number)
        tag.append(_real(row[1], row_number, 'tag'))
        photo.append(_real(row[2], row_number, 'photo'))
    if not tag:
        raise DataFormatError("no sample rows", row=2)
    return TraceRecording(sample_rate_hz, np.array(tag), np.array(photo))


def write_trace_csv(recording, stream):
    writer = _writer(stream)
    writer.writerow(TRACE_HEADER)
    for k, (t, p) in enumerate(zip(recording.tag.tolist(), recording.photo.tolist())):
        writer.writerow([k, format_real(t), format_real(p)])


def read_epochs_csv(stream, sample_rate_hz, t0_ms=0.0):
    reader = csv.reader(stream)
    _check_header(reader, EPOCH_HEADER)
    epochs = []
    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise DataFormatError(f"expected 3 fields, got {len(row)}", row=row_number)
        epoch = _int(row[0], row_number, 'epoch')
        sample = _int(row[1], row_number, 'sample')
        value = _real(row[2], row_number, 'value')
        if epoch == len(epochs) and sample == 0:
            if epochs and len(epochs[-1]) != len(epochs[0]):
                raise DataFormatError(
                    f"epoch {epoch - 1} has {len(epochs[-1])} samples, expected {len(epochs[0])}",
                    row=row_number,
                )
            epochs.append([])
        elif not epochs or epoch != len(epochs) - 1 or sample != len(epochs[-1]):
            raise DataFormatError(f"epoch {epoch} sample {sample} out of sequence", row=row_number)
        epochs[-1].append(value)
    if not epochs:
        raise DataFormatError("no epoch rows", row=2)
    if len(epochs[-1]) != len(epochs[0]):
        raise DataFormatError(
            f"last epoch has {len(epochs[-1])} samples, expected {len(epochs[0])}",
            row=row_number,
        )
    return EpochSet(sample_rate_hz, np.array(epochs), t0_ms)


def write_epochs_csv(epoch_set, stream):
    writer = _writer(stream)
    writer.writerow(EPOCH_HEADER)
    for e, epoch in enumerate(epoch_set.epochs.tolist()):
        for s, value in enumerate(epoch):
            writer.writerow([e, s, format_real(value)])


def write_table(header, rows, stream):
    writer = _writer(stream)
    writer.writerow(header)
    writer.writerows(rows)
