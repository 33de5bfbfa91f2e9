import io

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from latency.csvio import read_epochs_csv, write_epochs_csv
from latency.epoch_tools import EpochSet, average, correct_offset, jitter_attenuation
from latency.exceptions import DataFormatError, ParameterError


def epochs_of(rows, fs=1000.0, t0_ms=0.0):
    return EpochSet(fs, np.array(rows, dtype=float), t0_ms)


class CorrectOffsetTests(SimpleTestCase):
    def test_positive_offset_moves_content_earlier(self):
        corrected = correct_offset(epochs_of([[0, 0, 1, 2, 3]]), 2.0)
        np.testing.assert_array_equal(corrected.epochs, [[1, 2, 3, 0, 0]])
        self.assertEqual(corrected.shift_samples, 2)

    def test_zero_offset_is_identity(self):
        epochs = epochs_of([[1, 2, 3], [4, 5, 6]])
        np.testing.assert_array_equal(correct_offset(epochs, 0.0).epochs, epochs.epochs)

    def test_negative_offset_moves_content_later(self):
        corrected = correct_offset(epochs_of([[1, 2, 3, 4]]), -1.0)
        np.testing.assert_array_equal(corrected.epochs, [[0, 1, 2, 3]])

    def test_offset_rounds_to_nearest_sample(self):
        corrected = correct_offset(epochs_of([[0, 1, 2, 3]], fs=500.0), 2.2)
        np.testing.assert_array_equal(corrected.epochs, [[1, 2, 3, 0]])

    def test_shifts_accumulate(self):
        corrected = correct_offset(correct_offset(epochs_of([[0, 0, 0, 1, 2]]), 1.0), 2.0)
        self.assertEqual(corrected.shift_samples, 3)
        np.testing.assert_array_equal(corrected.epochs, [[1, 2, 0, 0, 0]])

    def test_offset_longer_than_epoch(self):
        with self.assertRaises(ParameterError):
            correct_offset(epochs_of([[1, 2, 3]]), 3.0)

    @given(st.integers(0, 2 ** 32 - 1), st.integers(-39, 39))
    @settings(max_examples=50, deadline=None)
    def test_shift_back_restores_the_overlap(self, seed, offset_ms):
        epochs = epochs_of(np.random.default_rng(seed).normal(size=(4, 40)))
        restored = correct_offset(correct_offset(epochs, offset_ms), -offset_ms)
        self.assertEqual(restored.shift_samples, 0)
        if offset_ms >= 0:
            overlap = slice(offset_ms, None)
        else:
            overlap = slice(None, 40 + offset_ms)
        np.testing.assert_array_equal(restored.epochs[:, overlap], epochs.epochs[:, overlap])

    def test_constant_latency_is_recovered(self):
        rng = np.random.default_rng(4)
        t = np.arange(300)
        template = np.exp(-0.5 * ((t - 100) / 4.0) ** 2)
        delayed = np.exp(-0.5 * ((t - 138) / 4.0) ** 2)
        epochs = epochs_of(delayed + rng.normal(0.0, 0.2, size=(100, 300)))
        corrected = average(correct_offset(epochs, 38.0))
        self.assertLessEqual(abs(int(np.argmax(corrected)) - int(np.argmax(template))), 1)


class AverageTests(SimpleTestCase):
    def test_average(self):
        np.testing.assert_array_equal(average(epochs_of([[1, 2], [3, 6]])), [2, 4])

    @given(st.integers(0, 2 ** 32 - 1), st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=30, deadline=None)
    def test_average_is_linear(self, seed, alpha, beta):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 8, 50))
        np.testing.assert_allclose(
            average(epochs_of(alpha * x + beta * y)),
            alpha * average(epochs_of(x)) + beta * average(epochs_of(y)),
            atol=1e-9,
        )

    def test_noise_shrinks_with_the_square_root_of_the_count(self):
        noise = np.random.default_rng(8).normal(0.0, 1.0, size=(100, 2000))
        rms = float(np.sqrt(np.mean(average(epochs_of(noise)) ** 2)))
        self.assertAlmostEqual(rms, 1.0 / np.sqrt(100), delta=0.2 / np.sqrt(100))


class JitterAttenuationTests(SimpleTestCase):
    def test_equal_pulse_and_jitter_width(self):
        self.assertAlmostEqual(jitter_attenuation(20.0, 20.0, 10000, 1000.0, seed=1), 0.707, delta=0.02)

    def test_no_jitter_keeps_the_peak(self):
        self.assertEqual(jitter_attenuation(20.0, 0.0, 100, 1000.0), 1.0)

    def test_jitter_ten_times_the_pulse_width(self):
        self.assertLess(jitter_attenuation(2.0, 20.0, 2000, 1000.0, seed=2), 0.15)

    def test_more_jitter_flattens_more(self):
        self.assertLess(jitter_attenuation(20.0, 40.0, 2000, 1000.0),
                        jitter_attenuation(20.0, 10.0, 2000, 1000.0))


class EpochCsvTests(SimpleTestCase):
    def test_written_epochs_read_back(self):
        epochs = epochs_of([[0.1, 0.25, -3.0], [1e-7, 2.0, 3.5]])
        buffer = io.StringIO()
        write_epochs_csv(epochs, buffer)
        self.assertTrue(buffer.getvalue().startswith("epoch,sample,value\n0,0,0.1\n"))
        buffer.seek(0)
        np.testing.assert_array_equal(read_epochs_csv(buffer, 1000.0).epochs, epochs.epochs)

    def test_ragged_epochs(self):
        text = "epoch,sample,value\n0,0,1\n0,1,2\n1,0,3\n"
        with self.assertRaisesMessage(DataFormatError, "row 4"):
            read_epochs_csv(io.StringIO(text), 1000.0)

    def test_bad_value(self):
        text = "epoch,sample,value\n0,0,1\n0,1,abc\n"
        with self.assertRaisesMessage(DataFormatError, "row 3"):
            read_epochs_csv(io.StringIO(text), 1000.0)
