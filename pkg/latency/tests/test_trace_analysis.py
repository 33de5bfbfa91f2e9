from itertools import accumulate

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from latency.exceptions import EmptyInputError, ParameterError
from latency.trace_analysis import (
    analyze_trace, detect_onsets, estimate_latency, pair_events, remove_drift, split_two_means,
    synthesize_trace,
)

EVENT_TIMES = [500.0 + 1000.0 * k for k in range(100)]
onset_lists = st.lists(st.integers(0, 5000), unique=True, max_size=30).map(sorted)


class ClosedLoopTests(SimpleTestCase):
    def check_recovery(self, mean_ms, sd_ms, seed):
        recording = synthesize_trace(EVENT_TIMES, mean_ms, sd_ms, 1000.0, seed=seed)
        estimate = analyze_trace(recording).estimate
        injected = np.asarray(recording.injected_latencies_ms)
        self.assertEqual(estimate.n_events, 100)
        self.assertAlmostEqual(estimate.mean_ms, mean_ms, delta=1.5)
        self.assertAlmostEqual(estimate.sd_ms, sd_ms, delta=1.5)
        self.assertAlmostEqual(estimate.mean_ms, injected.mean(), delta=0.5)

    def test_recovers_short_latency(self):
        self.check_recovery(38.0, 5.3, seed=11)

    def test_recovers_long_latency(self):
        self.check_recovery(117.0, 5.8, seed=12)

    def test_recovers_latency_under_noise_and_drift(self):
        recording = synthesize_trace(EVENT_TIMES[:40], 38.0, 2.0, 1000.0, noise_sd=0.03,
                                     drift_amplitude=2.0, seed=5)
        analysis = analyze_trace(recording)
        self.assertEqual(analysis.estimate.n_events, 40)
        self.assertAlmostEqual(analysis.estimate.mean_ms,
                               np.mean(recording.injected_latencies_ms), delta=1.0)
        self.assertEqual(analysis.warnings, [])


class BimodalityTests(SimpleTestCase):
    def test_two_appearances_are_flagged(self):
        rng = np.random.default_rng(4)
        latencies = np.where(np.arange(100) % 2 == 0, 117.0, 143.0) + rng.normal(0.0, 2.0, 100)
        recording = synthesize_trace(EVENT_TIMES, 0.0, 0.0, 1000.0, latencies_ms=latencies)
        analysis = analyze_trace(recording, multipass_threshold_ms=20.0)
        self.assertTrue(analysis.split.bimodal)
        self.assertAlmostEqual(analysis.lofap_ms, 117.0, delta=1.5)
        self.assertTrue(any('bimodal' in note for note in analysis.warnings))

    def test_single_appearance_is_not_flagged(self):
        recording = synthesize_trace(EVENT_TIMES, 38.0, 5.3, 1000.0, seed=1)
        analysis = analyze_trace(recording, multipass_threshold_ms=20.0)
        self.assertFalse(analysis.split.bimodal)
        self.assertIsNone(analysis.lofap_ms)

    def test_two_means_split(self):
        split = split_two_means([1.0, 10.0, 1.0, 10.0, 1.0], threshold_ms=5.0)
        self.assertEqual((split.low_mean_ms, split.high_mean_ms), (1.0, 10.0))
        self.assertEqual((split.n_low, split.n_high), (3, 2))
        self.assertTrue(split.bimodal)

    def test_single_latency_is_unimodal(self):
        self.assertFalse(split_two_means([40.0], threshold_ms=5.0).bimodal)


def pulse_train(starts, n=2000, width=20):
    signal = np.zeros(n)
    for s in starts:
        signal[s:s + width] = 1.0
    return signal


# first onset, then gaps wider than the default minimum separation
starts = st.tuples(st.integers(1, 200), st.lists(st.integers(150, 300), max_size=5)).map(
    lambda t: list(accumulate([t[0], *t[1]]))
)


class OnsetTests(SimpleTestCase):
    def test_onsets_of_pulse_train(self):
        self.assertEqual(detect_onsets(pulse_train([100, 400, 900])), [100, 400, 900])

    def test_flat_signal_has_no_onsets(self):
        self.assertEqual(detect_onsets(np.ones(500)), [])

    def test_close_onsets_are_merged(self):
        self.assertEqual(detect_onsets(pulse_train([100, 150], width=10), min_separation_ms=100.0),
                         [100])

    def test_threshold_must_be_a_fraction(self):
        with self.assertRaises(ParameterError):
            detect_onsets(pulse_train([100]), threshold_fraction=1.0)

    @given(starts, st.floats(0.5, 100.0), st.floats(-100.0, 100.0))
    @settings(max_examples=50, deadline=None)
    def test_invariant_under_positive_affine_maps(self, onsets, scale, offset):
        signal = pulse_train(onsets)
        self.assertEqual(detect_onsets(scale * signal + offset), detect_onsets(signal))


class DriftTests(SimpleTestCase):
    def test_constant_signal_is_removed(self):
        np.testing.assert_allclose(remove_drift(np.full(1000, 3.0), 1000.0), 0.0, atol=1e-12)

    @given(st.integers(0, 2 ** 32 - 1), st.floats(-5.0, 5.0))
    @settings(max_examples=25, deadline=None)
    def test_linear(self, seed, alpha):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=(2, 1500))
        np.testing.assert_allclose(
            remove_drift(x + alpha * y, 1000.0),
            remove_drift(x, 1000.0) + alpha * remove_drift(y, 1000.0),
            atol=1e-9,
        )

    def test_window_longer_than_recording(self):
        with self.assertRaises(ParameterError):
            remove_drift(np.zeros(100), 1000.0, window_ms=500.0)

    def test_step_peaks_at_the_edge(self):
        step = np.zeros(3000)
        step[1500:] = 1.0
        self.assertLessEqual(abs(int(np.argmax(remove_drift(step, 1000.0))) - 1500), 1)

    def test_ramp_interior_is_flat(self):
        ramp = 0.01 * np.arange(3000)
        residual = remove_drift(ramp, 1000.0)
        np.testing.assert_allclose(residual[501:-501], 0.0, atol=1e-8)


class PairingTests(SimpleTestCase):
    def test_pairs_each_tag_with_next_photodiode_onset(self):
        result = pair_events([100, 1100, 2100], [140, 1145, 2500])
        self.assertEqual([tuple(p) for p in result.pairs], [(100, 140), (1100, 1145)])
        self.assertEqual(result.unpaired_tags, (2100,))
        self.assertEqual(result.unpaired_photos, (2500,))
        self.assertEqual(len(result.warnings), 2)

    def test_photodiode_before_tag_is_unpaired(self):
        result = pair_events([100], [50, 130])
        self.assertEqual(result.unpaired_photos, (50,))
        self.assertEqual(len(result.pairs), 1)

    def test_onsets_must_increase(self):
        with self.assertRaises(ParameterError):
            pair_events([200, 100], [])

    @given(onset_lists, onset_lists, st.floats(min_value=1.0, max_value=300.0))
    def test_paired_latencies_are_positive_and_bounded(self, tags, photos, max_latency_ms):
        result = pair_events(tags, photos, max_latency_ms, 1000.0)
        for tag, photo in result.pairs:
            self.assertGreater(photo - tag, 0)
            self.assertLessEqual(photo - tag, max_latency_ms)
        self.assertEqual(len(result.pairs) + len(result.unpaired_tags), len(tags))

    def test_no_pairs(self):
        with self.assertRaises(EmptyInputError):
            estimate_latency([], 1000.0)

    def test_estimate_in_milliseconds(self):
        estimate = estimate_latency([(0, 20), (1000, 1040)], 2000.0)
        self.assertEqual(estimate.per_event_ms, (10.0, 20.0))
        self.assertEqual(estimate.mean_ms, 15.0)


class SynthesisTests(SimpleTestCase):
    def test_overlapping_events_are_rejected(self):
        with self.assertRaises(ParameterError):
            synthesize_trace([100.0, 120.0], 38.0, 1.0, 1000.0)

    def test_negative_spread_or_rate_is_rejected(self):
        for kwargs in ({'latency_sd_ms': -1.0}, {'sample_rate_hz': -1000.0},
                       {'noise_sd': -0.1}):
            args = {'latency_sd_ms': 1.0, 'sample_rate_hz': 1000.0, **kwargs}
            with self.subTest(**kwargs), self.assertRaises(ParameterError):
                synthesize_trace(EVENT_TIMES[:3], 38.0, **args)

    def test_same_seed_same_trace(self):
        a = synthesize_trace(EVENT_TIMES[:5], 38.0, 5.0, 1000.0, noise_sd=0.1, seed=3)
        b = synthesize_trace(EVENT_TIMES[:5], 38.0, 5.0, 1000.0, noise_sd=0.1, seed=3)
        np.testing.assert_array_equal(a.photo, b.photo)
        self.assertEqual(a.injected_latencies_ms, b.injected_latencies_ms)
