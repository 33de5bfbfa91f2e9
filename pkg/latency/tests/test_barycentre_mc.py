from django.test import SimpleTestCase

from latency.barycentre_mc import McConfig, Sampler, dist_curve, run_mc, scan_axis_distance
from latency.display_model import Barycentre, GridIndex, Orientation, scan_axis_factor
from latency.exceptions import ConfigError, RangeError

from .factories import make_matrix, make_screen

CENTRE = Barycentre(2.5, 2.5)


def make_config(n_stimuli=12, photodiode=CENTRE, **kwargs):
    kwargs.setdefault('seed', 2024)
    return McConfig(make_matrix(), kwargs.pop('screen', make_screen()), n_stimuli, photodiode, **kwargs)


class MonteCarloTests(SimpleTestCase):
    def test_exhaustive_draw_has_no_spread(self):
        result = run_mc(make_config(36, sampler=Sampler.WITHOUT_REPLACEMENT, n_trials=500))
        self.assertEqual(result.mean_row_dist, 0.0)
        self.assertEqual(result.sd_row_dist, 0.0)
        self.assertEqual(result.sd_row_signed, 0.0)
        self.assertEqual(result.sd_latency_ms, 0.0)

    def test_four_times_more_stimuli_halves_the_spread(self):
        small = run_mc(make_config(12))
        large = run_mc(make_config(48))
        ratio = small.sd_row_signed / large.sd_row_signed
        self.assertAlmostEqual(ratio, 2.0, delta=0.2)

    def test_photodiode_at_the_grid_centre(self):
        # folded normal: sqrt(35 / 12 / 12) * sqrt(2 / pi)
        result = run_mc(make_config(12))
        self.assertAlmostEqual(result.mean_row_dist, 0.39, delta=0.02)
        self.assertAlmostEqual(result.mean_col_dist, 0.39, delta=0.02)

    def test_photodiode_on_a_cell(self):
        result = run_mc(make_config(12, GridIndex(2, 2)))
        self.assertGreaterEqual(result.mean_row_dist, 0.50)
        self.assertLessEqual(result.mean_row_dist, 0.62)

    def test_single_stimulus(self):
        result = run_mc(make_config(1, GridIndex(2, 2)))
        self.assertAlmostEqual(result.mean_row_dist, 1.5, delta=0.05)

    def test_latency_follows_the_scan_axis(self):
        screen = make_screen()
        result = run_mc(make_config(12, screen=screen))
        factor = scan_axis_factor(make_matrix(), screen)
        self.assertAlmostEqual(result.mean_latency_ms, result.mean_row_dist * factor, places=9)

    def test_turned_screen_measures_columns(self):
        screen = make_screen(orientation=Orientation.TURNED_90)
        result = run_mc(make_config(12, GridIndex(0, 0), screen=screen))
        self.assertEqual(scan_axis_distance(result, screen), (result.mean_col_dist, result.sd_col_dist))
        self.assertAlmostEqual(result.mean_latency_ms,
                               result.mean_col_dist * scan_axis_factor(make_matrix(), screen), places=9)

    def test_same_seed_same_result(self):
        self.assertEqual(run_mc(make_config(12)), run_mc(make_config(12)))

    def test_worker_count_does_not_change_the_result(self):
        config = make_config(12, n_trials=3001, block_trials=100)
        serial = run_mc(config, workers=1)
        parallel = run_mc(config, workers=4)
        self.assertEqual(serial.as_summary(), parallel.as_summary())
        self.assertEqual(serial.mean_row_signed, parallel.mean_row_signed)

    def test_other_seed_other_draws(self):
        self.assertNotEqual(run_mc(make_config(12, seed=1)).mean_row_dist,
                            run_mc(make_config(12, seed=2)).mean_row_dist)

    def test_per_trial_barycentres(self):
        result = run_mc(make_config(12, n_trials=300, keep_per_trial=True))
        self.assertEqual(len(result.per_trial), 300)
        self.assertIsNone(run_mc(make_config(12, n_trials=300)).per_trial)

    def test_curve_falls_with_more_stimuli(self):
        points = dist_curve(make_config(1, n_trials=4000), [1, 4, 16, 36])
        means = [p.mean_dist for p in points]
        self.assertEqual([p.n for p in points], [1, 4, 16, 36])
        self.assertEqual(means, sorted(means, reverse=True))

    def test_invalid_configurations(self):
        with self.assertRaises(ConfigError):
            make_config(37, sampler=Sampler.WITHOUT_REPLACEMENT)
        with self.assertRaises(ConfigError):
            make_config(0)
        with self.assertRaises(ConfigError):
            make_config(12, seed=2 ** 64)
        with self.assertRaises(RangeError):
            make_config(12, Barycentre(6.0, 1.0))
