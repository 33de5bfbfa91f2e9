# latency/dynamic_preferences_registry.py
"""
Runtime defaults for trace analysis and the barycentre Monte Carlo.
These can be changed from Django Admin without restart; command-line flags
still win over them.
"""

from django.conf import settings
from dynamic_preferences.preferences import Section
from dynamic_preferences.registries import global_preferences_registry
from dynamic_preferences.types import FloatPreference, IntegerPreference

trace_analysis = Section('trace_analysis')
montecarlo = Section('montecarlo')


@global_preferences_registry.register
class ThresholdFraction(FloatPreference):
    """Onset threshold as a fraction of the signal range."""
    section = trace_analysis
    name = 'threshold_fraction'
    default = settings.TRACE_THRESHOLD_FRACTION
    verbose_name = 'Onset threshold fraction'
    help_text = 'Fraction between the signal minimum (0) and maximum (1) a pulse must cross'


@global_preferences_registry.register
class HysteresisFraction(FloatPreference):
    section = trace_analysis
    name = 'hysteresis_fraction'
    default = settings.TRACE_HYSTERESIS_FRACTION
    verbose_name = 'Hysteresis fraction'
    help_text = 'How far below the threshold the signal must fall before the next onset'


@global_preferences_registry.register
class DriftWindow(FloatPreference):
    section = trace_analysis
    name = 'window_ms'
    default = settings.TRACE_DRIFT_WINDOW_MS
    verbose_name = 'Drift window (ms)'
    help_text = 'Width of the moving average subtracted from the photodiode channel'


@global_preferences_registry.register
class MaxLatency(FloatPreference):
    section = trace_analysis
    name = 'max_latency_ms'
    default = settings.TRACE_MAX_LATENCY_MS
    verbose_name = 'Maximum latency (ms)'
    help_text = 'Photodiode onsets later than this after a tag are not paired with it'


@global_preferences_registry.register
class MinSeparation(FloatPreference):
    section = trace_analysis
    name = 'min_separation_ms'
    default = settings.TRACE_MIN_SEPARATION_MS
    verbose_name = 'Minimum onset separation (ms)'


@global_preferences_registry.register
class DefaultTrials(IntegerPreference):
    section = montecarlo
    name = 'n_trials'
    default = settings.MC_DEFAULT_TRIALS
    verbose_name = 'Default trial count'


@global_preferences_registry.register
class BlockTrials(IntegerPreference):
    """Trials per RNG substream; changing it changes the random draws."""
    section = montecarlo
    name = 'block_trials'
    default = settings.MC_BLOCK_TRIALS
    verbose_name = 'Trials per block'
