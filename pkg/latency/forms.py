"""Validation of run-configuration sections.

Each `section.` of a config file is bound to one form; the field names are the
keys after the section prefix.
"""

from django import forms
from django.core.exceptions import ValidationError

from .barycentre_mc import Sampler
from .display_model import Orientation
from .pipeline_model import PipelineVariant, TagDispatch

TRUE_WORDS = {'true', 'yes', 'on', '1'}
FALSE_WORDS = {'false', 'no', 'off', '0'}


def positive(value):
    if value is not None and not value > 0:
        raise ValidationError("must be > 0")


class FlagField(forms.Field):
    """Boolean written as true/false, yes/no, on/off or 1/0."""

    def __init__(self, *, default=False, **kwargs):
        kwargs.setdefault('required', False)
        self.default = default
        super().__init__(**kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return self.default
        if isinstance(value, bool):
            return value
        word = str(value).strip().lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
        raise ValidationError(f"'{value}' is not a boolean (use true or false)")


class ScreenForm(forms.Form):
    refresh_rate_hz = forms.FloatField(validators=[positive])
    scan_time_a_ms = forms.FloatField(required=False, validators=[positive])
    pixel_response_b_ms = forms.FloatField(required=False, min_value=0)
    width_px = forms.IntegerField(min_value=1)
    height_px = forms.IntegerField(min_value=1)
    orientation = forms.ChoiceField(choices=Orientation.choices, required=False)
    nominal_timing = FlagField()

    def clean_orientation(self):
        return self.cleaned_data['orientation'] or Orientation.NORMAL

    def clean(self):
        cleaned = super().clean()
        if not cleaned.get('nominal_timing'):
            for name in ('scan_time_a_ms', 'pixel_response_b_ms'):
                if name not in self.errors and cleaned.get(name) is None:
                    self.add_error(name, "required unless nominal_timing = true")
        return cleaned


class MatrixForm(forms.Form):
    rows = forms.IntegerField(min_value=1)
    cols = forms.IntegerField(min_value=1)
    pitch_ui_px = forms.FloatField(validators=[positive])
    pitch_uj_px = forms.FloatField(validators=[positive])
    margin_mi_px = forms.FloatField(required=False, min_value=0)
    margin_mj_px = forms.FloatField(required=False, min_value=0)

    def clean(self):
        cleaned = super().clean()
        for name in ('margin_mi_px', 'margin_mj_px'):
            if cleaned.get(name) is None and name not in self.errors:
                cleaned[name] = 0.0
        return cleaned


class PipelineForm(forms.Form):
    variant = forms.ChoiceField(choices=PipelineVariant.choices)
    tag_dispatch = forms.ChoiceField(choices=TagDispatch.choices, required=False)
    e_mean_ms = forms.FloatField(required=False, min_value=0)
    e_jitter_sd_ms = forms.FloatField(required=False, min_value=0)
    phase_locked = FlagField()
    fps = forms.FloatField(validators=[positive])
    vsync = FlagField(default=True)
    n_cameras = forms.IntegerField(required=False, min_value=1)
    single_pass = FlagField()
    sor_ms = forms.FloatField(required=False, min_value=0)

    def clean(self):
        cleaned = super().clean()
        defaults = {
            'tag_dispatch': TagDispatch.SYNCHRONOUS,
            'e_mean_ms': 0.0,
            'e_jitter_sd_ms': 0.0,
            'n_cameras': 1,
            'sor_ms': 0.0,
        }
        for name, default in defaults.items():
            if cleaned.get(name) in (None, '') and name not in self.errors:
                cleaned[name] = default
        return cleaned


class MonteCarloForm(forms.Form):
    n_stimuli = forms.IntegerField(required=False, min_value=1)
    n_trials = forms.IntegerField(required=False, min_value=1)
    photodiode_i = forms.FloatField(required=False, min_value=0)
    photodiode_j = forms.FloatField(required=False, min_value=0)
    sampler = forms.ChoiceField(choices=Sampler.choices, required=False)
    n_values = forms.CharField(required=False)
    seed = forms.IntegerField(required=False, min_value=0, max_value=2 ** 64 - 1)
    block_trials = forms.IntegerField(required=False, min_value=1)
    workers = forms.IntegerField(required=False, min_value=1)

    def clean_n_values(self):
        text = self.cleaned_data['n_values'].strip()
        if not text:
            return ()
        try:
            values = tuple(int(part) for part in text.split(','))
        except ValueError:
            raise ValidationError("must be a comma-separated list of integers")
        if any(v < 1 for v in values):
            raise ValidationError("every count must be >= 1")
        return values


class AnalysisForm(forms.Form):
    sample_rate_hz = forms.FloatField(required=False, validators=[positive])
    threshold_fraction = forms.FloatField(required=False, min_value=0, max_value=1)
    hysteresis_fraction = forms.FloatField(required=False, min_value=0, max_value=1)
    window_ms = forms.FloatField(required=False, validators=[positive])
    max_latency_ms = forms.FloatField(required=False, validators=[positive])
    min_separation_ms = forms.FloatField(required=False, min_value=0)


class ReportForm(forms.Form):
    multipass_threshold_ms = forms.FloatField(required=False, validators=[positive])


SECTION_FORMS = {
    'screen': ScreenForm,
    'matrix': MatrixForm,
    'pipeline': PipelineForm,
    'mc': MonteCarloForm,
    'analysis': AnalysisForm,
    'report': ReportForm,
}
