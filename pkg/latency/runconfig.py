"""Run configuration files.

Flat `key = value` lines, `#` starts a comment, keys are prefixed by their
section:

    screen.refresh_rate_hz = 60
    screen.nominal_timing = true
    matrix.rows = 6
    pipeline.variant = A
    mc.n_stimuli = 12

Every section is validated by its form in latency/forms.py and errors point at
the config line of the offending key.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from django.conf import settings

from .barycentre_mc import McConfig, Sampler
from .display_model import Barycentre, ScreenModel, StimulusMatrix
from .exceptions import ConfigError, RangeError
from .forms import SECTION_FORMS
from .pipeline_model import PipelineConfig, RenderConfig
from .services import get_montecarlo_settings

logger = logging.getLogger(__name__)

DEFAULT_N_STIMULI = 12


@dataclass(frozen=True)
class ConfigEntry:
    value: str
    line: int


@dataclass(frozen=True)
class McSettings:
    n_stimuli: int
    n_trials: int
    photodiode: Barycentre
    sampler: Sampler
    n_values: tuple
    seed: int
    block_trials: int
    workers: int


@dataclass(frozen=True)
class RunConfig:
    screen: ScreenModel | None = None
    matrix: StimulusMatrix | None = None
    pipeline: PipelineConfig | None = None
    mc: McSettings | None = None
    analysis: dict = field(default_factory=dict)
    multipass_threshold_ms: float | None = None
    source: str = ''

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"config has no [{name}] section (keys '{name}.*')")
        return self

    def mc_config(self, seed=None, n_trials=None, block_trials=None, keep_per_trial=False):
        self.require('screen', 'matrix')
        mc = self.mc or default_mc_settings(self.matrix)
        return McConfig(
            matrix=self.matrix,
            screen=self.screen,
            n_stimuli=mc.n_stimuli,
            photodiode_idx=mc.photodiode,
            n_trials=n_trials or mc.n_trials,
            sampler=mc.sampler,
            seed=mc.seed if seed is None else seed,
            keep_per_trial=keep_per_trial,
            block_trials=block_trials or mc.block_trials,
        )

    def threshold_ms(self):
        """Multi-pass / bimodality threshold given by `report.multipass_threshold_ms`, if any."""
        return self.multipass_threshold_ms


def parse_config_text(text):
    """Split config text into {section: {key: ConfigEntry}}."""
    sections = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=line_number)
        key, value = (part.strip() for part in line.split('=', 1))
        section, dot, name = key.partition('.')
        if not dot or not name:
            raise ConfigError(f"key '{key}' needs a section prefix such as 'screen.'", line=line_number)
        if section not in SECTION_FORMS:
            raise ConfigError(
                f"unknown section '{section}' (expected one of {', '.join(SECTION_FORMS)})",
                line=line_number,
            )
        entries = sections.setdefault(section, {})
        if name in entries:
            raise ConfigError(
                f"duplicate key '{key}' (first set on line {entries[name].line})", line=line_number
            )
        entries[name] = ConfigEntry(value, line_number)
    return sections


def _validate_section(section, entries):
    form_class = SECTION_FORMS[section]
    unknown = sorted(set(entries) - set(form_class.base_fields))
    if unknown:
        name = unknown[0]
        raise ConfigError(f"unknown key '{section}.{name}'", line=entries[name].line)
    form = form_class(data={name: entry.value for name, entry in entries.items()})
    if not form.is_valid():
        for name, errors in form.errors.items():
            message = '; '.join(errors)
            if name in entries:
                raise ConfigError(f"{section}.{name}: {message}", line=entries[name].line)
            if name == '__all__':
                raise ConfigError(f"[{section}] {message}")
            raise ConfigError(f"{section}.{name}: missing key ({message})")
    return form.cleaned_data


def _first_line(entries):
    return min((entry.line for entry in entries.values()), default=None)


def default_mc_settings(matrix, **overrides):
    defaults = get_montecarlo_settings()
    values = dict(
        n_stimuli=DEFAULT_N_STIMULI,
        n_trials=defaults['n_trials'],
        photodiode=Barycentre((matrix.rows_I - 1) / 2.0, (matrix.cols_J - 1) / 2.0),
        sampler=Sampler.WITH_REPLACEMENT,
        n_values=(),
        seed=0,
        block_trials=defaults['block_trials'],
        workers=settings.MC_WORKERS,
    )
    values.update({k: v for k, v in overrides.items() if v not in (None, '', ())})
    return McSettings(**values)


def build_run_config(sections, source=''):
    cleaned = {name: _validate_section(name, entries) for name, entries in sections.items()}
    config = RunConfig(source=source)

    if 'screen' in cleaned:
        data = cleaned['screen']
        try:
            if data['nominal_timing']:
                screen = ScreenModel.with_nominal_timing(
                    data['refresh_rate_hz'], data['width_px'], data['height_px'],
                    data['orientation'], data['pixel_response_b_ms'],
                )
                if data['scan_time_a_ms'] is not None:
                    screen = replace(screen, scan_time_a_ms=data['scan_time_a_ms'])
            else:
                screen = ScreenModel(
                    data['refresh_rate_hz'], data['scan_time_a_ms'], data['pixel_response_b_ms'],
                    data['width_px'], data['height_px'], data['orientation'],
                )
        except ConfigError as exc:
            raise ConfigError(f"[screen] {exc}", line=_first_line(sections['screen']))
        config = replace(config, screen=screen)

    if 'matrix' in cleaned:
        data = cleaned['matrix']
        try:
            matrix = StimulusMatrix(
                data['rows'], data['cols'], data['pitch_ui_px'], data['pitch_uj_px'],
                data['margin_mi_px'], data['margin_mj_px'],
            )
            if config.screen is not None:
                matrix.check_fits(config.screen)
        except ConfigError as exc:
            raise ConfigError(f"[matrix] {exc}", line=_first_line(sections['matrix']))
        config = replace(config, matrix=matrix)

    if 'pipeline' in cleaned:
        data = cleaned['pipeline']
        render = RenderConfig(
            fps=data['fps'], vsync=data['vsync'], n_cameras=data['n_cameras'],
            single_pass=data['single_pass'], sor_ms=data['sor_ms'],
        )
        pipeline = PipelineConfig(
            variant=data['variant'], render=render, tag_dispatch=data['tag_dispatch'],
            e_mean_ms=data['e_mean_ms'], e_jitter_sd_ms=data['e_jitter_sd_ms'],
            phase_locked=data['phase_locked'],
        )
        config = replace(config, pipeline=pipeline)

    if 'mc' in cleaned:
        if config.matrix is None:
            raise ConfigError("[mc] needs a [matrix] section", line=_first_line(sections['mc']))
        data = cleaned['mc']
        photodiode = None
        if data['photodiode_i'] is not None or data['photodiode_j'] is not None:
            centre = default_mc_settings(config.matrix).photodiode
            photodiode = Barycentre(
                data['photodiode_i'] if data['photodiode_i'] is not None else centre.i_bar,
                data['photodiode_j'] if data['photodiode_j'] is not None else centre.j_bar,
            )
        mc = default_mc_settings(
            config.matrix,
            n_stimuli=data['n_stimuli'], n_trials=data['n_trials'], photodiode=photodiode,
            sampler=data['sampler'], n_values=data['n_values'], seed=data['seed'],
            block_trials=data['block_trials'], workers=data['workers'],
        )
        config = replace(config, mc=replace(mc, sampler=Sampler(mc.sampler)))
        if config.screen is not None:
            try:
                config.mc_config()
            except (ConfigError, RangeError) as exc:
                raise ConfigError(f"[mc] {exc}", line=_first_line(sections['mc']))

    if 'analysis' in cleaned:
        analysis = {k: v for k, v in cleaned['analysis'].items() if v is not None}
        config = replace(config, analysis=analysis)

    if 'report' in cleaned:
        config = replace(config, multipass_threshold_ms=cleaned['report']['multipass_threshold_ms'])

    logger.debug("[Config] loaded %s with sections %s", source or '<text>', ', '.join(cleaned))
    return config


def parse_run_config(text, source=''):
    return build_run_config(parse_config_text(text), source=source)


def load_run_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}")
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8")
    return parse_run_config(text, source=str(path))
