"""
Experiment configuration : JSON parsing and validation against the parameter registry, and the run report.
"""
import json
from typing import Dict

from .base_utils import ConfigException, debug
from .params import _param_registry, band_half_width, horizon


class ExperimentConfig:
    """
    Validated experiment configuration. Every key of the registry is an attribute, defaults filled.
    Exactly one of field_path (mode=field) or preset (mode=preset) is set.
    """

    def __init__(self, **values):
        registry = _param_registry()
        for key in values:
            registry[key]  # Raises on unknown keys

        for name in registry.names():
            raw = values.get(name, registry[name].default)
            object.__setattr__(self, name, registry[name].check(raw))

        self._check_consistency()

    def _check_consistency(self):
        if self.mode == "field":
            if self.field_path is None:
                raise ConfigException("mode 'field' requires field_path")
            if self.preset is not None:
                raise ConfigException("mode 'field' excludes preset")
            if self.preset_params:
                raise ConfigException("mode 'field' excludes preset_params")
        else:
            if self.preset is None:
                raise ConfigException("mode 'preset' requires preset, one of %s" % ", ".join(_param_registry()["preset"].values))
            if self.field_path is not None:
                raise ConfigException("mode 'preset' excludes field_path")

        if self.grid_n & (self.grid_n - 1) != 0:
            raise ConfigException("grid_n must be a power of two, got %d" % self.grid_n)

    def to_dict(self) -> Dict:
        return {name: getattr(self, name) for name in _param_registry().names()}

    def replace(self, **values):
        """Copy with some values changed, validated again"""
        return ExperimentConfig(**dict(self.to_dict(), **values))

    @property
    def auto_N(self):
        return self.N == "auto"

    def band_window(self, N):
        """logN_bands, explicit or derived from N"""
        if self.logN_bands is not None:
            return self.logN_bands
        return band_half_width(N, self.log_base_bands)

    def horizon(self, N):
        return horizon(self.C, N, self.log_base_horizon)

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return "ExperimentConfig(%s)" % ", ".join("%s=%r" % item for item in self.to_dict().items())


def parse_config(text) -> ExperimentConfig:
    """Parse and validate a JSON configuration. Raises ConfigException"""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf8")
        except UnicodeDecodeError as e:
            raise ConfigException("config is not valid UTF-8 : %s" % e)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigException("syntax error at line %d, column %d : %s" % (e.lineno, e.colno, e.msg))

    if not isinstance(data, dict):
        raise ConfigException("config must be a JSON object")

    debug("Parsed config keys :", list(data.keys()))
    return ExperimentConfig(**data)


def serialize_config(config: ExperimentConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


def read_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as f:
            text = f.read()
    except OSError as e:
        raise ConfigException("cannot read config '%s' : %s" % (path, e.strerror))
    return parse_config(text)


class RunReport:
    """Summary of a run, written as report.json"""

    def __init__(self, config: ExperimentConfig, N, N_estimate, T, t_end, steps, samples, renormalizations,
                 wall_time, final_sigma_max, fits, logN_bands, beyond_horizon=False, band_window=None):
        self.config = config
        self.N = float(N)
        self.N_estimate = None if N_estimate is None else float(N_estimate)
        self.T = float(T)
        self.t_end = float(t_end)
        self.steps = int(steps)
        self.samples = int(samples)
        self.renormalizations = int(renormalizations)
        self.wall_time = float(wall_time)
        self.final_sigma_max = [float(v) for v in final_sigma_max]
        self.fits = fits
        self.logN_bands = int(logN_bands)
        self.beyond_horizon = bool(beyond_horizon)
        self.band_window = dict(band_window or dict())

    def to_dict(self):
        return dict(
            config=self.config.to_dict(),
            N=self.N,
            N_estimate=self.N_estimate,
            T=self.T,
            t_end=self.t_end,
            beyond_horizon=self.beyond_horizon,
            steps=self.steps,
            samples=self.samples,
            logN_bands=self.logN_bands,
            renormalizations=self.renormalizations,
            wall_time=self.wall_time,
            final_sigma_max=self.final_sigma_max,
            fits=[fit.to_dict() for fit in self.fits],
            band_window=self.band_window)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)
