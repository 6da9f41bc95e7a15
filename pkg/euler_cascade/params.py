import math
from typing import Dict, List

import numpy as np
import sympy
from sympy import Symbol, lambdify
from tabulate import tabulate

from .base_utils import ConfigException, _isnumber

DEFAULT_PARAM_GROUP = "model"


class ParamType:
    """Type of parameters"""

    ENUM = "enum"
    """ One value among a fixed list """

    BOOL = "bool"
    """ Boolean parameter """

    FLOAT = "float"
    """Float parameter """

    INT = "int"
    """Integer parameter """

    STR = "str"
    """ Free text, paths """

    DICT = "dict"
    """ Free key / value mapping (preset parameters) """


class ParamDef(Symbol):
    '''Definition of a configuration parameter, with name, type, default and range.

    This class inherits sympy Symbol, so that parameters can be combined in symbolic expressions
    (see #HORIZON), evaluated later for any value of the parameters.
    '''

    def __new__(cls, name, *karg, **kargs):
        return Symbol.__new__(cls, name)

    def __init__(self, name, type: str, default, min=None, max=None, min_exclusive=False, unit="", description="",
                 group=None, values=None, nullable=False, special=None, **kwargs):

        self.name = name
        self.type = type
        self.default = default
        self.min = min
        self.max = max
        self.min_exclusive = min_exclusive
        self.unit = unit
        self.description = description
        self.group = group or DEFAULT_PARAM_GROUP
        self.values = values
        self.nullable = nullable

        # Extra string values accepted for a numeric parameter, like "auto"
        self.special = special or []

    def range_str(self):
        if self.type == ParamType.ENUM:
            return "one of %s" % ", ".join(str(v) for v in self.values)
        if self.min is not None and self.max is not None:
            return "%s%s, %s]" % ("(" if self.min_exclusive else "[", self.min, self.max)
        if self.min is not None:
            return ("> %s" if self.min_exclusive else ">= %s") % self.min
        return ""

    def _check_range(self, value):
        if self.min is not None:
            if self.min_exclusive and not value > self.min:
                if self.max is None:
                    raise ConfigException("%s must exceed %s" % (self.name, self.min))
                raise ConfigException("%s must be in %s, got %s" % (self.name, self.range_str(), value))
            if not self.min_exclusive and value < self.min:
                raise ConfigException("%s must be in %s, got %s" % (self.name, self.range_str(), value))
        if self.max is not None and value > self.max:
            raise ConfigException("%s must be in %s, got %s" % (self.name, self.range_str(), value))

    def check(self, value):
        """Validate a raw value (as read from JSON) and return its normalized form. Raises ConfigException"""

        if value is None:
            if self.nullable:
                return None
            raise ConfigException("%s is mandatory" % self.name)

        if isinstance(value, str) and value in self.special:
            return value

        if self.type == ParamType.FLOAT:
            if not _isnumber(value) or not math.isfinite(value):
                raise ConfigException("%s must be a number%s, got %r" % (
                    self.name, "" if not self.special else " or %s" % "/".join('"%s"' % s for s in self.special), value))
            value = float(value)
            self._check_range(value)
            return value

        if self.type == ParamType.INT:
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise ConfigException("%s must be an integer, got %r" % (self.name, value))
            value = int(value)
            self._check_range(value)
            return value

        if self.type == ParamType.BOOL:
            if not isinstance(value, bool):
                raise ConfigException("%s must be true or false, got %r" % (self.name, value))
            return value

        if self.type == ParamType.ENUM:
            value = str(value)
            if value not in self.values:
                raise ConfigException("%s must be %s, got %r" % (self.name, self.range_str(), value))
            return value

        if self.type == ParamType.STR:
            if not isinstance(value, str):
                raise ConfigException("%s must be a string, got %r" % (self.name, value))
            return value

        if self.type == ParamType.DICT:
            if not isinstance(value, dict):
                raise ConfigException("%s must be an object, got %r" % (self.name, value))
            return dict(value)

        raise ConfigException("Unknown type %s for param %s" % (self.type, self.name))

    def __hash__(self):
        return hash(self.name)

    def __eq__(self, other):
        if isinstance(other, ParamDef):
            return self.name == other.name
        else:
            return Symbol.__eq__(self, other)

    def __repr__(self):
        return self.name


class ParamRegistry:
    """Ordered registry of the parameters of an experiment"""

    def __init__(self):
        self.params = dict()

    def __setitem__(self, key, param):
        self.params[key] = param

    def __getitem__(self, key):
        if not key in self.params:
            raise ConfigException("unknown key '%s'. Valid keys are : %s" % (key, ", ".join(self.params.keys())))
        return self.params[key]

    def __contains__(self, key):
        return key in self.params

    def names(self) -> List[str]:
        return list(self.params.keys())

    def all(self) -> List[ParamDef]:
        return list(self.params.values())

    def defaults(self) -> Dict:
        return {name: param.default for name, param in self.params.items()}


_registry = ParamRegistry()


def _param_registry():
    return _registry


def newParamDef(name, type, **kwargs):
    """
        Creates a parameter and register it into the global registry.

        Parameters
        ----------

        type : Type of the parameter (From ParamType)
        other arguments : Refer to the documentation of ParamDef
    """
    param = ParamDef(name, type=type, **kwargs)
    _param_registry()[name] = param
    return param


def newFloatParam(name, default, **kwargs):
    return newParamDef(name, ParamType.FLOAT, default=default, **kwargs)


def newIntParam(name, default, **kwargs):
    return newParamDef(name, ParamType.INT, default=default, **kwargs)


def newBoolParam(name, default, **kwargs):
    return newParamDef(name, ParamType.BOOL, default=default, **kwargs)


def newEnumParam(name, values, default, **kwargs):
    return newParamDef(name, ParamType.ENUM, default=default, values=values, **kwargs)


def newStrParam(name, default=None, **kwargs):
    return newParamDef(name, ParamType.STR, default=default, nullable=True, **kwargs)


PRESETS = ["radial", "quadrupole", "odd_odd", "random_bands"]

mode = newEnumParam("mode", ["field", "preset"], "preset", group="input",
                    description="Source of the initial vorticity")
field_path = newStrParam("field_path", group="input",
                         description="Grid2D file of the vorticity (mode=field)")
preset = newEnumParam("preset", PRESETS, None, nullable=True, group="input",
                      description="Name of the preset vorticity (mode=preset)")
preset_params = newParamDef("preset_params", ParamType.DICT, default=dict(), group="input",
                            description="Parameters of the preset")
grid_n = newIntParam("grid_n", 256, min=16, max=8192, group="input",
                     description="Points per axis of the preset grid (power of two)")
L = newFloatParam("L", 2.0, min=1.0, min_exclusive=True, max=64.0, unit="length", group="input",
                  description="Half width of the periodic box [-L, L]^2")

N = newFloatParam("N", "auto", min=1.0, min_exclusive=True, special=["auto"], unit="1/time",
                  description="Scale of sum_j ||P_j grad u|| ; 'auto' uses the estimate from the field")
J = newIntParam("J", 6, min=1, max=16, description="Number of dyadic scales")
C = newFloatParam("C", 0.09, min=0.0, min_exclusive=True, max=10.0,
                  description="Horizon factor : T = C log(N) / N")
tau = newFloatParam("tau", 0.01, min=0.0, min_exclusive=True, max=1.0,
                    description="Step factor : dt = tau / N")
logN_bands = newIntParam("logN_bands", None, min=0, max=64, nullable=True,
                         description="Half width of the band window ; derived from N when unset")
log_base_bands = newEnumParam("log_base_bands", ["2", "e"], "2",
                              description="Base of the logarithm giving logN_bands from N")
log_base_horizon = newEnumParam("log_base_horizon", ["e", "2"], "e",
                                description="Base of the logarithm of the horizon")

n_r = newIntParam("n_r", 24, min=4, max=1024, group="numerics", description="Radial Gauss-Legendre nodes")
n_theta = newIntParam("n_theta", 96, min=8, max=4096, group="numerics", description="Angular nodes")
oversample = newIntParam("oversample", 4, min=1, max=16, group="numerics",
                         description="Spectral oversampling factor used for node sampling")
interp_order = newIntParam("interp_order", 3, min=1, max=5, group="numerics",
                           description="Spline order of node interpolation (1 is bilinear)")
seed = newIntParam("seed", 0, min=0, max=2 ** 32 - 1, group="numerics", description="Seed of random presets")

sample_interval = newIntParam("sample_interval", 1, min=1, max=10 ** 9, group="output",
                              description="Record a sample every this number of steps")
t_end = newFloatParam("t_end", None, min=0.0, min_exclusive=True, nullable=True, unit="time", group="output",
                      description="End time ; defaults to the horizon T")
out_dir = newStrParam("out_dir", group="output", description="Output directory")


# Time horizon of the model, as a symbolic expression of the parameters
HORIZON = {
    "e": C * sympy.log(N) / N,
    "2": C * sympy.log(N, 2) / N}

_horizon_funcs = {base: lambdify([C, N], expr, "numpy") for base, expr in HORIZON.items()}


def horizon(C, N, base="e"):
    """T = C log(N) / N. Vectorized over numpy arrays of C and N"""
    if base not in _horizon_funcs:
        raise ConfigException("log base must be 'e' or '2', got %r" % base)
    res = _horizon_funcs[base](C, N)
    return float(res) if np.ndim(res) == 0 else np.asarray(res, dtype=float)


def band_half_width(N, base="2"):
    """Default logN_bands : ceil(log N), at least 1"""
    value = math.log2(N) if str(base) == "2" else math.log(N)
    return max(1, int(math.ceil(value - 1e-12)))


def check_param(name, value):
    """Validate a single value against the registry"""
    return _param_registry()[name].check(value)


def list_parameters():
    """ Return a pretty table of all configuration parameters """
    params = [dict(
        group=param.group,
        name=param.name,
        type=param.type,
        default=param.default,
        range=param.range_str(),
        unit=param.unit,
        description=param.description) for param in _param_registry().all()]

    groups = sorted({p["group"] for p in params})

    # Keep declaration order inside each group
    sorted_params = sorted(params, key=lambda p: groups.index(p["group"]))

    return tabulate(sorted_params, headers="keys")
