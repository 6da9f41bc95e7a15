#
# Multiscale SL(2) model of the growth of 2D Euler solutions
#

from .base_utils import *
from .core_types import *
from .littlewood_paley import *
from .biot_savart import *
from .diagnostics import *
from .cascade import *
from .config import *
from .presets import *
from .io import *
from .experiment import *

# Parameter definitions are module level symbols (N, J, C ..) : only the API is exported
from .params import ParamDef, ParamType, list_parameters, horizon, band_half_width, \
    newFloatParam, newIntParam, newBoolParam, newEnumParam, newStrParam
