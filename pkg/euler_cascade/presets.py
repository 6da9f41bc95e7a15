"""
Initial vorticity presets, supported in the unit disk, with zero mean.

By default, presets are normalized so that sup_j ||P_j grad u|| = 1. random_bands calibrates each band separately.
"""
import math

import numpy as np

from .base_utils import ConfigException, ResolutionException, debug, error
from .littlewood_paley import Grid2D, band_grad_norms, bump_psi, gradient_bands_from_vorticity, random_shell_field

# Relative half width of the random shells around |xi| = 2^j
SHELL_WIDTH = 0.05

CALIBRATION_PASSES = 4


def _beta(x):
    """Smooth bump exp(-1/(1-x^2)) supported in |x| < 1, with value 1/e at 0"""
    x = np.asarray(x, dtype=np.float64)
    res = np.zeros_like(x)
    inside = np.abs(x) < 1
    res[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return res


def _polar(grid: Grid2D):
    X1, X2 = grid.coordinates()
    r = np.hypot(X1, X2)
    safe = np.where(r > 0, r, 1.0)
    cos2 = np.where(r > 0, (X1 ** 2 - X2 ** 2) / safe ** 2, 0.0)
    return X1, X2, r, cos2


def _smooth_plateau(r, inner, outer, taper):
    """1 on [inner, outer], 0 outside [inner - taper, outer + taper], smooth in between"""
    rise = bump_psi(np.maximum(1 + (inner - r) / taper, 0))
    fall = bump_psi(np.maximum(1 + (r - outer) / taper, 0))
    return rise * fall


def _radial(grid, core=0.45, ring_center=0.7, ring_width=0.2):
    _, _, r, _ = _polar(grid)
    core_values = _beta(r / core)
    ring_values = _beta((r - ring_center) / ring_width)
    if ring_center + ring_width > 1 or core > 1:
        raise ConfigException("radial preset must be supported in the unit disk : core <= 1, ring_center + ring_width <= 1")

    # Compensating ring
    alpha = core_values.sum() / ring_values.sum()
    return core_values - alpha * ring_values


def _quadrupole(grid, profile="bump", center=0.5, width=0.4, inner=0.25, outer=0.5, taper=0.1):
    _, _, r, cos2 = _polar(grid)
    if profile == "bump":
        if center + width > 1:
            raise ConfigException("quadrupole preset must be supported in the unit disk : center + width <= 1")
        f = _beta((r - center) / width)
    elif profile == "plateau":
        if outer + taper > 1 or inner - taper < 0:
            raise ConfigException("quadrupole plateau must lie in the unit disk : inner - taper >= 0, outer + taper <= 1")
        f = _smooth_plateau(r, inner, outer, taper)
    else:
        raise ConfigException("quadrupole profile must be 'bump' or 'plateau', got %r" % profile)
    return f * cos2


def _odd_odd(grid, k=2, radius=0.9):
    X1, X2, r, _ = _polar(grid)
    if radius > 1:
        raise ConfigException("odd_odd preset must be supported in the unit disk : radius <= 1")
    return np.sin(2 * math.pi * k * X1) * np.sin(2 * math.pi * k * X2) * _beta(r / radius)


def _random_bands(grid, J=6, seed=0, radius=0.95):
    top = math.ldexp(1.0, J)
    if top > grid.nyquist:
        raise ResolutionException("grid too coarse for J=%d : n=%d resolves |xi| up to %g, %g needed" % (
            J, grid.n, grid.nyquist, top))

    rng = np.random.default_rng(seed)
    window = _beta(_polar(grid)[2] / radius)

    components = []
    for j in range(J):
        center = math.ldexp(1.0, j)
        field = random_shell_field(grid.n, grid.L, center * (1 - SHELL_WIDTH), center * (1 + SHELL_WIDTH), rng)
        values = field.values * window
        values -= values.mean()
        norm, = band_grad_norms(grid.with_values(values), [j])
        components.append(values / norm)

    # Cross band leakage of the window : rescale each component by its band norm in the sum
    amplitudes = np.ones(J)
    for _ in range(CALIBRATION_PASSES):
        total = sum(a * c for a, c in zip(amplitudes, components))
        norms = band_grad_norms(grid.with_values(total), range(J))
        amplitudes = amplitudes / np.asarray(norms)

    values = sum(a * c for a, c in zip(amplitudes, components))
    norms = band_grad_norms(grid.with_values(values), range(J))
    if any(not 0.5 <= norm <= 2 for norm in norms):
        error("Warning : random_bands calibration off : band norms %s" % norms)
    debug("random_bands amplitudes", amplitudes)
    return values


_PRESETS = dict(
    radial=_radial,
    quadrupole=_quadrupole,
    odd_odd=_odd_odd,
    random_bands=_random_bands)

# Preset parameters, with their defaults
PRESET_PARAMS = dict(
    radial=dict(core=0.45, ring_center=0.7, ring_width=0.2, normalize=True),
    quadrupole=dict(profile="bump", center=0.5, width=0.4, inner=0.25, outer=0.5, taper=0.1, normalize=True),
    odd_odd=dict(k=2, radius=0.9, normalize=True),
    random_bands=dict(J=6, seed=0, radius=0.95))


def preset_vorticity(name, params=None, n=256, L=2.0) -> Grid2D:
    """Vorticity preset 'name' sampled on a n x n grid of [-L, L]^2"""
    if name not in _PRESETS:
        raise ConfigException("unknown preset '%s'. Valid presets are : %s" % (name, ", ".join(_PRESETS)))

    params = dict(params or dict())
    unknown = set(params) - set(PRESET_PARAMS[name])
    if unknown:
        raise ConfigException("unknown parameters %s for preset '%s'. Valid parameters are : %s" % (
            ", ".join(sorted(unknown)), name, ", ".join(PRESET_PARAMS[name])))

    args = dict(PRESET_PARAMS[name], **params)
    normalize = args.pop("normalize", False)

    grid = Grid2D(np.zeros((n, n)), L)
    values = _PRESETS[name](grid, **args)
    values = values - values.mean()
    res = grid.with_values(values)

    if normalize:
        sup = gradient_bands_from_vorticity(res).sup_norm
        if sup > 0:
            res = res.with_values(values / sup)

    return res
