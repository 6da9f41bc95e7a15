# Builders of fields, bands and configurations shared by tests
import json
import math

import numpy as np

from euler_cascade import *


def mode_grid(n, L, k1, k2, phase=0.0):
    """Pure Fourier mode cos(2 pi (xi . x) + phase), xi = (k1, k2) / 2L"""
    grid = Grid2D(np.zeros((n, n)), L)
    X1, X2 = grid.coordinates()
    xi1, xi2 = k1 / (2 * L), k2 / (2 * L)
    return grid.with_values(np.cos(2 * math.pi * (xi1 * X1 + xi2 * X2) + phase)), (xi1, xi2)


def cos2(x1, x2):
    return (x1 ** 2 - x2 ** 2) / (x1 ** 2 + x2 ** 2)


def sin2(x1, x2):
    return 2 * x1 * x2 / (x1 ** 2 + x2 ** 2)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return SL2Matrix(c, -s, s, c)


def quadrupole_model(J, amplitude=1.0, n_r=24, n_theta=96, band_scale=0):
    """Analytic bands : amplitude * cos(2 theta) on A_{band_scale}, zero on other scales"""
    quads = [build_annulus_quadrature(j, n_r, n_theta) for j in range(J)]
    bands = [
        BandVorticity.from_function(q, lambda x1, x2: amplitude * cos2(x1, x2)) if j == band_scale else BandVorticity.zero(q)
        for j, q in enumerate(quads)]
    return bands, quads


def random_model(J, seed=0, n_r=8, n_theta=16, amplitude=1.0):
    """Random node values on every scale"""
    rng = np.random.default_rng(seed)
    quads = [build_annulus_quadrature(j, n_r, n_theta) for j in range(J)]
    bands = [BandVorticity(q.j, amplitude * rng.standard_normal(len(q))) for q in quads]
    return bands, quads


def random_state(J, seed=0, scale=0.3):
    """State of random SL(2) matrices, exponentials of random generators"""
    rng = np.random.default_rng(seed)
    return CascadeState(0.0, [sl2_exp(TraceFreeMatrix(*(scale * rng.standard_normal(3)))) for _ in range(J)])


def frobenius_distance(a: SL2Matrix, b: SL2Matrix):
    return float(np.linalg.norm(a.as_array() - b.as_array()))


def config_text(**values):
    """JSON config of a small radial run, with overrides"""
    base = dict(mode="preset", preset="radial", N=256, J=4, grid_n=64)
    base.update(values)
    return json.dumps(base)
