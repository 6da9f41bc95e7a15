"""
Non singular part of the Biot-Savart kernels and the model strain (grad u)_{j,h} : integral over the dyadic annulus
A_j of the band vorticity against K(h.s).
"""
import math

import numpy as np
from scipy import special

from .base_utils import CascadeException, _isfinite
from .core_types import SL2Matrix, TraceFreeMatrix, ScaleIndex
from .littlewood_paley import BandVorticity

ORIGIN_TOLERANCE = 1e-300
DEGENERATE_TOLERANCE = 1e-12
DET_TOLERANCE = 1e-6

DEFAULT_N_R = 24
DEFAULT_N_THETA = 96


def _check_point(x1, x2):
    if math.hypot(x1, x2) < ORIGIN_TOLERANCE:
        raise CascadeException("kernel evaluated at origin")


def kernel_K12(x) -> float:
    """K12(x) = x1 x2 / (pi |x|^4)"""
    x1, x2 = float(x[0]), float(x[1])
    _check_point(x1, x2)
    r2 = x1 * x1 + x2 * x2
    return x1 * x2 / (math.pi * r2 * r2)


def kernel_K11(x) -> float:
    """K11(x) = (x2^2 - x1^2) / (2 pi |x|^4)"""
    x1, x2 = float(x[0]), float(x[1])
    _check_point(x1, x2)
    r2 = x1 * x1 + x2 * x2
    return (x2 * x2 - x1 * x1) / (2 * math.pi * r2 * r2)


def _kernels(x1, x2):
    """Vectorized (K11, K12) over arrays of points away from the origin"""
    r2 = x1 * x1 + x2 * x2
    r4 = r2 * r2
    return (x2 * x2 - x1 * x1) / (2 * math.pi * r4), x1 * x2 / (math.pi * r4)


class AnnulusQuadrature:
    """
    Tensor rule on A_j = {2^-j <= |x| < 2^(1-j)} : Gauss-Legendre in r, uniform trapezoid in theta (theta_k = 2 pi k / n_theta).
    Weights include the Jacobian r and sum to the area 3 pi 4^-j.

    The rule of scale j is the rule of scale 0 scaled by powers of two, hence exactly self similar.
    """

    def __init__(self, j, nodes, weights, n_r, n_theta):
        self.j = ScaleIndex(j)
        self.nodes = nodes
        self.weights = weights
        self.n_r = n_r
        self.n_theta = n_theta

    @property
    def inner(self):
        return math.ldexp(1.0, -self.j)

    @property
    def outer(self):
        return math.ldexp(1.0, 1 - self.j)

    @property
    def area(self):
        return 3 * math.pi * math.ldexp(1.0, -2 * self.j)

    def integrate(self, values):
        """Integral over A_j of a function given by its node values"""
        return float(np.dot(self.weights, values))

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return "AnnulusQuadrature(j=%d, n_r=%d, n_theta=%d)" % (self.j, self.n_r, self.n_theta)


def build_annulus_quadrature(j, n_r=DEFAULT_N_R, n_theta=DEFAULT_N_THETA) -> AnnulusQuadrature:
    j = ScaleIndex(j)
    if not (isinstance(n_r, int) and isinstance(n_theta, int)) or n_r < 4 or n_theta < 8:
        raise CascadeException("invalid quadrature resolution n_r=%s, n_theta=%s (need n_r >= 4, n_theta >= 8)" % (n_r, n_theta))

    # Unit annulus 1 <= r < 2
    x, w = special.roots_legendre(n_r)
    r = 1.5 + 0.5 * x
    w_r = 0.5 * w * r
    theta = 2 * math.pi * np.arange(n_theta) / n_theta

    R, T = np.meshgrid(r, theta, indexing="ij")
    W = np.repeat(w_r[:, None], n_theta, axis=1) * (2 * math.pi / n_theta)

    scale = math.ldexp(1.0, -j)
    nodes = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()]) * scale
    weights = W.ravel() * (scale * scale)

    return AnnulusQuadrature(j, nodes, weights, n_r, n_theta)


def grad_u_model(band: BandVorticity, quad: AnnulusQuadrature, h: SL2Matrix) -> TraceFreeMatrix:
    """
    Model strain (grad u)_{j,h} = [[-g2, g1], [g1, g2]] with
        g1 = int_{A_j} omega_{0,j}(s) K11(h.s) ds
        g2 = int_{A_j} omega_{0,j}(s) K12(h.s) ds

    The local part of the Riesz kernels is dropped : the result is pure strain (w = 0).
    """
    if band.j != quad.j or len(band.node_values) != len(quad.weights):
        raise CascadeException("band of scale %d does not match quadrature of scale %d" % (band.j, quad.j))
    if not h.is_finite():
        raise CascadeException("non-finite deformation %s" % repr(h))
    if h.det_drift() > DET_TOLERANCE:
        raise CascadeException("deformation is not in SL(2) : det = %g" % h.det())

    s1 = quad.nodes[:, 0]
    s2 = quad.nodes[:, 1]
    y1 = h.a * s1 + h.b * s2
    y2 = h.c * s1 + h.d * s2

    min_norm = float(np.min(np.hypot(y1, y2)))
    if min_norm < DEGENERATE_TOLERANCE:
        raise CascadeException("degenerate deformation : |h.s| = %g on A_%d" % (min_norm, quad.j))

    k11, k12 = _kernels(y1, y2)
    weighted = quad.weights * band.node_values
    g1 = float(np.dot(weighted, k11))
    g2 = float(np.dot(weighted, k12))

    if not _isfinite(g1, g2):
        raise CascadeException("non-finite strain on A_%d" % quad.j)

    return TraceFreeMatrix(g1, g2)
