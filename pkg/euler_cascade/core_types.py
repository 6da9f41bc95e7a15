"""
Matrix algebra of the cascade : SL(2) states, trace-free generators and the closed form exponential
used by the Lie group integrator.
"""
import math

import numpy as np

from .base_utils import CascadeException, _isfinite

# Below this value of |mu^2|, sl2_exp uses the near-nilpotent expansion
NILPOTENT_CUTOFF = 1e-14


class SL2Matrix:
    """
    2x2 real matrix [[a, b], [c, d]] expected to have unit determinant. Houses the per-scale unknown h_j.
    Instances are immutable : operations return new matrices.
    """
    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        object.__setattr__(self, "a", float(a))
        object.__setattr__(self, "b", float(b))
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "d", float(d))

    def __setattr__(self, key, value):
        raise AttributeError("SL2Matrix is immutable")

    @staticmethod
    def identity():
        return SL2Matrix(1.0, 0.0, 0.0, 1.0)

    @staticmethod
    def from_array(arr):
        arr = np.asarray(arr, float)
        return SL2Matrix(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    def det(self):
        return self.a * self.d - self.b * self.c

    def det_drift(self):
        return abs(self.det() - 1.0)

    def is_finite(self):
        return _isfinite(self.a, self.b, self.c, self.d)

    def inverse(self):
        det = self.det()
        return SL2Matrix(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def renormalized(self):
        """Divide by sqrt(det) to project back on SL(2)"""
        det = self.det()
        if not det > 0:
            raise CascadeException("cannot renormalize a matrix with determinant %g" % det)
        s = math.sqrt(det)
        return SL2Matrix(self.a / s, self.b / s, self.c / s, self.d / s)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def as_array(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    def frobenius(self):
        return math.sqrt(self.a ** 2 + self.b ** 2 + self.c ** 2 + self.d ** 2)

    def __matmul__(self, other):
        return sl2_compose(self, other)

    def __eq__(self, other):
        if isinstance(other, SL2Matrix):
            return self.entries() == other.entries()
        return NotImplemented

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return "SL2Matrix([[%r, %r], [%r, %r]])" % self.entries()


class TraceFreeMatrix:
    """
    Element of the Lie algebra sl(2), realized as [[-g2, g1 - w], [g1 + w, g2]].

    (g1, g2) is the symmetric strain part : the model strain matrix (grad u)_{j,h} has exactly this shape,
    with w = 0. The rotation part w only appears through commutators inside the integrator.
    The trace is zero by construction : the (2,2) entry is never stored.
    """
    __slots__ = ("g1", "g2", "w")

    def __init__(self, g1=0.0, g2=0.0, w=0.0):
        object.__setattr__(self, "g1", float(g1))
        object.__setattr__(self, "g2", float(g2))
        object.__setattr__(self, "w", float(w))

    def __setattr__(self, key, value):
        raise AttributeError("TraceFreeMatrix is immutable")

    @staticmethod
    def zero():
        return TraceFreeMatrix(0.0, 0.0, 0.0)

    @staticmethod
    def from_entries(x00, x01, x10):
        """Build from the (1,1), (1,2) and (2,1) entries. The (2,2) entry is -x00"""
        return TraceFreeMatrix((x01 + x10) / 2, -x00, (x10 - x01) / 2)

    @staticmethod
    def from_array(arr):
        arr = np.asarray(arr, float)
        return TraceFreeMatrix.from_entries(arr[0, 0], arr[0, 1], arr[1, 0])

    def entries(self):
        """ (x00, x01, x10, x11) """
        return (-self.g2, self.g1 - self.w, self.g1 + self.w, self.g2)

    def as_array(self):
        x00, x01, x10, x11 = self.entries()
        return np.array([[x00, x01], [x10, x11]])

    def det(self):
        x00, x01, x10, x11 = self.entries()
        return x00 * x11 - x01 * x10

    def trace(self):
        return 0.0

    def frobenius(self):
        x00, x01, x10, x11 = self.entries()
        return math.sqrt(x00 ** 2 + x01 ** 2 + x10 ** 2 + x11 ** 2)

    def is_finite(self):
        return _isfinite(self.g1, self.g2, self.w)

    def commutator(self, other):
        """[self, other] = self.other - other.self, again trace free"""
        a, b, c, _ = self.entries()
        e, f, g, _ = other.entries()
        return TraceFreeMatrix.from_entries(b * g - f * c, 2 * (a * f - b * e), 2 * (c * e - a * g))

    def __add__(self, other):
        return TraceFreeMatrix(self.g1 + other.g1, self.g2 + other.g2, self.w + other.w)

    def __sub__(self, other):
        return TraceFreeMatrix(self.g1 - other.g1, self.g2 - other.g2, self.w - other.w)

    def __neg__(self):
        return TraceFreeMatrix(-self.g1, -self.g2, -self.w)

    def __mul__(self, scalar):
        return TraceFreeMatrix(self.g1 * scalar, self.g2 * scalar, self.w * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TraceFreeMatrix(self.g1 / scalar, self.g2 / scalar, self.w / scalar)

    def __eq__(self, other):
        if isinstance(other, TraceFreeMatrix):
            return (self.g1, self.g2, self.w) == (other.g1, other.g2, other.w)
        return NotImplemented

    def __hash__(self):
        return hash((self.g1, self.g2, self.w))

    def __repr__(self):
        if self.w == 0:
            return "TraceFreeMatrix(g1=%r, g2=%r)" % (self.g1, self.g2)
        return "TraceFreeMatrix(g1=%r, g2=%r, w=%r)" % (self.g1, self.g2, self.w)


def sl2_exp(A: TraceFreeMatrix, t=1.0) -> SL2Matrix:
    """
    Exact exponential exp(tA) of a trace free matrix, by Cayley-Hamilton : A^2 = mu^2 I with mu^2 = -det(A).

        mu^2 > 0 : cosh(mu t) I + sinh(mu t)/mu A
        mu^2 < 0 : cos(nu t) I + sin(nu t)/nu A, with nu = sqrt(-mu^2)
        mu^2 ~ 0 : (1 + mu^2 t^2/2) I + t (1 + mu^2 t^2/6) A
    """
    if not (A.is_finite() and _isfinite(t)):
        raise CascadeException("non-finite generator")

    mu2 = -A.det()

    if abs(mu2) < NILPOTENT_CUTOFF:
        c0 = 1.0 + mu2 * t * t / 2
        c1 = t * (1.0 + mu2 * t * t / 6)
    elif mu2 > 0:
        mu = math.sqrt(mu2)
        try:
            c0 = math.cosh(mu * t)
            c1 = math.sinh(mu * t) / mu
        except OverflowError:
            raise CascadeException("exponential overflow : |mu t| = %g" % (mu * abs(t)))
    else:
        nu = math.sqrt(-mu2)
        c0 = math.cos(nu * t)
        c1 = math.sin(nu * t) / nu

    x00, x01, x10, x11 = A.entries()
    return SL2Matrix(c0 + c1 * x00, c1 * x01, c1 * x10, c0 + c1 * x11)


def sl2_compose(A: SL2Matrix, B: SL2Matrix) -> SL2Matrix:
    """Matrix product A.B"""
    return SL2Matrix(
        A.a * B.a + A.b * B.c,
        A.a * B.b + A.b * B.d,
        A.c * B.a + A.d * B.c,
        A.c * B.b + A.d * B.d)


class ScaleIndex(int):
    """Dyadic scale j >= 0 : the annulus A_j has radius ~ 2^-j"""

    def __new__(cls, j, J=None):
        j = int(j)
        if j < 0:
            raise CascadeException("scale index must be non negative, got %d" % j)
        if J is not None and j >= J:
            raise CascadeException("scale index %d out of range [0, %d)" % (j, J))
        return int.__new__(cls, j)
