"""
Smooth dyadic decomposition of gridded fields : the bump psi, the band projections P_j, the averaging
operators E_j, the band vorticities omega_{0,j} and the estimate of N from the band norms of grad u.

Frequencies are in cycles per unit length : on the 2L periodic grid, xi = k / 2L.
"""
import math
from typing import List

import numpy as np
import pandas as pd
from scipy import ndimage

from .base_utils import CascadeException, ResolutionException, debug, error

ZERO_MEAN_TOLERANCE = 1e-12

# Oversampled grids used for node sampling never exceed this number of points per axis
MAX_OVERSAMPLED_POINTS = 2048


def _is_power_of_two(n):
    return n > 0 and (n & (n - 1)) == 0


class Grid2D:
    """
    n x n samples of a 2L periodic field on [-L, L]^2, row major.
    Sample (p, q) is located at x = (-L + 2L p/n, -L + 2L q/n) : axis 0 is x1, axis 1 is x2.
    """

    def __init__(self, values, L=2.0):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise CascadeException("Grid2D expects a square array, got shape %s" % str(values.shape))
        n = values.shape[0]
        if not _is_power_of_two(n):
            raise CascadeException("Grid2D size must be a power of two, got %d" % n)
        if not np.all(np.isfinite(values)):
            raise CascadeException("Grid2D values must be finite")
        if not L > 0:
            raise CascadeException("Grid2D half width L must be positive, got %s" % L)
        self.n = n
        self.L = float(L)
        self.values = values

    @property
    def spacing(self):
        return 2 * self.L / self.n

    @property
    def nyquist(self):
        return self.n / (2 * 2 * self.L)

    @property
    def corner_frequency(self):
        return math.sqrt(2) * self.nyquist

    def coordinates(self):
        """ (X1, X2) arrays of sample positions """
        x = -self.L + self.spacing * np.arange(self.n)
        return np.meshgrid(x, x, indexing="ij")

    def frequencies(self):
        """ (xi1, xi2, |xi|) broadcastable to the rfft2 layout of the values """
        xi1 = np.fft.fftfreq(self.n, d=self.spacing)[:, None]
        xi2 = np.fft.rfftfreq(self.n, d=self.spacing)[None, :]
        return xi1, xi2, np.sqrt(xi1 ** 2 + xi2 ** 2)

    def spectrum(self):
        return np.fft.rfft2(self.values)

    def with_values(self, values):
        return Grid2D(values, self.L)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def __eq__(self, other):
        if not isinstance(other, Grid2D):
            return NotImplemented
        return self.L == other.L and np.array_equal(self.values, other.values)

    def __repr__(self):
        return "Grid2D(n=%d, L=%g)" % (self.n, self.L)


def _q(x):
    return np.exp(-1.0 / x)


def bump_psi(r):
    """
    Radial bump : 1 for r <= 1, 0 for r >= 2 and q(2-r) / (q(2-r) + q(r-1)) in between, with q(x) = exp(-1/x).
    Accepts a scalar or an array.
    """
    scalar = np.ndim(r) == 0
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise CascadeException("bump_psi expects a non negative radius")

    res = np.where(r <= 1, 1.0, 0.0)
    mid = (r > 1) & (r < 2)
    if np.any(mid):
        a = _q(2 - r[mid])
        b = _q(r[mid] - 1)
        res[mid] = a / (a + b)

    return float(res) if scalar else res


def _magnitude(xi):
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim >= 1 and xi.shape[-1] == 2:
        return np.sqrt(xi[..., 0] ** 2 + xi[..., 1] ** 2)
    return np.abs(xi)


def band_multiplier(j, rho):
    """Symbol of P_j as a function of |xi| : psi for j = 0, psi(2^-j xi) - psi(2^(1-j) xi) for j > 0, 0 for j < 0"""
    if j < 0:
        return np.zeros_like(np.asarray(rho, dtype=np.float64))
    if j == 0:
        return bump_psi(rho)
    return bump_psi(math.ldexp(1.0, -j) * rho) - bump_psi(math.ldexp(1.0, 1 - j) * rho)


def average_multiplier(j, rho):
    """Symbol of E_j = sum_{k<j} P_k, telescoped to psi(2^(1-j) xi). E_j is zero for j <= 0"""
    if j <= 0:
        return np.zeros_like(np.asarray(rho, dtype=np.float64))
    return bump_psi(math.ldexp(1.0, 1 - j) * rho)


def window_multiplier(j, logN_bands, rho):
    """Symbol of E_{j+logN} - E_{j-logN}, the band window of omega_{0,j}"""
    return average_multiplier(j + logN_bands, rho) - average_multiplier(j - logN_bands, rho)


def band_symbol(j, xi):
    """
    Value of the Littlewood-Paley multiplier psi_j at frequency xi (a 2-vector, an array of 2-vectors or magnitudes).
    For j >= 1, it is supported on 2^(j-1) < |xi| < 2^(j+1)
    """
    if j < 0:
        raise CascadeException("scale index must be non negative, got %d" % j)
    res = band_multiplier(j, _magnitude(xi))
    return float(res) if np.ndim(res) == 0 else res


def _check_resolved(grid: Grid2D, upper, what):
    if upper > grid.nyquist:
        raise ResolutionException(
            "scale unresolvable at this resolution : %s reaches |xi| = %g above the Nyquist frequency %g of a %d grid" %
            (what, upper, grid.nyquist, grid.n))


def _apply_multiplier(f: Grid2D, multiplier, spectrum=None):
    if spectrum is None:
        spectrum = f.spectrum()
    return np.fft.irfft2(spectrum * multiplier, s=(f.n, f.n))


def apply_band(f: Grid2D, j) -> Grid2D:
    """P_j f, computed in frequency space"""
    _check_resolved(f, math.ldexp(1.0, j + 1), "band %d" % j)
    _, _, rho = f.frequencies()
    return f.with_values(_apply_multiplier(f, band_multiplier(j, rho)))


def apply_average(f: Grid2D, j) -> Grid2D:
    """E_j f = sum_{k<j} P_k f, with symbol psi(2^(1-j) xi). E_j is the zero operator for j <= 0"""
    _check_resolved(f, math.ldexp(1.0, j), "average %d" % j)
    _, _, rho = f.frequencies()
    return f.with_values(_apply_multiplier(f, average_multiplier(j, rho)))


def apply_wide_band(f: Grid2D, j) -> Grid2D:
    """Widened projection sum_{a=-2..2} P_{j+a}"""
    _check_resolved(f, math.ldexp(1.0, j + 3), "wide band %d" % j)
    _, _, rho = f.frequencies()
    multiplier = sum(band_multiplier(j + a, rho) for a in range(-2, 3))
    return f.with_values(_apply_multiplier(f, multiplier))


def nyquist_band(grid: Grid2D):
    """Largest j such that the band P_j is resolved : 2^(j+1) <= Nyquist"""
    j = -1
    while math.ldexp(1.0, j + 2) <= grid.nyquist:
        j += 1
    if j < 0:
        raise ResolutionException("scale unresolvable at this resolution : grid of %d points resolves no band" % grid.n)
    return j


def _gradient_multipliers(grid: Grid2D):
    """
    Multipliers of the entries of grad u from omega (Biot-Savart law through composed Riesz transforms) :

        [[d1 u1, d2 u1], [d1 u2, d2 u2]] = [[-xi1 xi2, -xi2^2], [xi1^2, xi1 xi2]] / |xi|^2  applied to omega

    Only three are returned since d2 u2 = -d1 u1. They vanish at xi = 0.
    """
    xi1, xi2, rho = grid.frequencies()
    rho2 = rho ** 2
    rho2[0, 0] = 1.0
    m11 = -xi1 * xi2 / rho2
    m12 = -(xi2 ** 2) / rho2 * np.ones_like(xi1)
    m21 = (xi1 ** 2) / rho2 * np.ones_like(xi2)
    for m in (m11, m12, m21):
        m[0, 0] = 0.0
    return m11, m12, m21


class BandSpectrum:
    """
    Per band sup norms ||P_j grad u||_inf (max entry norm) and ||P_j omega||_inf for j = 0..nyquist_band,
    with N_estimate, their sum, the size of grad u seen by the model.
    """

    def __init__(self, grad_norms, omega_norms, tail_norm=0.0):
        self.grad_norms = [float(v) for v in grad_norms]
        self.omega_norms = [float(v) for v in omega_norms]
        self.tail_norm = float(tail_norm)
        self.N_estimate = float(sum(self.grad_norms))

    @property
    def nyquist_band(self):
        return len(self.grad_norms) - 1

    @property
    def sup_norm(self):
        """ sup_j ||P_j grad u||, of order 1 for normalized fields """
        return max(self.grad_norms) if self.grad_norms else 0.0

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(dict(
            grad_u_sup_norm=self.grad_norms,
            omega_sup_norm=self.omega_norms))
        df.index.name = "j"
        return df

    def __repr__(self):
        return "BandSpectrum(N_estimate=%g, sup=%g, bands=%d)" % (self.N_estimate, self.sup_norm, len(self.grad_norms))


def band_grad_norms(omega: Grid2D, bands, spectrum=None) -> List[float]:
    """
    ||P_j grad u||_inf for each j of 'bands', from a single FFT of omega.
    No zero mean check : use gradient_bands_from_vorticity() for the full spectrum.
    """
    bands = list(bands)
    for j in bands:
        _check_resolved(omega, math.ldexp(1.0, j + 1), "band %d" % j)
    if spectrum is None:
        spectrum = omega.spectrum()
    _, _, rho = omega.frequencies()
    multipliers = _gradient_multipliers(omega)

    res = []
    for j in bands:
        band = band_multiplier(j, rho)
        res.append(max(float(np.max(np.abs(_apply_multiplier(omega, m * band, spectrum)))) for m in multipliers))
    return res


def gradient_bands_from_vorticity(omega: Grid2D) -> BandSpectrum:
    """Band norms of grad u, computed spectrally from a zero mean vorticity field"""
    mean = float(np.mean(omega.values))
    if abs(mean) > ZERO_MEAN_TOLERANCE:
        raise CascadeException("vorticity must have zero mean (mean is %g)" % mean)

    spectrum = omega.spectrum()
    _, _, rho = omega.frequencies()
    multipliers = _gradient_multipliers(omega)

    def sup_of(multiplier):
        return float(np.max(np.abs(_apply_multiplier(omega, multiplier, spectrum))))

    top = nyquist_band(omega)
    grad_norms = band_grad_norms(omega, range(top + 1), spectrum=spectrum)
    omega_norms = [sup_of(band_multiplier(j, rho)) for j in range(top + 1)]

    tail = 1.0 - average_multiplier(top + 1, rho)
    tail_norm = max(sup_of(m * tail) for m in multipliers)

    res = BandSpectrum(grad_norms, omega_norms, tail_norm)
    if res.N_estimate > 0 and tail_norm > 0.01 * res.N_estimate:
        error("Warning : grad u content above the last resolved band (%g) exceeds 1%% of N_estimate (%g)" %
              (tail_norm, res.N_estimate))
    debug("Band spectrum :", res)
    return res


class BandVorticity:
    """
    omega_{0,j} : the band window (E_{j+logN} - E_{j-logN}) omega restricted to the annulus A_j,
    sampled at the nodes of the annulus quadrature of scale j.
    """

    def __init__(self, j, node_values, sup_norm=None):
        self.j = int(j)
        self.node_values = np.asarray(node_values, dtype=np.float64)
        node_sup = float(np.max(np.abs(self.node_values))) if self.node_values.size else 0.0
        self.sup_norm = node_sup if sup_norm is None else max(float(sup_norm), node_sup)

    @staticmethod
    def from_function(quad, func):
        """Band of scale quad.j with values func(x1, x2) at the quadrature nodes"""
        values = func(quad.nodes[:, 0], quad.nodes[:, 1])
        return BandVorticity(quad.j, np.broadcast_to(np.asarray(values, dtype=np.float64), (len(quad.nodes),)))

    @staticmethod
    def zero(quad):
        return BandVorticity(quad.j, np.zeros(len(quad.nodes)))

    def scaled(self, factor):
        return BandVorticity(self.j, self.node_values * factor, self.sup_norm * abs(factor))

    def __add__(self, other):
        if other.j != self.j or len(other.node_values) != len(self.node_values):
            raise CascadeException("cannot add bands of different scales or resolutions")
        return BandVorticity(self.j, self.node_values + other.node_values)

    def __repr__(self):
        return "BandVorticity(j=%d, nodes=%d, sup=%g)" % (self.j, len(self.node_values), self.sup_norm)


def _zero_pad(spectrum, n, factor):
    """Spectral oversampling : rfft2 layout of a n grid to real values on a (factor n) grid. Nyquist bins are dropped"""
    if factor == 1:
        return np.fft.irfft2(spectrum, s=(n, n))
    big = n * factor
    half = n // 2
    padded = np.zeros((big, big // 2 + 1), dtype=np.complex128)
    padded[:half, :half] = spectrum[:half, :half]
    padded[big - half + 1:, :half] = spectrum[half + 1:, :half]
    return np.fft.irfft2(padded, s=(big, big)) * factor * factor


class BandSampler:
    """
    Samples band windows of a vorticity field at arbitrary points : the windowed spectrum is oversampled by
    zero padding, then interpolated with periodic splines of order interp_order (1 is bilinear).
    The oversampled field of the identity window is cached.
    """

    def __init__(self, omega: Grid2D, oversample=4, interp_order=3, max_points=MAX_OVERSAMPLED_POINTS):
        if oversample < 1 or interp_order not in range(1, 6):
            raise CascadeException("invalid sampler settings : oversample=%s, interp_order=%s" % (oversample, interp_order))
        self.omega = omega
        self.factor = max(1, min(int(oversample), max_points // omega.n))
        self.interp_order = interp_order
        self.spectrum = omega.spectrum()
        self.rho = omega.frequencies()[2]
        self._identity = None

    @property
    def points(self):
        return self.omega.n * self.factor

    @property
    def spacing(self):
        return 2 * self.omega.L / self.points

    def windowed(self, multiplier):
        """Oversampled values of the field filtered by multiplier"""
        if np.all(multiplier == 1.0):
            if self._identity is None:
                self._identity = _zero_pad(self.spectrum, self.omega.n, self.factor)
            return self._identity
        return _zero_pad(self.spectrum * multiplier, self.omega.n, self.factor)

    def interpolate(self, field, nodes):
        L = self.omega.L
        scale = self.points / (2 * L)
        coords = np.vstack([(nodes[:, 0] + L) * scale, (nodes[:, 1] + L) * scale])
        return ndimage.map_coordinates(field, coords, order=self.interp_order, mode="grid-wrap")

    def annulus_sup(self, field, inner, outer):
        """Max of |field| over the oversampled grid points lying in inner <= |x| < outer"""
        L = self.omega.L
        h = self.spacing
        center = self.points // 2
        half = min(center, int(math.ceil(outer / h)) + 1)
        x = h * np.arange(-half, half)
        r = np.sqrt(x[:, None] ** 2 + x[None, :] ** 2)
        box = field[center - half:center + half, center - half:center + half]
        mask = (r >= inner) & (r < outer)
        return float(np.max(np.abs(box[mask]))) if np.any(mask) else 0.0


def build_band_vorticity(omega: Grid2D, j, logN_bands, quad, sampler: BandSampler = None, **sampler_args) -> BandVorticity:
    """
    omega_{0,j} = chi_{A_j} (E_{j+logN} - E_{j-logN}) omega, sampled at the nodes of quad (all inside A_j).
    E with non positive index is the zero operator.
    """
    if quad.j != j:
        raise CascadeException("quadrature of scale %d used for band %d" % (quad.j, j))
    if logN_bands < 0:
        raise CascadeException("band window half width must be non negative, got %d" % logN_bands)

    lower = math.ldexp(1.0, j - logN_bands - 1)
    if lower >= omega.nyquist:
        raise ResolutionException(
            "scale unresolvable at this resolution : window of band %d starts at |xi| = %g, above the Nyquist frequency %g" %
            (j, lower, omega.nyquist))

    if sampler is None:
        sampler = BandSampler(omega, **sampler_args)

    if math.ldexp(1.0, -j) < omega.spacing:
        debug("Annulus A_%d is thinner than the grid spacing %g" % (j, omega.spacing))

    multiplier = window_multiplier(j, logN_bands, sampler.rho)
    field = sampler.windowed(multiplier)
    values = sampler.interpolate(field, quad.nodes)
    sup = sampler.annulus_sup(field, quad.inner, quad.outer)

    return BandVorticity(j, values, sup)


def resample_grid(grid: Grid2D, n) -> Grid2D:
    """Spectral resampling to n points per axis (zero padding or truncation). Nyquist bins are dropped"""
    if not _is_power_of_two(n):
        raise CascadeException("Grid2D size must be a power of two, got %d" % n)
    if n == grid.n:
        return grid
    spectrum = grid.spectrum()
    if n > grid.n:
        return grid.with_values(_zero_pad(spectrum, grid.n, n // grid.n))

    half = n // 2
    small = np.zeros((n, half + 1), dtype=np.complex128)
    small[:half, :half] = spectrum[:half, :half]
    small[half + 1:, :half] = spectrum[grid.n - half + 1:, :half]
    ratio = n / grid.n
    return grid.with_values(np.fft.irfft2(small, s=(n, n)) * ratio * ratio)


def random_shell_field(n, L, low, high, rng, smooth=False) -> Grid2D:
    """
    Real random field whose spectrum lives in the shell low <= |xi| <= high (white noise filtered in Fourier space).
    With smooth=True, the shell indicator is replaced by a smooth bump of the same support.
    """
    grid = Grid2D(np.zeros((n, n)), L)
    _, _, rho = grid.frequencies()
    if smooth:
        center = (low + high) / 2
        width = (high - low) / 2
        mask = bump_psi(np.abs(rho - center) / width * 2)
    else:
        mask = ((rho >= low) & (rho <= high)).astype(np.float64)
    noise = rng.standard_normal((n, n))
    return grid.with_values(np.fft.irfft2(np.fft.rfft2(noise) * mask, s=(n, n)))


def lp_inequality_constant(n_fields=100, n=64, L=2.0, seed=0) -> float:
    """
    Measured constant kappa of the cheap Littlewood-Paley inequality ||P_j f|| <= kappa ||f||, ||E_j f|| <= kappa ||f||
    over random band limited fields, for every resolved band
    """
    rng = np.random.default_rng(seed)
    reference = Grid2D(np.zeros((n, n)), L)
    top = nyquist_band(reference)
    kappa = 0.0
    for _ in range(n_fields):
        f = random_shell_field(n, L, 0.0, math.ldexp(1.0, top), rng)
        norm = f.sup_norm()
        if norm == 0:
            continue
        for j in range(top + 1):
            kappa = max(kappa, apply_band(f, j).sup_norm() / norm)
            kappa = max(kappa, apply_average(f, j + 1).sup_norm() / norm)
    return kappa
