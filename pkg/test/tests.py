import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.getcwd())
sys.path.insert(0, os.path.join(os.getcwd(), "test"))

from euler_cascade import *
from fixtures import *

LN2 = math.log(2)


def setup_function():
    """Before each test"""
    set_debug(False)


# ---- SL(2) algebra

def test_sl2_exp_hyperbolic():
    h = sl2_exp(TraceFreeMatrix(g1=1.0), 1.0)
    assert h.a == pytest.approx(math.cosh(1), abs=1e-15)
    assert h.b == pytest.approx(math.sinh(1), abs=1e-15)
    assert h.c == pytest.approx(math.sinh(1), abs=1e-15)
    assert h.d == pytest.approx(math.cosh(1), abs=1e-15)


def test_sl2_exp_rotation():
    t = 0.7
    h = sl2_exp(TraceFreeMatrix(w=1.0), t)
    expected = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    assert np.max(np.abs(h.as_array() - expected)) < 1e-15


def test_sl2_exp_nilpotent():
    A = TraceFreeMatrix.from_entries(0.0, 1.0, 0.0)
    assert A.as_array().tolist() == [[0.0, 1.0], [0.0, 0.0]]
    assert sl2_exp(A, 2.5) == SL2Matrix(1.0, 2.5, 0.0, 1.0)


def test_sl2_exp_preserves_det():
    rng = np.random.default_rng(1)
    for _ in range(100):
        A = TraceFreeMatrix(*rng.normal(scale=2.0, size=3))
        assert sl2_exp(A).det() == pytest.approx(1.0, abs=1e-12 * math.exp(2 * A.frobenius()))


def test_sl2_exp_matches_series():
    rng = np.random.default_rng(2)
    for _ in range(20):
        A = TraceFreeMatrix(*rng.normal(scale=0.5, size=3))
        X = A.as_array()
        series = np.eye(2)
        term = np.eye(2)
        for k in range(1, 30):
            term = term @ X / k
            series = series + term
        assert np.max(np.abs(sl2_exp(A).as_array() - series)) < 1e-13


def test_sl2_exp_non_finite():
    with pytest.raises(CascadeException, match="non-finite generator"):
        sl2_exp(TraceFreeMatrix(float("nan"), 0.0))


def test_commutator_and_compose():
    rng = np.random.default_rng(3)
    A = TraceFreeMatrix(*rng.normal(size=3))
    B = TraceFreeMatrix(*rng.normal(size=3))
    X, Y = A.as_array(), B.as_array()

    assert np.max(np.abs(A.commutator(B).as_array() - (X @ Y - Y @ X))) < 1e-14
    assert A.commutator(B).trace() == 0

    g, h = sl2_exp(A), sl2_exp(B)
    assert np.max(np.abs((g @ h).as_array() - g.as_array() @ h.as_array())) < 1e-14
    assert np.max(np.abs((g @ g.inverse()).as_array() - np.eye(2))) < 1e-13


def test_trace_free_matrix():
    A = TraceFreeMatrix(g1=0.5, g2=-0.25)
    assert A.as_array().tolist() == [[0.25, 0.5], [0.5, -0.25]]
    assert TraceFreeMatrix.from_array(A.as_array()) == A
    assert (2 * A - A) == A
    assert (A / 2).g1 == 0.25


def test_renormalized():
    h = SL2Matrix(2.0, 1.0, 1.0, 1.5)
    assert h.renormalized().det() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(CascadeException):
        SL2Matrix(0.0, 1.0, 1.0, 0.0).renormalized()


def test_immutable():
    h = SL2Matrix.identity()
    with pytest.raises(AttributeError):
        h.a = 2.0


def test_scale_index():
    assert ScaleIndex(3) == 3
    with pytest.raises(CascadeException):
        ScaleIndex(-1)
    with pytest.raises(CascadeException):
        ScaleIndex(4, J=4)


# ---- Littlewood-Paley

def test_bump_psi():
    assert bump_psi(0.5) == 1.0
    assert bump_psi(1.0) == 1.0
    assert bump_psi(2.0) == 0.0
    assert bump_psi(3.0) == 0.0
    assert bump_psi(1.5) == pytest.approx(0.5, abs=1e-15)

    r = np.linspace(1, 2, 101)
    values = bump_psi(r)
    assert np.all(np.diff(values) <= 0)

    with pytest.raises(CascadeException):
        bump_psi(-0.1)


def test_band_symbol():
    assert band_symbol(1, (2.0, 0.0)) == 1.0
    assert band_symbol(3, (0.0, 0.0)) == 0.0
    assert band_symbol(0, (0.0, 0.0)) == 1.0

    # Support of band j : 2^(j-1) < |xi| < 2^(j+1)
    assert band_symbol(4, (8.0, 0.0)) == 0.0
    assert band_symbol(4, (0.0, 32.0)) == 0.0
    assert band_symbol(4, (10.0, 10.0)) > 0


def test_partition_of_unity():
    J = 6
    grid = Grid2D(np.zeros((256, 256)), 2.0)
    _, _, rho = grid.frequencies()
    inside = rho <= 2 ** (J - 1)
    total = sum(band_symbol(j, rho) for j in range(J + 1))
    assert np.max(np.abs(total[inside] - 1)) <= 1e-14


def test_apply_band_pure_mode():
    # n = 64, L = 2 : Nyquist is 8 ; k = 8 gives |xi| = 2, in the middle of band 1
    f, _ = mode_grid(64, 2.0, 8, 0)

    assert np.max(np.abs(apply_band(f, 1).values - f.values)) < 1e-12
    assert np.max(np.abs(apply_band(f, 0).values)) < 1e-12
    assert np.max(np.abs(apply_band(f, 2).values)) < 1e-12


def test_apply_band_unresolvable():
    f, _ = mode_grid(64, 2.0, 8, 0)
    with pytest.raises(ResolutionException, match="scale unresolvable at this resolution"):
        apply_band(f, 3)


def test_apply_average():
    const = Grid2D(np.full((32, 32), 3.0), 2.0)
    assert np.max(np.abs(apply_average(const, 2).values - 3.0)) < 1e-12

    # Pure mode with |xi| = 2 >= 2^1 is removed by E_1
    f, _ = mode_grid(64, 2.0, 8, 0)
    assert np.max(np.abs(apply_average(f, 1).values)) < 1e-12

    # E_0 is the zero operator
    assert np.max(np.abs(apply_average(const, 0).values)) == 0


def test_average_is_sum_of_bands():
    rng = np.random.default_rng(4)
    f = Grid2D(rng.standard_normal((64, 64)), 2.0)
    for j in range(1, 4):
        total = sum(apply_band(f, k).values for k in range(j))
        assert np.max(np.abs(apply_average(f, j).values - total)) < 1e-10


def test_band_reconstruction():
    rng = np.random.default_rng(5)
    f = random_shell_field(128, 2.0, 0.0, 8.0, rng)
    rebuilt = sum(apply_band(f, j).values for j in range(4))
    assert np.linalg.norm(rebuilt - f.values) / np.linalg.norm(f.values) <= 1e-10


def test_translation_commutes():
    rng = np.random.default_rng(6)
    f = Grid2D(rng.standard_normal((64, 64)), 2.0)
    shifted = f.with_values(np.roll(f.values, (3, -5), axis=(0, 1)))
    for j in range(3):
        expected = np.roll(apply_band(f, j).values, (3, -5), axis=(0, 1))
        assert np.max(np.abs(apply_band(shifted, j).values - expected)) < 1e-12
        expected = np.roll(apply_average(f, j).values, (3, -5), axis=(0, 1))
        assert np.max(np.abs(apply_average(shifted, j).values - expected)) < 1e-12


def test_wide_band():
    f, _ = mode_grid(128, 2.0, 8, 0)
    # sum of P_{j-2} .. P_{j+2} is 1 around 2^j
    assert np.max(np.abs(apply_wide_band(f, 1).values - f.values)) < 1e-12


def test_lp_inequality():
    kappa = lp_inequality_constant(n_fields=20, n=32, seed=0)
    assert 0.9 <= kappa <= 3


def test_gradient_bands_zero():
    spectrum = gradient_bands_from_vorticity(Grid2D(np.zeros((64, 64)), 2.0))
    assert spectrum.grad_norms == [0.0, 0.0, 0.0]
    assert spectrum.N_estimate == 0


def test_gradient_bands_pure_mode():
    # omega = cos(2 pi xi . x) with xi = (2, 0) : d1 u2 = omega, other entries vanish
    f, _ = mode_grid(64, 2.0, 8, 0)
    spectrum = gradient_bands_from_vorticity(f)

    assert spectrum.nyquist_band == 2
    assert spectrum.grad_norms[1] == pytest.approx(1.0, abs=1e-12)
    assert spectrum.grad_norms[0] < 1e-12
    assert spectrum.grad_norms[2] < 1e-12
    assert spectrum.N_estimate == pytest.approx(1.0, abs=1e-11)
    assert spectrum.sup_norm == spectrum.grad_norms[1]

    df = spectrum.to_frame()
    assert list(df.columns) == ["grad_u_sup_norm", "omega_sup_norm"]
    assert df["omega_sup_norm"][1] == pytest.approx(1.0, abs=1e-12)


def test_gradient_bands_mean():
    with pytest.raises(CascadeException, match="vorticity must have zero mean"):
        gradient_bands_from_vorticity(Grid2D(np.ones((32, 32)), 2.0))


def test_band_grad_norms():
    rng = np.random.default_rng(4)
    f = random_shell_field(128, 2.0, 1.5, 6.0, rng)
    full = gradient_bands_from_vorticity(f)

    assert band_grad_norms(f, range(full.nyquist_band + 1)) == pytest.approx(full.grad_norms, abs=1e-15)
    assert band_grad_norms(f, [2]) == pytest.approx([full.grad_norms[2]], abs=1e-15)
    assert band_grad_norms(f, []) == []

    with pytest.raises(ResolutionException, match="band 4"):
        band_grad_norms(f, [1, 4])


def test_band_vorticity_pure_mode():
    # |xi| = 2, band 1 with window E_3 : the window multiplier is 1 on the mode
    f, (xi1, xi2) = mode_grid(256, 2.0, 8, 0)
    quad = build_annulus_quadrature(1)
    band = build_band_vorticity(f, 1, 2, quad)

    expected = np.cos(2 * math.pi * (xi1 * quad.nodes[:, 0] + xi2 * quad.nodes[:, 1]))
    assert np.max(np.abs(band.node_values - expected)) < 1e-6
    assert band.sup_norm >= np.max(np.abs(band.node_values))
    assert len(band.node_values) == len(quad)


def test_band_vorticity_outside_window():
    # |xi| = 4 >= 2^(j + logN + 1) for j = 0, logN = 1
    f, _ = mode_grid(128, 2.0, 16, 0)
    quad = build_annulus_quadrature(0)
    band = build_band_vorticity(f, 0, 1, quad)
    assert np.max(np.abs(band.node_values)) < 1e-8


def test_band_vorticity_zero():
    quad = build_annulus_quadrature(2)
    band = build_band_vorticity(Grid2D(np.zeros((64, 64)), 2.0), 2, 3, quad)
    assert np.all(band.node_values == 0)


def test_band_vorticity_unresolvable():
    f = Grid2D(np.zeros((16, 16)), 2.0)
    with pytest.raises(ResolutionException):
        build_band_vorticity(f, 4, 1, build_annulus_quadrature(4))

    with pytest.raises(CascadeException):
        build_band_vorticity(f, 1, 1, build_annulus_quadrature(2))


def test_band_sampler_reuse():
    f, _ = mode_grid(64, 2.0, 4, 2)
    sampler = BandSampler(f)
    quads = [build_annulus_quadrature(j) for j in range(3)]

    # Windows reaching above the corner frequency are the identity : shared samples
    shared = [build_band_vorticity(f, j, 8, quads[j], sampler) for j in range(3)]
    alone = [build_band_vorticity(f, j, 8, quads[j]) for j in range(3)]
    for a, b in zip(shared, alone):
        assert np.array_equal(a.node_values, b.node_values)


def test_resample_grid():
    coarse, (xi1, xi2) = mode_grid(32, 2.0, 3, 2)
    fine = resample_grid(coarse, 64)
    X1, X2 = fine.coordinates()
    expected = np.cos(2 * math.pi * (xi1 * X1 + xi2 * X2))
    assert np.max(np.abs(fine.values - expected)) < 1e-12
    assert np.max(np.abs(resample_grid(fine, 32).values - coarse.values)) < 1e-12


def test_grid_validation():
    with pytest.raises(CascadeException):
        Grid2D(np.zeros((48, 48)), 2.0)
    with pytest.raises(CascadeException):
        Grid2D(np.full((16, 16), np.nan), 2.0)
    grid = Grid2D(np.zeros((64, 64)), 2.0)
    assert grid.nyquist == 8
    assert grid.corner_frequency == pytest.approx(8 * math.sqrt(2))


# ---- Biot-Savart

def test_kernels():
    assert kernel_K12((1, 1)) == pytest.approx(1 / (4 * math.pi), abs=1e-15)
    assert kernel_K12((1, 0)) == 0
    assert kernel_K12((2, 2)) == pytest.approx(kernel_K12((1, 1)) / 4, abs=1e-16)

    assert kernel_K11((1, 1)) == 0
    assert kernel_K11((1, 0)) == pytest.approx(-1 / (2 * math.pi), abs=1e-15)
    assert kernel_K11((0, 1)) == pytest.approx(1 / (2 * math.pi), abs=1e-15)

    with pytest.raises(CascadeException, match="kernel evaluated at origin"):
        kernel_K11((0, 0))
    with pytest.raises(CascadeException, match="kernel evaluated at origin"):
        kernel_K12((0, 1e-301))


def test_annulus_quadrature():
    for j in (0, 5):
        quad = build_annulus_quadrature(j)
        assert quad.weights.sum() == pytest.approx(3 * math.pi * 4.0 ** -j, rel=1e-12)
        r = np.hypot(quad.nodes[:, 0], quad.nodes[:, 1])
        assert np.all(r >= 2.0 ** -j) and np.all(r < 2.0 ** (1 - j))
        assert np.all(quad.weights > 0)

    quad = build_annulus_quadrature(0)
    assert abs(quad.integrate(quad.nodes[:, 0])) < 1e-14


def test_annulus_quadrature_invalid():
    with pytest.raises(CascadeException):
        build_annulus_quadrature(0, n_r=3)
    with pytest.raises(CascadeException):
        build_annulus_quadrature(0, n_theta=4)
    with pytest.raises(CascadeException):
        build_annulus_quadrature(-1)


def test_quadrupole_oracle():
    values = []
    for j in range(11):
        quad = build_annulus_quadrature(j)
        g = grad_u_model(BandVorticity.from_function(quad, cos2), quad, SL2Matrix.identity())
        assert g.g1 == pytest.approx(-LN2 / 2, abs=1e-8)
        assert abs(g.g2) < 1e-12
        assert g.w == 0
        values.append(g.g1)

    assert max(values) - min(values) <= 1e-10


def test_quadrupole_rotated():
    quad = build_annulus_quadrature(0)
    g = grad_u_model(BandVorticity.from_function(quad, cos2), quad, rotation(math.pi / 4))
    assert abs(g.g1) < 1e-8
    assert g.g2 == pytest.approx(LN2 / 2, abs=1e-8)


def test_radial_band_null():
    for n_theta in (8, 12, 96):
        quad = build_annulus_quadrature(1, n_r=6, n_theta=n_theta)
        band = BandVorticity.from_function(quad, lambda x1, x2: np.exp(-(x1 ** 2 + x2 ** 2)))
        g = grad_u_model(band, quad, SL2Matrix.identity())
        assert g.frobenius() < 1e-12


def test_scale_invariance_deformed():
    h = sl2_exp(TraceFreeMatrix(0.3, -0.2))
    values = []
    for j in range(6):
        quad = build_annulus_quadrature(j)
        band = BandVorticity.from_function(quad, lambda x1, x2: sin2(x1, x2) + 0.3 * cos2(x1, x2))
        g = grad_u_model(band, quad, h)
        values.append((g.g1, g.g2))
    for g1, g2 in values:
        assert g1 == pytest.approx(values[0][0], abs=1e-10)
        assert g2 == pytest.approx(values[0][1], abs=1e-10)


def test_grad_u_linearity():
    rng = np.random.default_rng(7)
    quad = build_annulus_quadrature(2, 8, 16)
    h = sl2_exp(TraceFreeMatrix(0.4, 0.1))
    a = BandVorticity(2, rng.standard_normal(len(quad)))
    b = BandVorticity(2, rng.standard_normal(len(quad)))

    combined = grad_u_model(a.scaled(2.0) + b.scaled(-0.5), quad, h)
    separate = 2.0 * grad_u_model(a, quad, h) - 0.5 * grad_u_model(b, quad, h)
    assert abs(combined.g1 - separate.g1) < 1e-12
    assert abs(combined.g2 - separate.g2) < 1e-12


def test_quadrature_convergence():
    h = SL2Matrix(2.0, 0.0, 0.0, 0.5)

    def strain(n_r, n_theta):
        quad = build_annulus_quadrature(0, n_r, n_theta)
        return grad_u_model(BandVorticity.from_function(quad, cos2), quad, h)

    # The angular integrand has Fourier coefficients decaying like 0.6^k : 64 angular nodes are not enough
    coarse, fine = strain(32, 128), strain(64, 256)
    assert abs(coarse.g1 - fine.g1) < 1e-8
    assert abs(coarse.g2 - fine.g2) < 1e-8


def test_grad_u_errors():
    quad = build_annulus_quadrature(0)
    band = BandVorticity.from_function(quad, cos2)

    with pytest.raises(CascadeException, match="degenerate deformation"):
        grad_u_model(band, quad, SL2Matrix(1e-13, 0.0, 0.0, 1e13))
    with pytest.raises(CascadeException):
        grad_u_model(band, quad, SL2Matrix(2.0, 0.0, 0.0, 1.0))
    with pytest.raises(CascadeException):
        grad_u_model(band, build_annulus_quadrature(1), SL2Matrix.identity())
