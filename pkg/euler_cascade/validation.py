"""
Oracle suites run by 'euler-cascade validate'. Each suite returns a list of Check, compared against closed forms
(computed symbolically with sympy where possible).
"""
import math
import time

import numpy as np
import pandas as pd
import sympy
from scipy import linalg, stats

from .base_utils import CascadeException, debug
from .biot_savart import build_annulus_quadrature, grad_u_model, kernel_K11, kernel_K12
from .cascade import CascadeState, ModelParams, build_model, run, step_rkmk4
from .core_types import SL2Matrix
from .diagnostics import fit_growth, growth_metrics, doubleexp_fit, gronwall_harness
from .littlewood_paley import BandVorticity, Grid2D, apply_band, band_symbol, nyquist_band, random_shell_field
from .presets import preset_vorticity


class Check:
    def __init__(self, suite, name, passed, value=None, expected=None, tolerance=None):
        self.suite = suite
        self.name = name
        self.passed = bool(passed)
        self.value = value
        self.expected = expected
        self.tolerance = tolerance

    def to_dict(self):
        return dict(suite=self.suite, check=self.name, passed=self.passed,
                    value=self.value, expected=self.expected, tolerance=self.tolerance)


def _close(suite, name, value, expected, tolerance):
    return Check(suite, name, abs(value - expected) <= tolerance, value, expected, tolerance)


def quadrupole_pattern(x1, x2):
    """cos(2 theta)"""
    return (x1 ** 2 - x2 ** 2) / (x1 ** 2 + x2 ** 2)


def rotation(angle):
    c, s = math.cos(angle), math.sin(angle)
    return SL2Matrix(c, -s, s, c)


def quadrupole_strain():
    """ g1 = int_{1 <= r < 2} cos(2 theta) K11 ds = -ln(2)/2, computed symbolically """
    r, theta = sympy.symbols("r theta", positive=True)
    K11 = -sympy.cos(2 * theta) / (2 * sympy.pi * r ** 2)
    res = sympy.integrate(sympy.integrate(sympy.cos(2 * theta) * K11 * r, (theta, 0, 2 * sympy.pi)), (r, 1, 2))
    return float(res)


def constant_generator_solution(g1, g2, t):
    """exp(t [[-g2, g1], [g1, g2]]), by Pade approximation"""
    return linalg.expm(t * np.array([[-g2, g1], [g1, g2]]))


def kernel_suite(n_r=24, n_theta=96, max_j=10):
    suite = "kernels"
    res = [
        _close(suite, "K12(1,1)", kernel_K12((1, 1)), 1 / (4 * math.pi), 1e-15),
        _close(suite, "K11(1,0)", kernel_K11((1, 0)), -1 / (2 * math.pi), 1e-15),
        _close(suite, "K11(0,1)", kernel_K11((0, 1)), 1 / (2 * math.pi), 1e-15)]

    expected = quadrupole_strain()
    values = []
    for j in range(max_j + 1):
        quad = build_annulus_quadrature(j, n_r, n_theta)
        res.append(_close(suite, "area A_%d" % j, quad.weights.sum(), quad.area, 1e-12 * quad.area))
        band = BandVorticity.from_function(quad, quadrupole_pattern)
        g = grad_u_model(band, quad, SL2Matrix.identity())
        values.append((g.g1, g.g2))
        res.append(_close(suite, "quadrupole g1 on A_%d" % j, g.g1, expected, 1e-8))
        res.append(_close(suite, "quadrupole g2 on A_%d" % j, g.g2, 0.0, 1e-12))

    g1s = [v[0] for v in values]
    res.append(_close(suite, "scale invariance", max(g1s) - min(g1s), 0.0, 1e-10))

    quad = build_annulus_quadrature(0, n_r, n_theta)
    g = grad_u_model(BandVorticity.from_function(quad, quadrupole_pattern), quad, rotation(math.pi / 4))
    res.append(_close(suite, "rotated quadrupole g1", g.g1, 0.0, 1e-8))
    res.append(_close(suite, "rotated quadrupole g2", g.g2, -expected, 1e-8))

    radial = BandVorticity.from_function(quad, lambda x1, x2: np.exp(-(x1 ** 2 + x2 ** 2)))
    g = grad_u_model(radial, quad, SL2Matrix.identity())
    res.append(_close(suite, "radial band", g.frobenius(), 0.0, 1e-12))
    return res


def partition_suite(n=128, L=2.0, seed=0):
    suite = "partition of unity"
    grid = Grid2D(np.zeros((n, n)), L)
    _, _, rho = grid.frequencies()
    top = nyquist_band(grid)

    # Frequencies up to the Nyquist band : |xi| <= 2^(top+1)
    J = top + 2
    inside = rho <= math.ldexp(1.0, J - 1)
    total = sum(band_symbol(j, rho) for j in range(J + 1))
    res = [_close(suite, "sum of band symbols", float(np.max(np.abs(total[inside] - 1))), 0.0, 1e-14)]

    rng = np.random.default_rng(seed)
    f = random_shell_field(n, L, 0.0, math.ldexp(1.0, top), rng)
    rebuilt = sum(apply_band(f, j).values for j in range(top + 1))
    error = float(np.linalg.norm(rebuilt - f.values) / np.linalg.norm(f.values))
    res.append(_close(suite, "band reconstruction", error, 0.0, 1e-10))
    return res


def _quadrupole_model(J, amplitude=1.0, n_r=24, n_theta=96):
    """Analytic bands : quadrupole on A_0, zero elsewhere"""
    quads = [build_annulus_quadrature(j, n_r, n_theta) for j in range(J)]
    bands = [BandVorticity.from_function(quads[0], lambda x1, x2: amplitude * quadrupole_pattern(x1, x2))]
    bands += [BandVorticity.zero(q) for q in quads[1:]]
    return bands, quads


def closed_form_suite(N=256):
    suite = "closed form trajectory"
    params = ModelParams(N=N, J=2)
    bands, quads = _quadrupole_model(2)
    traj = run(params, bands, quads)

    M = traj.generators[0][1]
    expected = constant_generator_solution(M.g1, M.g2, traj.times[-1])
    h = traj.final.h[1]
    res = [
        _close(suite, "h_1(T)", float(np.max(np.abs(h.as_array() - expected))), 0.0, 1e-10),
        Check(suite, "h_0 identity", all(s.h[0] == SL2Matrix.identity() for s in traj.states)),
        _close(suite, "det drift", max(s.max_det_drift() for s in traj.states), 0.0, 1e-10),
        Check(suite, "renormalizations", traj.renormalizations == 0, traj.renormalizations, 0)]

    fit = doubleexp_fit(growth_metrics(traj), 1)
    res.append(Check(suite, "single exponential growth", fit.preferred == "single", fit.preferred, "single"))
    res.append(_close(suite, "growth rate", fit.single_rate or 0.0, abs(M.g1), 0.02 * abs(M.g1)))
    return res


def order_study(dts=(1 / 8, 1 / 16, 1 / 32), reference_dt=1 / 512, T=1.0, amplitude=4.0, n_r=16, n_theta=64):
    """
    Global error at T of the integrator on a 3 scale system with time dependent generators, against a fine step
    reference. Returns (errors, measured order)
    """
    quads = [build_annulus_quadrature(j, n_r, n_theta) for j in range(3)]
    bands = [
        BandVorticity.from_function(quads[0], lambda x1, x2: amplitude * quadrupole_pattern(x1, x2)),
        BandVorticity.from_function(quads[1], lambda x1, x2: amplitude * (2 * x1 * x2 + 0.5 * (x1 ** 2 - x2 ** 2)) / (x1 ** 2 + x2 ** 2)),
        BandVorticity.zero(quads[2])]

    def integrate(dt):
        state = CascadeState.initial(3)
        steps = int(round(T / dt))
        for _ in range(steps):
            state = step_rkmk4(state, bands, quads, dt)
        return state

    reference = integrate(reference_dt)
    errors = []
    for dt in dts:
        state = integrate(dt)
        errors.append(max(float(np.max(np.abs(a.as_array() - b.as_array()))) for a, b in zip(state.h, reference.h)))

    order = stats.linregress(np.log(dts), np.log(errors)).slope
    return errors, order


def order_suite():
    suite = "integrator order"
    errors, order = order_study()
    return [_close(suite, "order", order, 4.0, 0.3)]


def gronwall_suite():
    suite = "gronwall"
    report = gronwall_harness()
    res = [
        Check(suite, "harness", report.passed, report.slope, "<= -0.85"),
        Check(suite, "identical systems", gronwall_harness(E=0.0).passed)]
    for n, d, b in zip(report.N_values, report.max_diff, report.bounds):
        res.append(Check(suite, "bound at N=%d" % n, d <= b, d, b))
    return res


def growth_suite():
    suite = "growth classification"
    t = np.linspace(0, 1, 50)
    double = fit_growth(t, np.exp(np.exp(0.7 * t)))
    single = fit_growth(t, np.exp(1.3 * t))
    return [
        Check(suite, "double exponential", double.preferred == "double", double.preferred, "double"),
        _close(suite, "double exponential rate", double.double_slope, 0.7, 1e-6),
        Check(suite, "single exponential", single.preferred == "single", single.preferred, "single"),
        _close(suite, "single exponential rate", single.single_rate, 1.3, 1e-6)]


def radial_suite(N=256, J=6, n=128):
    suite = "radial preset"
    omega = preset_vorticity("radial", n=n)
    params = ModelParams(N=N, J=J)
    bands, quads = build_model(omega, params)
    traj = run(params, bands, quads)
    identity = SL2Matrix.identity().as_array()
    drift = max(float(np.linalg.norm(h.as_array() - identity)) for s in traj.states for h in s.h)
    return [_close(suite, "identity trajectory", drift, 0.0, 1e-9)]


QUICK_SUITES = [kernel_suite, partition_suite, closed_form_suite, gronwall_suite, growth_suite]
FULL_SUITES = QUICK_SUITES + [order_suite, radial_suite]


def validate(quick=False) -> pd.DataFrame:
    """Run the oracle suites. Returns one row per check"""
    checks = []
    for suite in (QUICK_SUITES if quick else FULL_SUITES):
        start = time.time()
        try:
            checks += suite()
        except CascadeException as e:
            checks.append(Check(suite.__name__, "error", False, str(e)))
        debug("%s : %.2fs" % (suite.__name__, time.time() - start))
    return pd.DataFrame([c.to_dict() for c in checks])
