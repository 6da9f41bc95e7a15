"""
Growth observables of a trajectory, classification of single / double exponential growth, and the scalar
Gronwall harness measuring how a short forcing difference propagates over the horizon.
"""
import math
from typing import List

import numpy as np
import pandas as pd
from scipy import stats

from .base_utils import _parallel_map, debug, error
from .core_types import SL2Matrix
from .params import horizon

# Below this value, sigma_max carries no growth signal
GROWTH_THRESHOLD = 1 + 1e-6

GRONWALL_N_VALUES = [2 ** 8, 2 ** 10, 2 ** 12, 2 ** 14]
GRONWALL_EXPONENT = -0.91
GRONWALL_KAPPA = 10.0
GRONWALL_SLOPE_MAX = -0.9 + 0.05


def singular_values(h: SL2Matrix):
    """ (sigma_max, sigma_min) of a 2x2 matrix, from the closed form """
    p = math.hypot(h.a + h.d, h.b - h.c)
    q = math.hypot(h.a - h.d, h.b + h.c)
    return (p + q) / 2, abs(p - q) / 2


def operator_norm(h: SL2Matrix) -> float:
    """Largest singular value of h"""
    return singular_values(h)[0]


class GrowthSeries:
    """
    Growth observables per sample and scale, as a long dataframe with columns :
    t, j, sigma_max, sigma_min, frobenius, det_drift, gen_norm.

    #totals holds, per sample, the sum over scales of the contribution norms ||c_k|| and the max of sigma_max.
    """

    def __init__(self, frame: pd.DataFrame, totals: pd.DataFrame):
        self.frame = frame
        self.totals = totals

    @property
    def times(self):
        return self.totals["t"].values

    @property
    def scales(self):
        return sorted(self.frame["j"].unique())

    def sigma(self, j):
        """ (times, sigma_max) of scale j """
        sub = self.frame[self.frame["j"] == j]
        return sub["t"].values, sub["sigma_max"].values

    def max_det_drift(self):
        return float(self.frame["det_drift"].max())

    def __len__(self):
        return len(self.totals)


def growth_metrics(traj) -> GrowthSeries:
    """Compute the growth observables of every sample of a trajectory"""
    rows = []
    totals = []
    for t, state, gens, contribs in zip(traj.times, traj.states, traj.generators, traj.contributions):
        sigma_top = 0.0
        for j, (h, gen) in enumerate(zip(state.h, gens)):
            s_max, s_min = singular_values(h)
            sigma_top = max(sigma_top, s_max)
            rows.append(dict(
                t=t, j=j,
                sigma_max=s_max,
                sigma_min=s_min,
                frobenius=h.frobenius(),
                det_drift=h.det_drift(),
                gen_norm=gen.frobenius()))
        totals.append(dict(
            t=t,
            contribution_sum=sum(c.frobenius() for c in contribs),
            sigma_max=sigma_top))

    return GrowthSeries(pd.DataFrame(rows), pd.DataFrame(totals))


class GrowthFit:
    """
    Fits of the growth of sigma_max(h_j) :
        - double exponential : log log sigma = double_intercept + double_slope * t
        - single exponential : log sigma = single_intercept + single_rate * t
    Residuals are root mean squares in log sigma.
    """

    def __init__(self, j, status, samples=0, **fit):
        self.j = j
        self.status = status
        self.samples = samples
        self.double_slope = fit.get("double_slope")
        self.double_intercept = fit.get("double_intercept")
        self.double_residual = fit.get("double_residual")
        self.single_rate = fit.get("single_rate")
        self.single_intercept = fit.get("single_intercept")
        self.single_residual = fit.get("single_residual")

    @property
    def preferred(self):
        """ 'double', 'single' or None when no growth was detected """
        if self.status != "growth":
            return None
        if self.double_residual < self.single_residual:
            return "double"
        return "single"

    @property
    def rate(self):
        """Fitted rate of the preferred model"""
        if self.preferred == "double":
            return self.double_slope
        if self.preferred == "single":
            return self.single_rate
        return None

    def to_dict(self):
        return dict(
            j=int(self.j),
            status=self.status,
            preferred=self.preferred,
            samples=self.samples,
            double_slope=self.double_slope,
            double_intercept=self.double_intercept,
            double_residual=self.double_residual,
            single_rate=self.single_rate,
            single_intercept=self.single_intercept,
            single_residual=self.single_residual)

    def __repr__(self):
        if self.status != "growth":
            return "GrowthFit(j=%d, %s)" % (self.j, self.status)
        return "GrowthFit(j=%d, %s, rate=%g)" % (self.j, self.preferred, self.rate)


def _rms(x):
    return float(np.sqrt(np.mean(np.square(x))))


def fit_growth(times, sigma, j=0) -> GrowthFit:
    """Single and double exponential fits of a sigma_max series"""
    times = np.asarray(times, dtype=float)
    sigma = np.asarray(sigma, dtype=float)

    growing = sigma > GROWTH_THRESHOLD
    count = int(np.sum(growing))
    if len(sigma) == 0 or count < len(sigma) / 2 or count < 2:
        return GrowthFit(j, "no growth", count)

    t = times[growing]
    log_sigma = np.log(sigma[growing])
    if np.ptp(t) == 0:
        return GrowthFit(j, "no growth", count)

    double = stats.linregress(t, np.log(log_sigma))
    single = stats.linregress(t, log_sigma)

    return GrowthFit(
        j, "growth", count,
        double_slope=float(double.slope),
        double_intercept=float(double.intercept),
        double_residual=_rms(np.exp(double.intercept + double.slope * t) - log_sigma),
        single_rate=float(single.slope),
        single_intercept=float(single.intercept),
        single_residual=_rms(single.intercept + single.slope * t - log_sigma))


def doubleexp_fit(series: GrowthSeries, j) -> GrowthFit:
    """Classify the growth of sigma_max(h_j) as single or double exponential"""
    times, sigma = series.sigma(j)
    res = fit_growth(times, sigma, j)
    debug("Growth fit :", res)
    return res


def band_window_check(bands, N, N_estimate=None, logN_bands=None):
    """
    Measured constant of sum_j ||omega_{0,j}|| <= const N log N.
    Returns a dict with the sum, N log N and their ratio.

    With N_estimate and logN_bands, also the constant of sum_j ||omega_{0,j}|| <= const N_estimate logN_bands,
    under 'estimate_constant' (None when the product is not positive).
    """
    total = float(sum(band.sup_norm for band in bands))
    bound = N * math.log(N)
    res = dict(total=total, N_log_N=bound, constant=total / bound)
    if N_estimate is not None and logN_bands is not None:
        estimate_bound = float(N_estimate) * logN_bands
        res["N_estimate_logN_bands"] = estimate_bound
        res["estimate_constant"] = total / estimate_bound if estimate_bound > 0 else None
    debug("Band window estimate :", res)
    return res


class GronwallReport:
    """
    Result of the Gronwall harness. Per N : the max over time of |w - v|, its value at the horizon,
    the closed form of the constant profile case and the bound kappa E N^-0.91.
    """

    def __init__(self, E, N_values, max_diff, final_diff, closed_form, bounds, slope, passed):
        self.E = E
        self.N_values = list(N_values)
        self.max_diff = list(max_diff)
        self.final_diff = list(final_diff)
        self.closed_form = list(closed_form)
        self.bounds = list(bounds)
        self.slope = slope
        self.passed = passed

    def to_frame(self):
        return pd.DataFrame(dict(
            N=self.N_values,
            max_diff=self.max_diff,
            final_diff=self.final_diff,
            closed_form=self.closed_form,
            bound=self.bounds))

    def __repr__(self):
        return "GronwallReport(slope=%s, passed=%s)" % (self.slope, self.passed)


def _rk4(f, t0, y0, t1, steps):
    """Classical Runge-Kutta on [t0, t1] with a fixed number of steps. Returns the list of states"""
    h = (t1 - t0) / steps
    y = y0
    res = [y]
    for i in range(steps):
        t = t0 + i * h
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        res.append(y)
    return res


def _gronwall_single(N, E, num_steps, window, tail_coupling, random_profile, seed, C, baseline=1.0):
    T = horizon(C, N)
    t_window = min(window / N, T)

    steps_window = max(16, int(round(num_steps * t_window / T)))
    steps_tail = max(16, num_steps - steps_window) if t_window < T else 0

    if random_profile:
        rng = np.random.default_rng(seed)
        profile = rng.uniform(N / 2, N, size=steps_window + steps_tail)

        def F(t):
            if t < t_window:
                i = int(t / t_window * steps_window)
            else:
                i = steps_window + int((t - t_window) / (T - t_window) * steps_tail)
            return profile[min(i, len(profile) - 1)]
    else:
        def F(t):
            return N

    # State is the pair (w, v) : both systems share F and the baseline forcing
    def forced(t, y):
        f = F(t)
        return np.array([f * y[0] + baseline + E, f * y[1] + baseline])

    def tail(t, y):
        f = F(t)
        return np.array([f * y[0] + baseline + tail_coupling * f * (y[0] - y[1]), f * y[1] + baseline])

    y0 = np.array([1.0, 1.0])
    path = _rk4(forced, 0.0, y0, t_window, steps_window)
    if steps_tail:
        path += _rk4(tail, t_window, path[-1], T, steps_tail)[1:]

    diffs = np.array([abs(y[0] - y[1]) for y in path])

    closed_form = E * math.expm1(N * t_window) / N * math.exp(N * (T - t_window))

    return float(np.max(diffs)), float(diffs[-1]), closed_form


def gronwall_harness(N=None, E=1.0, num_steps=2000, window=0.25, tail_coupling=0.0, random_profile=False, seed=0,
                     C=0.09, kappa=GRONWALL_KAPPA) -> GronwallReport:
    """
    Integrates dw/dt = F(t) w + G1, dv/dt = F(t) v + G2 with w(0) = v(0), up to T = C log(N)/N.
    G1 - G2 = E for t <= window/N, then beta F (w - v) with beta = tail_coupling (0 by default).
    F(t) = N, or a random profile in [N/2, N] when random_profile is set.

    N may be a single value or a list (default 2^8, 2^10, 2^12, 2^14). With several values, the slope of
    log(max |w - v| / E) against log N is fitted.
    The harness passes when every point is below kappa E N^-0.91 and the slope is below -0.85.
    """
    if N is None:
        N_values = list(GRONWALL_N_VALUES)
    elif np.ndim(N) == 0:
        N_values = [N]
    else:
        N_values = list(N)

    for n in N_values:
        if n < 16:
            error("Warning : Gronwall harness expects N >= 16, got %g" % n)

    results = _parallel_map(
        lambda n: _gronwall_single(n, E, num_steps, window, tail_coupling, random_profile, seed, C),
        N_values)

    max_diff = [r[0] for r in results]
    final_diff = [r[1] for r in results]
    closed_form = [r[2] for r in results]
    bounds = [kappa * E * n ** GRONWALL_EXPONENT for n in N_values]

    below = all(d <= b for d, b in zip(max_diff, bounds))

    slope = None
    if E > 0 and len(N_values) > 1:
        slope = float(stats.linregress(np.log(N_values), np.log(np.array(max_diff) / E)).slope)

    if E == 0:
        passed = all(d == 0 for d in max_diff)
    else:
        passed = below and (slope is None or slope <= GRONWALL_SLOPE_MAX)

    res = GronwallReport(E, N_values, max_diff, final_diff, closed_form, bounds, slope, passed)
    debug("Gronwall harness :", res)
    return res
