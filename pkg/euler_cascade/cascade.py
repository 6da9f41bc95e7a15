"""
The autonomous cascade : per scale j, h_j in SL(2) solves

    dh_j/dt = M_j(h) h_j,   M_j = sum_{k<j} (grad u)_{k,h_k},   h_j(0) = I

integrated up to T = C log(N)/N with a fourth order Runge-Kutta-Munthe-Kaas scheme on the group.
"""
import math
from typing import List

import numpy as np
import pandas as pd

from .base_utils import BlowUpException, CascadeException, ConfigException, ExceptionContext, \
    _parallel_map, debug, error
from .biot_savart import AnnulusQuadrature, build_annulus_quadrature, grad_u_model, DEFAULT_N_R, DEFAULT_N_THETA
from .core_types import SL2Matrix, TraceFreeMatrix, sl2_exp
from .diagnostics import singular_values
from .littlewood_paley import BandSampler, BandVorticity, Grid2D, build_band_vorticity
from .params import band_half_width, check_param, horizon

# Renormalize h_j when |det h_j - 1| exceeds this
DET_RENORMALIZE = 1e-10

TRAJECTORY_COLUMNS = ["t", "j", "h11", "h12", "h21", "h22", "det", "sigma_max", "gen_norm"]


class ModelParams:
    """Parameters of one integration. Values are validated against the parameter registry"""

    def __init__(self, N, J, C=0.09, tau=0.01, logN_bands=None, n_r=DEFAULT_N_R, n_theta=DEFAULT_N_THETA,
                 log_base_horizon="e", log_base_bands="2", seed=0, sample_interval=1, t_end=None,
                 oversample=4, interp_order=3):
        if N == "auto":
            raise ConfigException("N must be resolved to a number before building the model")
        self.N = check_param("N", N)
        self.J = check_param("J", J)
        self.C = check_param("C", C)
        self.tau = check_param("tau", tau)
        self.log_base_horizon = check_param("log_base_horizon", log_base_horizon)
        self.log_base_bands = check_param("log_base_bands", log_base_bands)
        self.logN_bands = check_param("logN_bands", logN_bands)
        if self.logN_bands is None:
            self.logN_bands = band_half_width(self.N, self.log_base_bands)
        self.n_r = check_param("n_r", n_r)
        self.n_theta = check_param("n_theta", n_theta)
        self.seed = check_param("seed", seed)
        self.sample_interval = check_param("sample_interval", sample_interval)
        self.t_end = check_param("t_end", t_end)
        self.oversample = check_param("oversample", oversample)
        self.interp_order = check_param("interp_order", interp_order)

        if self.dt > self.horizon:
            raise ConfigException("time step tau/N = %g exceeds the horizon T = %g : decrease tau" % (self.dt, self.horizon))

    @property
    def horizon(self):
        """ T = C log(N) / N """
        return horizon(self.C, self.N, self.log_base_horizon)

    @property
    def dt(self):
        return self.tau / self.N

    @property
    def end_time(self):
        return self.horizon if self.t_end is None else self.t_end

    def __repr__(self):
        return "ModelParams(N=%g, J=%d, C=%g, tau=%g, logN_bands=%d)" % (self.N, self.J, self.C, self.tau, self.logN_bands)


class CascadeState:
    """Time and the matrices h_0 .. h_{J-1}"""

    def __init__(self, t, h: List[SL2Matrix]):
        self.t = float(t)
        self.h = list(h)

    @staticmethod
    def initial(J):
        return CascadeState(0.0, [SL2Matrix.identity()] * J)

    def __len__(self):
        return len(self.h)

    def is_finite(self):
        return all(h.is_finite() for h in self.h)

    def max_det_drift(self):
        return max(h.det_drift() for h in self.h)

    def __eq__(self, other):
        if not isinstance(other, CascadeState):
            return NotImplemented
        return self.t == other.t and self.h == other.h

    def __repr__(self):
        return "CascadeState(t=%g, J=%d)" % (self.t, len(self.h))


class Trajectory:
    """
    Samples of a run : times, states, and for each sample the generators M_j and the scale contributions c_k.
    Times are strictly increasing and the first sample is the identity state at t = 0.
    """

    def __init__(self, params: ModelParams = None):
        self.params = params
        self.times = []
        self.states = []
        self.generators = []
        self.contributions = []
        self.steps = 0
        self.renormalizations = 0
        self.beyond_horizon = False

    def record(self, state: CascadeState, generators, contributions):
        if self.times and state.t <= self.times[-1]:
            raise CascadeException("sample times must increase : %g after %g" % (state.t, self.times[-1]))
        self.times.append(state.t)
        self.states.append(state)
        self.generators.append(list(generators))
        self.contributions.append(list(contributions))

    def __len__(self):
        return len(self.times)

    @property
    def J(self):
        return len(self.states[0]) if self.states else 0

    @property
    def final(self) -> CascadeState:
        return self.states[-1]

    def to_frame(self) -> pd.DataFrame:
        """One row per (sample, scale), with the columns of trajectory.csv"""
        rows = []
        for t, state, gens in zip(self.times, self.states, self.generators):
            for j, (h, gen) in enumerate(zip(state.h, gens)):
                rows.append((t, j, h.a, h.b, h.c, h.d, h.det(), singular_values(h)[0], gen.frobenius()))
        df = pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)
        df["j"] = df["j"].astype(int)
        return df


def _check_lengths(h, bands, quads):
    if not (len(h) == len(bands) == len(quads)):
        raise CascadeException("inconsistent number of scales : %d states, %d bands, %d quadratures" % (
            len(h), len(bands), len(quads)))


def scale_contributions(h: List[SL2Matrix], bands: List[BandVorticity], quads: List[AnnulusQuadrature],
                        workers=None) -> List[TraceFreeMatrix]:
    """ c_k = (grad u)_{k,h_k} for every scale. Scales may be evaluated on a worker pool """
    _check_lengths(h, bands, quads)
    return _parallel_map(lambda k: grad_u_model(bands[k], quads[k], h[k]), range(len(h)), workers)


def _prefix_sums(contributions):
    res = [TraceFreeMatrix.zero()]
    for c in contributions[:-1]:
        res.append(res[-1] + c)
    return res


def _generators(h, bands, quads, workers=None):
    contributions = scale_contributions(h, bands, quads, workers)
    return _prefix_sums(contributions), contributions


def rhs_generators(state: CascadeState, bands, quads, workers=None) -> List[TraceFreeMatrix]:
    """M_0 = 0, M_{j+1} = M_j + c_j : J kernel evaluations, summed in ascending j"""
    return _generators(state.h, bands, quads, workers)[0]


def _advance(generators, h):
    return [sl2_exp(g) @ hj for g, hj in zip(generators, h)]


def step_rkmk4(state: CascadeState, bands, quads, dt, backward=False, workers=None) -> CascadeState:
    """
    One Runge-Kutta-Munthe-Kaas step of order 4. Each h_j becomes exp(Omega_j) h_j with Omega_j trace free :

        k1 = dt f(h)
        k2 = dt f(exp(k1/2) h)
        k3 = dt f(exp(k2/2 - [k1, k2]/8) h)
        k4 = dt f(exp(k3) h)
        Omega = (k1 + 2 k2 + 2 k3 + k4) / 6 - [k1, k4] / 12

    With backward=True, the time reversed system is integrated : t decreases by dt.
    """
    if not dt > 0:
        raise CascadeException("time step must be positive, got %g" % dt)

    h = state.h
    _check_lengths(h, bands, quads)
    step = -dt if backward else dt

    def f(hs):
        return [step * m for m in _generators(hs, bands, quads, workers)[0]]

    k1 = f(h)
    k2 = f(_advance([k / 2 for k in k1], h))
    k3 = f(_advance([b / 2 - a.commutator(b) / 8 for a, b in zip(k1, k2)], h))
    k4 = f(_advance(k3, h))

    omega = [(a + 2 * b + 2 * c + d) / 6 - a.commutator(d) / 12 for a, b, c, d in zip(k1, k2, k3, k4)]

    return CascadeState(state.t + step, _advance(omega, h))


def _step_times(end, dt):
    """Times of the fixed grid 0, dt, 2 dt .. landing exactly on end"""
    count = max(1, int(math.ceil(end / dt - 1e-9)))
    return [i * dt for i in range(1, count) if i * dt < end] + [end]


def _renormalize(state: CascadeState, traj: Trajectory):
    res = []
    for j, h in enumerate(state.h):
        if h.det_drift() > DET_RENORMALIZE:
            error("Warning : det(h_%d) = %.17g at t=%g, renormalized" % (j, h.det(), state.t))
            traj.renormalizations += 1
            h = h.renormalized()
        res.append(h)
    return CascadeState(state.t, res)


def run(params: ModelParams, bands, quads, workers=None) -> Trajectory:
    """
    Integrate from t = 0 to the horizon T (or params.t_end) with dt = tau/N, the last step shortened to land on the end.
    Samples are recorded at t = 0, every sample_interval steps, and at the end.
    Raises BlowUpException, carrying the partial trajectory, when a state stops being finite.
    """
    if len(bands) != params.J or len(quads) != params.J:
        raise CascadeException("expected %d bands and quadratures, got %d and %d" % (params.J, len(bands), len(quads)))

    traj = Trajectory(params)
    end = params.end_time
    if end > params.horizon:
        error("Warning : integrating up to t=%g, beyond the horizon T=%g of the model" % (end, params.horizon))
        traj.beyond_horizon = True

    state = CascadeState.initial(params.J)
    traj.record(state, *_generators(state.h, bands, quads, workers))

    times = _step_times(end, params.dt)
    debug("Running %d steps of %g up to t=%g" % (len(times), params.dt, end))

    for i, t_next in enumerate(times):
        try:
            new_state = step_rkmk4(state, bands, quads, t_next - state.t, workers=workers)
        except CascadeException as e:
            raise BlowUpException("blow-up detected at t=%g : %s" % (state.t, e), traj) from e

        if not new_state.is_finite():
            raise BlowUpException("blow-up detected at t=%g" % t_next, traj)

        state = _renormalize(CascadeState(t_next, new_state.h), traj)
        traj.steps += 1

        if (i + 1) % params.sample_interval == 0 or i == len(times) - 1:
            traj.record(state, *_generators(state.h, bands, quads, workers))

    return traj


def run_backward(params: ModelParams, bands, quads, state: CascadeState, workers=None) -> CascadeState:
    """Integrate the time reversed system from state back to t = 0, on the step grid of #run"""
    times = [0.0] + _step_times(state.t, params.dt)
    for t_prev in reversed(times[:-1]):
        state = step_rkmk4(state, bands, quads, state.t - t_prev, backward=True, workers=workers)
        state = CascadeState(t_prev, state.h)
    return state


def build_quadratures(params: ModelParams) -> List[AnnulusQuadrature]:
    return [build_annulus_quadrature(j, params.n_r, params.n_theta) for j in range(params.J)]


def build_model(omega: Grid2D, params: ModelParams, workers=None):
    """
    Band vorticities omega_{0,j} and quadratures for j = 0..J-1, sampled once from the initial field.
    Returns (bands, quads)
    """
    quads = build_quadratures(params)
    sampler = BandSampler(omega, oversample=params.oversample, interp_order=params.interp_order)

    def band(j):
        with ExceptionContext("band %d" % j):
            return build_band_vorticity(omega, j, params.logN_bands, quads[j], sampler)

    bands = _parallel_map(band, range(params.J), workers)
    return bands, quads
