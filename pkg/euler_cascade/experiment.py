"""
Full pipelines : a single run from a configuration, and parameter sweeps over the cartesian product of values.
"""
import itertools
import os
import re
import time
from typing import Dict, List

import numpy as np
import pandas as pd

from .base_utils import CascadeException, ConfigException, _parallel_map, debug, error, worker_count
from .cascade import ModelParams, build_model, run
from .config import ExperimentConfig, RunReport
from .diagnostics import band_window_check, doubleexp_fit, growth_metrics
from .io import read_grid, write_trajectory, FLOAT_FORMAT
from .littlewood_paley import Grid2D, gradient_bands_from_vorticity
from .presets import preset_vorticity

# Measured constant of sum_j ||omega_{0,j}|| / (N log N) above which a warning is printed
BAND_WINDOW_MAX_CONSTANT = 10.0


def load_vorticity(config: ExperimentConfig) -> Grid2D:
    """Initial vorticity : the field file (at its own resolution) or the preset on a grid_n grid"""
    if config.mode == "field":
        return read_grid(config.field_path)

    params = dict(config.preset_params)
    if config.preset == "random_bands":
        params.setdefault("J", config.J)
        params.setdefault("seed", config.seed)
    return preset_vorticity(config.preset, params, config.grid_n, config.L)


def model_params(config: ExperimentConfig, N) -> ModelParams:
    return ModelParams(
        N=N, J=config.J, C=config.C, tau=config.tau, logN_bands=config.logN_bands,
        n_r=config.n_r, n_theta=config.n_theta,
        log_base_horizon=config.log_base_horizon, log_base_bands=config.log_base_bands,
        seed=config.seed, sample_interval=config.sample_interval, t_end=config.t_end,
        oversample=config.oversample, interp_order=config.interp_order)


class ExperimentResult:
    def __init__(self, omega, spectrum, params, bands, trajectory, series, report):
        self.omega = omega
        self.spectrum = spectrum
        self.params = params
        self.bands = bands
        self.trajectory = trajectory
        self.series = series
        self.report = report


def run_experiment(config: ExperimentConfig, out_dir=None, workers=None) -> ExperimentResult:
    """Vorticity, band decomposition, integration, growth diagnostics and, if out_dir is set, output files"""
    start = time.time()

    omega = load_vorticity(config)
    spectrum = gradient_bands_from_vorticity(omega)

    if config.auto_N:
        N = spectrum.N_estimate
        if not N > 1:
            raise ConfigException("N must exceed 1 : N_estimate of the field is %g, set N explicitly" % N)
    else:
        N = config.N

    params = model_params(config, N)
    debug("Model parameters :", params)

    bands, quads = build_model(omega, params, workers)

    window = band_window_check(bands, N, spectrum.N_estimate, params.logN_bands)
    if window["constant"] > BAND_WINDOW_MAX_CONSTANT:
        error("Warning : sum of band vorticities is %g N log N" % window["constant"])
    estimate_constant = window["estimate_constant"]
    if estimate_constant is not None and estimate_constant > BAND_WINDOW_MAX_CONSTANT:
        error("Warning : sum of band vorticities is %g N_estimate logN_bands" % estimate_constant)

    traj = run(params, bands, quads, workers)
    series = growth_metrics(traj)
    fits = [doubleexp_fit(series, j) for j in range(params.J)]

    report = RunReport(
        config=config,
        N=N,
        N_estimate=spectrum.N_estimate,
        T=params.horizon,
        t_end=params.end_time,
        steps=traj.steps,
        samples=len(traj),
        renormalizations=traj.renormalizations,
        wall_time=time.time() - start,
        final_sigma_max=series.frame[series.frame["t"] == traj.times[-1]]["sigma_max"].tolist(),
        fits=fits,
        logN_bands=params.logN_bands,
        beyond_horizon=traj.beyond_horizon,
        band_window=window)

    out_dir = out_dir or config.out_dir
    if out_dir:
        write_trajectory(traj, report, out_dir, spectrum)

    return ExperimentResult(omega, spectrum, params, bands, traj, series, report)


_POWER = re.compile(r"^\s*(\d+)\s*\^\s*(-?\d+)\s*$")


def parse_value(text):
    """Value of a sweep : '2^k', integer, float, or plain string"""
    text = text.strip()
    match = _POWER.match(text)
    if match:
        return int(match.group(1)) ** int(match.group(2))
    for type in (int, float):
        try:
            return type(text)
        except ValueError:
            pass
    return text


def parse_variation(text):
    """'KEY=v1,v2,...' -> (key, [values])"""
    if "=" not in text:
        raise ConfigException("invalid variation '%s' : expected KEY=v1,v2,..." % text)
    key, values = text.split("=", 1)
    key = key.strip()
    values = [parse_value(v) for v in values.split(",") if v.strip() != ""]
    if not values:
        raise ConfigException("no values given for '%s'" % key)
    return key, values


def _point_name(point: Dict):
    name = "_".join("%s=%s" % (key, value) for key, value in point.items())
    return re.sub(r"[^A-Za-z0-9=._-]", "-", name)


def sweep(config: ExperimentConfig, variations: Dict[str, List], out_dir, workers=None) -> pd.DataFrame:
    """
    One run per point of the cartesian product of variations, each in its own subdirectory of out_dir.
    Points run on a pool bounded by CASCADE_THREADS. Writes and returns the summary sweep.csv.
    """
    keys = list(variations.keys())
    points = [dict(zip(keys, values)) for values in itertools.product(*(variations[k] for k in keys))]

    # Validate every point before running any
    configs = [config.replace(**point, out_dir=os.path.join(out_dir, _point_name(point))) for point in points]

    if workers is None:
        workers = worker_count()

    def run_point(item):
        point, point_config = item
        row = dict(point)
        try:
            res = run_experiment(point_config, workers=1)
            report = res.report
            row.update(
                N=report.N, T=report.T, steps=report.steps,
                sigma_max=max(report.final_sigma_max),
                renormalizations=report.renormalizations,
                status="ok")
        except CascadeException as e:
            error("Sweep point %s failed : %s" % (_point_name(point), e))
            row.update(N=np.nan, T=np.nan, steps=0, sigma_max=np.nan, renormalizations=0, status="failed: %s" % e)
        return row

    rows = _parallel_map(run_point, zip(points, configs), workers)

    summary = pd.DataFrame(rows)
    os.makedirs(out_dir, exist_ok=True)
    summary.to_csv(os.path.join(out_dir, "sweep.csv"), index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return summary
