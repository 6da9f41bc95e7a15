"""
File formats : Grid2D binary fields, trajectory.csv, bands.csv and report.json
"""
import os
import re

import numpy as np
import pandas as pd

from .base_utils import CascadeException, ConfigException, debug
from .littlewood_paley import BandSpectrum, Grid2D

_HEADER = re.compile(r"^grid2d n=(\d+) L=(\S+) dtype=f64$")

FLOAT_FORMAT = "%.17g"


def write_grid(grid: Grid2D, path):
    """Text header line 'grid2d n=<n> L=<L> dtype=f64', then n^2 little endian doubles, row major"""
    header = "grid2d n=%d L=%r dtype=f64\n" % (grid.n, grid.L)
    try:
        with open(path, "wb") as f:
            f.write(header.encode("ascii"))
            f.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())
    except OSError as e:
        raise CascadeException("cannot write field '%s' : %s" % (path, e.strerror))


def read_grid(path) -> Grid2D:
    try:
        with open(path, "rb") as f:
            content = f.read()
    except OSError as e:
        raise ConfigException("cannot read field '%s' : %s" % (path, e.strerror))

    end = content.find(b"\n")
    match = _HEADER.match(content[:end].decode("ascii", errors="replace")) if end >= 0 else None
    if match is None:
        raise ConfigException("invalid field file '%s' : bad header" % path)

    n = int(match.group(1))
    try:
        L = float(match.group(2))
    except ValueError:
        raise ConfigException("invalid field file '%s' : bad L '%s'" % (path, match.group(2)))

    data = content[end + 1:]
    if len(data) != n * n * 8:
        raise ConfigException("invalid field file '%s' : expected %d values, found %d bytes" % (path, n * n, len(data)))

    values = np.frombuffer(data, dtype="<f8").reshape((n, n)).astype(np.float64)
    debug("Read field %s : n=%d, L=%g" % (path, n, L))
    try:
        return Grid2D(values, L)
    except CascadeException as e:
        raise ConfigException("invalid field file '%s' : %s" % (path, e))


def _ensure_dir(directory):
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise CascadeException("cannot create output directory '%s' : %s" % (directory, e.strerror))


def _write_text(path, text):
    try:
        with open(path, "w", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise CascadeException("cannot write '%s' : %s" % (path, e.strerror))


def bands_frame(spectrum: BandSpectrum) -> pd.DataFrame:
    """Rows : one per band j, then 'tail' and 'N_estimate'"""
    rows = [(str(j), norm) for j, norm in enumerate(spectrum.grad_norms)]
    rows.append(("tail", spectrum.tail_norm))
    rows.append(("N_estimate", spectrum.N_estimate))
    return pd.DataFrame(rows, columns=["band", "sup_norm"])


def write_bands(spectrum: BandSpectrum, path):
    _write_text(path, bands_frame(spectrum).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


def write_trajectory(traj, report, directory, spectrum: BandSpectrum = None):
    """
    Writes trajectory.csv (one row per sample and scale), report.json and, when a spectrum is given, bands.csv.
    Returns the list of written paths.
    """
    _ensure_dir(directory)
    paths = []

    path = os.path.join(directory, "trajectory.csv")
    _write_text(path, traj.to_frame().to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    paths.append(path)

    path = os.path.join(directory, "report.json")
    _write_text(path, report.to_json() + "\n")
    paths.append(path)

    if spectrum is not None:
        path = os.path.join(directory, "bands.csv")
        write_bands(spectrum, path)
        paths.append(path)

    return paths
