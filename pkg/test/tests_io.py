import json
import math
import os
import sys
import time

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.getcwd())
sys.path.insert(0, os.path.join(os.getcwd(), "test"))

from euler_cascade import *
from euler_cascade.cli import main
from fixtures import *

LN2 = math.log(2)


def setup_function():
    """Before each test"""
    set_debug(False)


def _write(path, text):
    with open(path, "w") as f:
        f.write(text)
    return str(path)


# ---- Parameters and configuration

def test_parse_defaults():
    config = parse_config(config_text())
    assert config.N == 256.0
    assert config.J == 4
    assert config.C == 0.09
    assert config.tau == 0.01
    assert config.logN_bands is None
    assert config.band_window(256) == 8
    assert config.horizon(256) == pytest.approx(0.09 * math.log(256) / 256, rel=1e-14)
    assert not config.auto_N
    assert parse_config(config_text(N="auto")).auto_N


def test_parse_round_trip():
    config = parse_config(config_text(preset_params=dict(core=0.4), logN_bands=3, t_end=0.001))
    assert parse_config(serialize_config(config)) == config
    assert config.replace(J=5).J == 5
    assert config.replace(J=5) != config


def test_parse_errors():
    with pytest.raises(ConfigException, match="unknown key 'foo'"):
        parse_config(config_text(foo=1))
    with pytest.raises(ConfigException, match="syntax error at line 1"):
        parse_config('{"N": 256,')
    with pytest.raises(ConfigException, match="JSON object"):
        parse_config("[1, 2]")
    with pytest.raises(ConfigException, match="N must"):
        parse_config(config_text(N="big"))
    with pytest.raises(ConfigException, match="N must exceed 1"):
        parse_config(config_text(N=0.5))
    with pytest.raises(ConfigException):
        parse_config(config_text(C=-1))
    with pytest.raises(ConfigException):
        parse_config(config_text(J=2.5))
    with pytest.raises(ConfigException, match="power of two"):
        parse_config(config_text(grid_n=100))
    with pytest.raises(ConfigException):
        parse_config(config_text(log_base_bands="10"))


def test_parse_modes():
    with pytest.raises(ConfigException, match="requires field_path"):
        parse_config(config_text(mode="field", preset=None))
    with pytest.raises(ConfigException, match="excludes preset"):
        parse_config(config_text(mode="field", field_path="omega.bin"))
    with pytest.raises(ConfigException, match="requires preset"):
        parse_config(config_text(preset=None))
    with pytest.raises(ConfigException):
        parse_config(config_text(preset="vortex"))

    config = parse_config(config_text(mode="field", field_path="omega.bin", preset=None))
    assert config.field_path == "omega.bin"


def test_read_config_missing(tmp_path):
    with pytest.raises(ConfigException, match="cannot read config"):
        read_config(str(tmp_path / "missing.json"))


def test_param_defs():
    assert horizon(0.09, 256) == pytest.approx(0.09 * math.log(256) / 256, rel=1e-14)
    assert horizon(0.09, 256, base="2") == pytest.approx(0.09 * 8 / 256, rel=1e-14)
    assert band_half_width(256) == 8
    assert band_half_width(257) == 9
    assert band_half_width(1.5) == 1
    assert band_half_width(math.e ** 3, base="e") == 3

    text = list_parameters()
    for key in ("N", "J", "C", "tau", "logN_bands", "preset", "grid_n"):
        assert key in text


def test_package_namespace():
    # The star import of the package keeps standard modules usable
    assert time.time() > 0
    assert callable(time.perf_counter)


# ---- Presets

@pytest.mark.parametrize("name", ["radial", "quadrupole", "odd_odd"])
def test_presets(name):
    grid = preset_vorticity(name, n=128)
    assert abs(grid.values.mean()) < 1e-12

    # Supported in the unit disk : constant outside once the mean is removed
    X1, X2 = grid.coordinates()
    outside = grid.values[np.hypot(X1, X2) > 1]
    assert np.ptp(outside) < 1e-12

    assert gradient_bands_from_vorticity(grid).sup_norm == pytest.approx(1.0, abs=1e-12)


def test_preset_not_normalized():
    grid = preset_vorticity("quadrupole", dict(normalize=False), n=64)
    assert gradient_bands_from_vorticity(grid).sup_norm != pytest.approx(1.0, abs=1e-6)


def test_preset_errors():
    with pytest.raises(ConfigException, match="unknown preset"):
        preset_vorticity("vortex")
    with pytest.raises(ConfigException, match="unknown parameters"):
        preset_vorticity("radial", dict(radius=0.5))
    with pytest.raises(ConfigException):
        preset_vorticity("quadrupole", dict(center=0.8, width=0.4))
    with pytest.raises(ConfigException):
        preset_vorticity("quadrupole", dict(profile="ring"))


def test_quadrupole_plateau_band():
    # f = 1 on the annulus A_2 : the band is cos(2 theta) there and its strain is -ln(2)/2
    grid = preset_vorticity("quadrupole", dict(profile="plateau", normalize=False), n=256)
    quad = build_annulus_quadrature(2)
    band = build_band_vorticity(grid, 2, 8, quad)

    expected = cos2(quad.nodes[:, 0], quad.nodes[:, 1])
    assert np.max(np.abs(band.node_values - expected)) < 5e-3

    g = grad_u_model(band, quad, SL2Matrix.identity())
    assert g.g1 == pytest.approx(-LN2 / 2, abs=5e-3)


def test_random_bands():
    params = dict(J=6, seed=0)
    a = preset_vorticity("random_bands", params, n=512)
    b = preset_vorticity("random_bands", params, n=512)
    assert np.array_equal(a.values, b.values)

    norms = gradient_bands_from_vorticity(a).grad_norms[:6]
    assert all(0.5 <= norm <= 2 for norm in norms)

    c = preset_vorticity("random_bands", dict(J=6, seed=1), n=512)
    assert not np.array_equal(a.values, c.values)


def test_random_bands_too_coarse():
    with pytest.raises(ResolutionException, match="grid too coarse"):
        preset_vorticity("random_bands", dict(J=6), n=64)


# ---- Files

def test_grid_file(tmp_path):
    grid, _ = mode_grid(32, 2.0, 3, 1)
    path = str(tmp_path / "omega.bin")
    write_grid(grid, path)

    with open(path, "rb") as f:
        content = f.read()
    assert content.startswith(b"grid2d n=32 L=2.0 dtype=f64\n")
    assert len(content) == len(b"grid2d n=32 L=2.0 dtype=f64\n") + 32 * 32 * 8

    res = read_grid(path)
    assert res.L == 2.0
    assert np.array_equal(res.values, grid.values)


def test_grid_file_errors(tmp_path):
    path = str(tmp_path / "bad.bin")

    with open(path, "wb") as f:
        f.write(b"grid n=4 L=2.0\n" + bytes(128))
    with pytest.raises(ConfigException, match="bad header"):
        read_grid(path)

    with open(path, "wb") as f:
        f.write(b"grid2d n=4 L=2.0 dtype=f64\n" + bytes(64))
    with pytest.raises(ConfigException, match="expected 16 values"):
        read_grid(path)

    with open(path, "wb") as f:
        f.write(b"grid2d n=3 L=2.0 dtype=f64\n" + bytes(72))
    with pytest.raises(ConfigException, match="power of two"):
        read_grid(path)

    with pytest.raises(ConfigException, match="cannot read field"):
        read_grid(str(tmp_path / "missing.bin"))


def test_bands_frame():
    f, _ = mode_grid(64, 2.0, 8, 0)
    df = bands_frame(gradient_bands_from_vorticity(f))
    assert list(df["band"]) == ["0", "1", "2", "tail", "N_estimate"]
    assert df["sup_norm"].iloc[-1] == pytest.approx(1.0, abs=1e-11)


# ---- Experiments

def test_run_experiment(tmp_path):
    config = parse_config(config_text())
    out = str(tmp_path / "run")
    res = run_experiment(config, out_dir=out)

    report = res.report
    assert report.N == 256
    assert report.T == pytest.approx(0.09 * math.log(256) / 256, rel=1e-14)
    assert report.steps == 50
    assert report.samples == 51
    assert len(report.final_sigma_max) == 4
    assert report.logN_bands == 8
    assert len(report.fits) == 4

    df = pd.read_csv(os.path.join(out, "trajectory.csv"))
    assert list(df.columns) == ["t", "j", "h11", "h12", "h21", "h22", "det", "sigma_max", "gen_norm"]
    assert len(df) == 51 * 4
    assert np.max(np.abs(df["det"] - 1)) < 1e-10

    with open(os.path.join(out, "report.json")) as f:
        data = json.load(f)
    assert data["N"] == 256
    assert data["config"]["preset"] == "radial"
    assert data["steps"] == 50
    assert data["band_window"]["N_estimate_logN_bands"] == pytest.approx(8 * report.N_estimate)
    assert data["band_window"]["estimate_constant"] == pytest.approx(
        data["band_window"]["total"] / (8 * report.N_estimate))

    # Radial vorticity : no strain at any scale, the deformations stay the identity
    for state in res.trajectory.states:
        for h in state.h:
            assert frobenius_distance(h, SL2Matrix.identity()) <= 1e-9

    bands = pd.read_csv(os.path.join(out, "bands.csv"))
    assert bands["band"].iloc[-1] == "N_estimate"


@pytest.mark.parametrize("N", [256, 4096])
@pytest.mark.parametrize("name", ["quadrupole", "odd_odd", "random_bands"])
def test_run_experiment_presets(name, N):
    res = run_experiment(parse_config(config_text(preset=name, N=N, grid_n=128)))
    assert res.report.renormalizations == 0
    assert res.series.max_det_drift() <= 1e-10
    assert max(res.report.final_sigma_max) > 1


def test_run_experiment_reproducible(tmp_path):
    config = parse_config(config_text(preset="random_bands", J=3, seed=7))
    first, second = str(tmp_path / "first"), str(tmp_path / "second")
    run_experiment(config, out_dir=first)
    run_experiment(config, out_dir=second)

    for name in ("trajectory.csv", "bands.csv"):
        with open(os.path.join(first, name), "rb") as f1, open(os.path.join(second, name), "rb") as f2:
            assert f1.read() == f2.read()


def test_run_experiment_auto_N():
    res = run_experiment(parse_config(config_text(N="auto", J=2)))
    assert res.report.N == res.spectrum.N_estimate
    assert res.report.N > 1


def test_run_experiment_field(tmp_path):
    path = str(tmp_path / "omega.bin")
    write_grid(preset_vorticity("quadrupole", n=64), path)
    config = parse_config(config_text(mode="field", preset=None, field_path=path, J=2))
    res = run_experiment(config)
    assert res.omega.n == 64
    assert res.report.samples == len(res.trajectory)


def test_parse_variation():
    assert parse_value("2^8") == 256
    assert parse_value(" 12 ") == 12
    assert parse_value("0.5") == 0.5
    assert parse_value("e") == "e"

    assert parse_variation("N=2^8,2^10") == ("N", [256, 1024])
    assert parse_variation("log_base_bands=2,e") == ("log_base_bands", [2, "e"])

    with pytest.raises(ConfigException):
        parse_variation("N")
    with pytest.raises(ConfigException):
        parse_variation("N=")


def test_sweep(tmp_path):
    config = parse_config(config_text(logN_bands=0))
    out = str(tmp_path / "sweep")
    summary = sweep(config, dict(J=[2, 6], C=[0.09]), out, workers=2)

    assert list(summary["J"]) == [2, 6]
    assert summary["status"][0] == "ok"
    # logN_bands=0 : band 5 needs |xi| = 16 on a grid resolving 8
    assert summary["status"][1].startswith("failed")

    assert os.path.exists(os.path.join(out, "sweep.csv"))
    assert os.path.exists(os.path.join(out, "J=2_C=0.09", "report.json"))


def test_sweep_invalid_point(tmp_path):
    config = parse_config(config_text())
    with pytest.raises(ConfigException):
        sweep(config, dict(J=[2, 100]), str(tmp_path / "sweep"))
    assert not os.path.exists(str(tmp_path / "sweep"))


# ---- Command line

def test_cli_run(tmp_path):
    path = _write(tmp_path / "config.json", config_text(J=2))
    out = str(tmp_path / "out")
    assert main(["run", "--config", path, "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "trajectory.csv"))


def test_cli_config_errors(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["run", "--config", _write(tmp_path / "bad.json", '{"N": ')]) == 2
    assert main(["run", "--config", _write(tmp_path / "unknown.json", config_text(foo=1))]) == 2
    assert main([]) == 2
    assert main(["unknown"]) == 2


def test_cli_decompose(tmp_path):
    out = str(tmp_path / "bands.csv")
    assert main(["decompose", "--field", "preset:quadrupole", "--grid-n", "64", "--out", out]) == 0
    assert list(pd.read_csv(out)["band"])[-1] == "N_estimate"

    assert main(["decompose", "--field", str(tmp_path / "missing.bin")]) == 2
    assert main(["decompose", "--field", "preset:vortex"]) == 2


def test_cli_sweep(tmp_path):
    path = _write(tmp_path / "config.json", config_text(J=2))
    assert main(["sweep", "--config", path, "--vary", "N=2^8,2^9", "--out", str(tmp_path / "sweep")]) == 0
    assert len(pd.read_csv(str(tmp_path / "sweep" / "sweep.csv"))) == 2

    assert main(["sweep", "--config", path, "--vary", "N", "--out", str(tmp_path / "sweep2")]) == 2


def test_cli_validate_quick():
    assert main(["validate", "--quick"]) == 0
