"""
Command line : euler-cascade {run, decompose, sweep, validate}

Exit codes : 0 on success, 1 on validation failure or runtime error, 2 on configuration error.
"""
import argparse
import os
import sys

from tabulate import tabulate

from .base_utils import CascadeException, ConfigException, error, set_debug
from .config import read_config
from .experiment import parse_variation, run_experiment, sweep
from .io import read_grid, write_bands
from .littlewood_paley import gradient_bands_from_vorticity, resample_grid
from .params import list_parameters
from .presets import preset_vorticity
from .validation import validate

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

PRESET_PREFIX = "preset:"


def _run(args):
    config = read_config(args.config)
    res = run_experiment(config, out_dir=args.out)
    report = res.report
    print(tabulate([
        ["N", report.N],
        ["N_estimate", report.N_estimate],
        ["T", report.T],
        ["steps", report.steps],
        ["renormalizations", report.renormalizations],
        ["max sigma_max", max(report.final_sigma_max)],
        ["wall time (s)", report.wall_time]]))
    return EXIT_OK


def _load_field(spec, grid_n):
    if spec.startswith(PRESET_PREFIX):
        name = spec[len(PRESET_PREFIX):]
        return preset_vorticity(name, n=grid_n or 256)

    if not os.path.exists(spec):
        raise ConfigException("field file not found : %s" % spec)
    field = read_grid(spec)
    if grid_n:
        field = resample_grid(field, grid_n)
    return field


def _decompose(args):
    field = _load_field(args.field, args.grid_n)
    spectrum = gradient_bands_from_vorticity(field)
    print(tabulate(spectrum.to_frame(), headers="keys"))
    print(tabulate([
        ["N_estimate", spectrum.N_estimate],
        ["sup_j", spectrum.sup_norm],
        ["tail", spectrum.tail_norm]]))
    if args.out:
        write_bands(spectrum, args.out)
    return EXIT_OK


def _sweep(args):
    config = read_config(args.config)
    variations = dict(parse_variation(text) for text in args.vary)
    summary = sweep(config, variations, args.out)
    print(tabulate(summary, headers="keys", showindex=False))
    return EXIT_OK if all(summary["status"] == "ok") else EXIT_FAILURE


def _validate(args):
    checks = validate(quick=args.quick)
    print(tabulate(checks, headers="keys", showindex=False))
    failed = int((~checks["passed"]).sum())
    if failed:
        error("%d check(s) failed" % failed)
        return EXIT_FAILURE
    print("All %d checks passed" % len(checks))
    return EXIT_OK


def _parser():
    parser = argparse.ArgumentParser(prog="euler-cascade", description="Multiscale SL(2) model of 2D Euler growth")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name, func, **kwargs):
        sub = commands.add_parser(name, **kwargs)
        sub.add_argument("--debug", action="store_true", help="Print debug logs")
        sub.set_defaults(func=func)
        return sub

    run = command("run", _run, help="Run the model from a JSON config",
                  formatter_class=argparse.RawDescriptionHelpFormatter,
                  epilog="Configuration keys :\n\n" + list_parameters())
    run.add_argument("--config", required=True, help="JSON configuration")
    run.add_argument("--out", help="Output directory (overrides out_dir)")

    decompose = command("decompose", _decompose, help="Band norms of grad u and N_estimate of a field")
    decompose.add_argument("--field", required=True, help="Grid2D file, or preset:<name>")
    decompose.add_argument("--grid-n", type=int, help="Preset grid size, or resampling size of the file")
    decompose.add_argument("--out", help="Write the band norms as CSV")

    sweep_cmd = command("sweep", _sweep, help="Run the cartesian product of parameter values")
    sweep_cmd.add_argument("--config", required=True, help="Base JSON configuration")
    sweep_cmd.add_argument("--vary", action="append", required=True,
                           help="KEY=v1,v2,... ; values may be written 2^k. Repeatable")
    sweep_cmd.add_argument("--out", required=True, help="Output directory, one subdirectory per point")

    validate_cmd = command("validate", _validate, help="Run the oracle suites")
    validate_cmd.add_argument("--quick", action="store_true", help="Skip the slower suites")

    return parser


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK

    set_debug(args.debug)
    try:
        return args.func(args)
    except ConfigException as e:
        error("Configuration error : %s" % e)
        return EXIT_CONFIG
    except CascadeException as e:
        error("Error : %s" % e)
        return EXIT_FAILURE
    finally:
        set_debug(False)


if __name__ == "__main__":
    sys.exit(main())
