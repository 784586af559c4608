"""Command-line entry points: run, validate, generate-case, version.

Exit codes: 0 success (or all validation cases passing), 1 usage or
configuration error, 2 validation failure, 3 numerical fault during a
run.
"""

import argparse
import os
import sys

from . import __version__
from .cases import CASE_NAMES, get_case
from .config import ConfigError, parse_parameter_file
from .fileio import (
    config_hash,
    format_float,
    write_mass_report,
    write_profile_1d,
    write_profile_2d,
)
from .timeloop import NumericalFault, run_simulation
from .validate import run_validation

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    parser = _Parser(
        prog="swekit",
        description="Finite-volume shallow-water simulation kit.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    run_p = sub.add_parser(
        "run", help="run a parameter file and write profiles + mass report")
    run_p.add_argument("paramfile", help="path to a key = value case file")
    run_p.add_argument("-o", "--output", default=None,
                       help="output directory (default: output_dir from the "
                            "file, else <name>_out beside it)")

    val_p = sub.add_parser(
        "validate", help="run the built-in benchmark set against its "
                         "tolerances")
    val_p.add_argument("-o", "--output", default="validation_out",
                       help="directory for per-case outputs and report.json")
    val_p.add_argument("--case", action="append", dest="cases",
                       choices=CASE_NAMES, metavar="NAME",
                       help="restrict to one case (repeatable); choices: "
                            + ", ".join(CASE_NAMES))

    gen_p = sub.add_parser(
        "generate-case", help="write a built-in case's parameter file, "
                              "input data and exact reference profile")
    gen_p.add_argument("case", choices=CASE_NAMES, metavar="NAME",
                       help="one of: " + ", ".join(CASE_NAMES))
    gen_p.add_argument("-o", "--output", default=".",
                       help="directory to write into (default: current)")

    sub.add_parser("version", help="print the package version")
    return parser


def _cmd_run(args):
    try:
        config = parse_parameter_file(args.paramfile)
    except OSError as exc:
        print(f"swekit run: cannot read {args.paramfile}: {exc.strerror or exc}",
              file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"swekit run: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir = args.output or config.output_dir
    if out_dir is None:
        base = os.path.dirname(os.path.abspath(args.paramfile))
        out_dir = os.path.join(base, f"{config.name}_out")
    os.makedirs(out_dir, exist_ok=True)

    with open(args.paramfile, "r", encoding="utf-8") as stream:
        cfg_hash = config_hash(stream.read())

    try:
        result = run_simulation(config)
    except NumericalFault as exc:
        print(f"swekit run: numerical fault: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    grid = config.grid
    x = grid.cell_centers_x()
    written = []
    for index, (t, state) in enumerate(result.snapshots):
        path = os.path.join(out_dir, f"state_{index:03d}.txt")
        if grid.is_1d:
            write_profile_1d(path, x, config.topography, state.h, state.q,
                             t, config.scheme.g, name=config.name,
                             cfg_hash=cfg_hash)
        else:
            write_profile_2d(path, x, grid.cell_centers_y(),
                             config.topography, state.h, state.qx, state.qy,
                             t, config.scheme.g, name=config.name,
                             cfg_hash=cfg_hash)
        written.append((path, t))
    mass_path = os.path.join(out_dir, "mass_balance.txt")
    write_mass_report(mass_path, result.mass_balance, name=config.name,
                      cfg_hash=cfg_hash)

    for path, t in written:
        print(f"wrote {path}  (t = {format_float(t)} s)")
    print(f"wrote {mass_path}")
    print(f"{config.name}: {result.steps} steps to t = "
          f"{format_float(result.final_time)} s, final change rate "
          f"{result.final_change_rate:.3e} /s, min depth "
          f"{result.min_depth_seen:.3e} m")
    for warning in result.warnings:
        print(f"warning: {warning}")
    return EXIT_OK


def _cmd_validate(args):
    all_passed, _ = run_validation(args.output,
                                   case_names=args.cases or None)
    return EXIT_OK if all_passed else EXIT_VALIDATION


def _cmd_generate_case(args):
    case = get_case(args.case)
    params_path = case.write_inputs(args.output)
    print(f"wrote {params_path}")
    for filename, _ in case.aux_files:
        print(f"wrote {os.path.join(args.output, filename)}")
    ref_path = case.write_reference(args.output)
    if ref_path:
        print(f"wrote {ref_path}  (exact reference profile)")
    print(f"run it with: swekit run {params_path}")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    if args.command == "version":
        print(f"swekit {__version__}")
        return EXIT_OK
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_generate_case(args)


if __name__ == "__main__":
    raise SystemExit(main())
