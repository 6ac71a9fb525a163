"""``sagnac-bell`` command line.

Exit status: 0 on success, 1 on invalid input or usage, 2 when a fit does
not converge.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import io as sbio
from .bell import TARGETS, chsh
from .errors import ConvergenceError, DomainError, FitError
from .fitting import KINDS, dataset_visibility, fit_channel, fit_fringe
from .pipeline import RunConfig, format_summary, reproduce, visibility_csv
from .simulator import SimulationConfig, simulate_chsh, simulate_sweep
from .tomography import partial_tomography

log = logging.getLogger("sagnacbell")

EXIT_OK, EXIT_INPUT, EXIT_FIT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(payload, args, csv_text=None):
    """Write a report as JSON or flat CSV to ``args.output`` or stdout."""
    if args.format == "csv":
        text = csv_text if csv_text is not None else sbio.report_to_csv(payload)
    else:
        text = sbio.dumps(payload)
    if args.output:
        Path(args.output).write_text(text)
        log.info("wrote %s", args.output)
    else:
        sys.stdout.write(text)


def _load_config(args):
    config = sbio.read_config(args.config) if args.config else SimulationConfig()
    if args.seed is not None:
        config.rng_seed = args.seed
    if getattr(args, "noiseless", False):
        config.noiseless = True
    config.validate()
    return config


def cmd_simulate_sweep(args):
    data = simulate_sweep(_load_config(args), args.mode)
    text = sbio.sweep_to_csv(data)
    if args.output:
        Path(args.output).write_text(text)
        log.info("wrote %d rows to %s", len(data), args.output)
    else:
        sys.stdout.write(text)


def cmd_simulate_chsh(args):
    grid = simulate_chsh(_load_config(args), args.target, args.omega)
    _emit(sbio.grid_to_dict(grid), args)


def cmd_fit_fringes(args):
    data = sbio.read_sweep_csv(args.csv)
    channels = args.channel or list(data.channels)
    reports = {ch: fit_channel(data, ch, args.model).to_dict() for ch in channels}
    _emit(reports[channels[0]] if len(channels) == 1 else reports, args)


def cmd_visibility(args):
    data = sbio.read_sweep_csv(args.csv)
    v, sv, valid = dataset_visibility(data)
    if not args.fit:
        payload = {"omega_mean": data.omega_mean.tolist(),
                   "V": [None if math.isnan(x) else float(x) for x in v],
                   "sigma_V": [None if math.isnan(x) else float(x) for x in sv]}
        _emit(payload, args, visibility_csv(data.omega_mean, v, sv))
        return
    report = fit_fringe(data.omega_mean[valid], v[valid], "cosine", sigma=sv[valid])
    _emit(report.to_dict(), args)


def cmd_chsh(args):
    grid = sbio.read_grid(args.grid)
    _emit(chsh(grid).to_dict(), args)


def cmd_tomography(args):
    grid = sbio.read_grid(args.grid)
    _emit(partial_tomography(grid, args.target, clip_sigmas=args.clip_sigmas).to_dict(), args)


def cmd_reproduce(args):
    run = RunConfig.from_dict(sbio.read_json(args.config)) if args.config else RunConfig()
    if args.seed is not None:
        run.seed = args.seed
    summary = reproduce(run, args.output_dir)
    if args.format == "csv":
        sys.stdout.write(sbio.report_to_csv(summary))
    elif not args.quiet:
        print(format_summary(summary))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report format (default json)")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="sagnac-bell", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate-sweep", parents=[common], help="counts versus angular velocity")
    p.add_argument("--config", help="simulation config JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("pairs", "singles"), default="pairs")
    p.add_argument("--noiseless", action="store_true", help="emit expected counts")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate_sweep)

    p = sub.add_parser("simulate-chsh", parents=[common], help="16-cell CHSH count grid")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--target", choices=TARGETS, default="phi_minus")
    p.add_argument("--omega", type=float, default=0.0, help="angular velocity, rad/s")
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate_chsh)

    p = sub.add_parser("fit-fringes", parents=[common], help="fit fringe models to a sweep CSV")
    p.add_argument("csv")
    p.add_argument("--channel", action="append", help="channel to fit (repeatable; default all)")
    p.add_argument("--model", choices=sorted(KINDS), help="default follows the channel wiring")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fit_fringes)

    p = sub.add_parser("visibility", parents=[common], help="pair visibility curve")
    p.add_argument("csv")
    p.add_argument("--fit", action="store_true", help="fit A cos(2 S_T W + o) + D to the curve")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("chsh", parents=[common], help="CHSH value of a count grid")
    p.add_argument("grid")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("tomography", parents=[common], help="bounded density matrix")
    p.add_argument("grid")
    p.add_argument("--target", choices=TARGETS)
    p.add_argument("--clip-sigmas", type=float, default=3.0,
                   help="clip a pinned coherence to its bound if within this many sigma")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("reproduce-paper", parents=[common],
                       help="simulate, fit, CHSH and tomography with the published parameters")
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output-dir", default="reproduction")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr, force=True)
    try:
        args.func(args)
    except ConvergenceError as exc:
        print(f"fit did not converge: {exc} ({exc.diagnostic})", file=sys.stderr)
        return EXIT_FIT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
