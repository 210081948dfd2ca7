"""Command-line front end.

Exit status: 0 when no violations were found, 1 when a checked enclosure or
bound is violated, 2 for unreadable input or bad arguments, 3 when a
numerical routine fails.
"""
from __future__ import annotations

import argparse
import datetime
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import blocks, krein, sturm
from .ensembles import COMMANDS as ENSEMBLE_COMMANDS
from .ensembles import ENSEMBLE_TOLERANCES, run_ensemble
from .io import ParseError, dumps_json, parse_block, parse_pair, parse_problem, spectrum_csv
from .krein import NumericalError
from .perturbation import bounds_main1, spectral_projections, tau_quadrature, verify_main1

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_NUMERICAL = 3

OUTPUT_ENV = "KREINSPEC_OUTPUT_DIR"

# tolerance overrides accepted through --tol NAME=VALUE
TOLERANCE_NAMES = ("tol_real", "tol_type", "boundary_tol")


class UsageError(Exception):
    pass


def _tolerances(overrides):
    tol = {
        "tol_real": krein.TOL_REAL,
        "tol_type": krein.TOL_TYPE,
        "tol_sym": krein.TOL_SYM,
        "boundary_tol": 1e-10,
        "region_inflation": "max(1e-8, 1e-10 * spectral_radius)",
        "strip_relative": sturm.STRIP_TOL,
        "resolvent_ratio": sturm.TOL_DISC,
        "tau0_flag": sturm.TAU0_FLAG,
        "tau0_fail": sturm.TAU0_FAIL,
    }
    tol.update(ENSEMBLE_TOLERANCES)
    tol.update(overrides)
    return tol


def _parse_overrides(items):
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or name not in TOLERANCE_NAMES:
            raise UsageError(f"--tol expects NAME=VALUE with NAME in {TOLERANCE_NAMES}, got {item!r}")
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"tolerance {name} must be a number") from None
        if not out[name] > 0:
            raise UsageError(f"tolerance {name} must be positive")
    return out


def _read_input(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _problem_from_args(args):
    if args.input:
        return parse_problem(_read_input(args.input))
    if args.potential is None:
        raise UsageError("give --input or --potential")
    try:
        return sturm.SturmLiouvilleProblem(args.L, args.n, sturm.Potential.parse(args.potential))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _cmd_block(args, tol):
    if args.input and args.example:
        raise UsageError("--input and --example are exclusive")
    if args.example == "sharp":
        if args.z is None:
            raise UsageError("--example sharp needs --z")
        b = blocks.sharp_example(complex(args.z))
    elif args.input:
        b = parse_block(_read_input(args.input))
    else:
        raise UsageError("give --input or --example")
    rep = blocks.enclosure(b, boundary_tol=tol["boundary_tol"], with_resolvent=args.resolvent)
    result = rep.to_dict()
    if args.example == "sharp":
        result["closed_form"] = [complex(z) for z in blocks.sharp_eigenvalues(complex(args.z))]
    return result, len(rep.violations), rep.points


def _cmd_perturb(args, tol):
    if not args.input:
        raise UsageError("perturb needs --input")
    pair = parse_pair(_read_input(args.input))
    tau0 = None
    if args.tau_method == "quadrature":
        tau0 = tau_quadrature(pair.a0, n=args.cutoff).value
    rep = verify_main1(pair, bounds_main1(pair, tau0))
    return rep.to_dict(), len(rep.violations), rep.points


def _cmd_sl_solve(args, tol):
    p = _problem_from_args(args)
    rep = sturm.solve_and_verify(p, tol["tol_real"], tol["tol_type"])
    return {"problem": p.to_dict(), "eigenvalues": [pt.to_dict() for pt in rep.points],
            "n_nonreal": len(rep.nonreal())}, 0, rep.points


def _cmd_sl_verify(args, tol):
    p = _problem_from_args(args)
    rep = sturm.solve_and_verify(p, tol["tol_real"], tol["tol_type"])
    if args.truncation_check:
        sturm.truncation_check(rep)
    result = rep.to_dict(with_spectrum=False)
    try:
        result["tails"] = sturm.tail_regime(*sturm.m_endpoints(p))
    except ValueError:
        result["tails"] = None
    return result, len(rep.violations), rep.points


def _cmd_tau(args, tol):
    if args.input:
        pair = parse_pair(_read_input(args.input))
        est = tau_quadrature(pair.a0, n=args.cutoff)
        est.exact = spectral_projections(pair.a0).tau
        return est.to_dict(), 0, None
    p = sturm.SturmLiouvilleProblem.free(args.L, args.n)
    rep = sturm.tau0_estimate_sl(p, n_cutoff=args.cutoff)
    return rep.to_dict(), int(rep.failed), None


def _cmd_ensemble(args, tol):
    out = run_ensemble(args.command, args.trials, args.seed, args.workers)
    return out, out["summary"]["violations"], None


HANDLERS = {
    "block": _cmd_block,
    "perturb": _cmd_perturb,
    "sl-solve": _cmd_sl_solve,
    "sl-verify": _cmd_sl_verify,
    "tau": _cmd_tau,
    "ensemble": _cmd_ensemble,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="kreinspec", description="Spectral enclosures for J-selfadjoint operators.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help=f"report path (default: ${OUTPUT_ENV}/<command>.<ext> or stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override a tolerance")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("block", parents=[common], help="block operator enclosure")
    p.add_argument("--input", "-i")
    p.add_argument("--example", choices=("sharp",))
    p.add_argument("--z", type=complex)
    p.add_argument("--resolvent", action="store_true", help="also estimate the order-one resolvent constant")

    p = sub.add_parser("perturb", parents=[common], help="perturbation of a non-negative operator")
    p.add_argument("--input", "-i")
    p.add_argument("--tau-method", choices=("exact", "quadrature"), default="exact")
    p.add_argument("--cutoff", type=float, default=1e8)

    for name in ("sl-solve", "sl-verify"):
        p = sub.add_parser(name, parents=[common], help="indefinite Sturm-Liouville spectrum")
        p.add_argument("--input", "-i", help="problem file")
        p.add_argument("--potential", help="constant:C | step:A,B,DEPTH | gaussian_well:C,W,DEPTH")
        p.add_argument("--L", type=float, default=40.0)
        p.add_argument("--n", type=int, default=2000)
        if name == "sl-verify":
            p.add_argument("--truncation-check", action="store_true", help="re-solve with L doubled")

    p = sub.add_parser("tau", parents=[common], help="tau0 by quadrature and exactly")
    p.add_argument("--input", "-i", help="perturbation file; its A0 is used")
    p.add_argument("--L", type=float, default=20.0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--cutoff", type=float, default=1e8)

    p = sub.add_parser("ensemble", parents=[common], help="seeded random verification suite")
    p.add_argument("--command", required=True, choices=sorted(ENSEMBLE_COMMANDS))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _config_echo(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("output",)}
    cfg["subcommand"] = cfg.pop("cmd")
    for k, v in cfg.items():
        if isinstance(v, complex):
            cfg[k] = [v.real, v.imag]
    return cfg


def _destination(args, ext):
    if args.output:
        return Path(args.output)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env) / f"{args.cmd}.{ext}"
    return None


def _write(path, text, args):
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    meta = {
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "argv": sys.argv[1:],
    }
    path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = _tolerances(_parse_overrides(args.tol))
        result, n_viol, points = HANDLERS[args.cmd](args, tol)
    except (UsageError, ParseError) as exc:
        print(f"kreinspec: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"kreinspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"kreinspec: error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    status = EXIT_VIOLATION if n_viol else EXIT_OK
    if args.format == "csv":
        if points is None:
            print(f"kreinspec: error: {args.cmd} has no spectrum to write as CSV", file=sys.stderr)
            return EXIT_PARSE
        _write(_destination(args, "csv"), spectrum_csv(points), args)
        return status

    report = {
        "version": __version__,
        "config": _config_echo(args),
        "tolerances": tol,
        "violations": n_viol,
        "status": status,
        "result": result,
    }
    dest = _destination(args, "json")
    _write(dest, dumps_json(report), args)
    if args.cmd == "sl-verify" and dest is not None and points is not None:
        _write(dest.with_suffix(".spectrum.csv"), spectrum_csv(points), args)
    return status


if __name__ == "__main__":
    sys.exit(main())
