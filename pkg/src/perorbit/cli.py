"""Command-line front end.

Subcommands::

    perorbit certify      --builtin duffing --kappa 1
    perorbit hb           --builtin lin_sys --K 20
    perorbit sweep        --builtin duffing --sweep-param Omega --start 0.6 --stop 3
    perorbit floquet-map  --a 0:0.0005:0.02 --omega1 0.2:0.02:2 --out map/
    perorbit repro        thresholds --out repro/

Exit codes: 0 on success, 1 on input errors, 2 on non-convergence or a
failed reproduction check.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, continuation, existence, floquet, harmonic_balance, reproduce
from .model import BUILTINS, MechanicalSystem, load_system

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2

# builtin-specific shortcuts, each an alias for ``--param NAME=value``
SHORTCUTS = ("kappa", "cp", "fbar", "c", "f", "Omega", "omega2", "f_m")

log = logging.getLogger("perorbit")


class InputError(Exception):
    """Malformed command-line input or system file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def parse_range(text: str) -> np.ndarray:
    """``lo:step:hi`` (inclusive) or a single value into a grid."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise InputError(f"bad range {text!r}; expected lo:step:hi") from None
    if len(vals) == 1:
        return np.array(vals)
    if len(vals) != 3 or vals[1] <= 0 or vals[2] < vals[0]:
        raise InputError(f"bad range {text!r}; expected lo:step:hi with step > 0 and hi >= lo")
    lo, step, hi = vals
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def parse_params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise InputError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            raise InputError(f"--param {k}: value {v!r} is not a number or JSON literal") from None
    return out


def builder_params(args) -> dict:
    params = parse_params(getattr(args, "param", None))
    for name in SHORTCUTS:
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    return params


def load(args) -> MechanicalSystem:
    if args.input:
        try:
            return load_system(args.input)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot load {args.input}: {exc}") from None
    name = args.builtin or "duffing"
    if name not in BUILTINS:
        raise InputError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTINS))}")
    try:
        return BUILTINS[name](**builder_params(args))
    except TypeError as exc:
        raise InputError(f"builtin {name}: {exc}") from None


def run_config(args) -> dict:
    """Everything that determines the outputs; the output directory is excluded."""
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "func", "verbose", "jobs")}
    cfg["version"] = __version__
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:16]


def header(args) -> str:
    cfg = run_config(args)
    return f"# perorbit {__version__}\n# config {config_hash(cfg)}\n# seed {args.seed}\n"


def emit(args, name: str, text: str, csv_like: bool = True):
    """Write to ``--out/name`` or stdout; CSV gets the comment header."""
    body = (header(args) + text) if csv_like else text
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(body)
    else:
        sys.stdout.write(body)


def _json(obj) -> str:
    return json.dumps(reproduce._jsonable(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_certify(args) -> int:
    system = load(args)
    rep = existence.certify(system, seed=args.seed)
    emit(args, "certificate.json", _json(rep.to_dict()), csv_like=False)
    return EXIT_OK


def cmd_hb(args) -> int:
    system = load(args)
    sol = harmonic_balance.hb_solve(system, omega=args.omega, K=args.K, tol=args.tol,
                                    n_samples=args.samples)
    summary = {"omega": sol.omega, "K": sol.ansatz.K, "amplitude": sol.amplitude.tolist(),
               "residual_norm": sol.residual_norm, "iterations": sol.iterations, "status": sol.status}
    if args.out:
        emit(args, "hb.csv", sol.to_csv())
        emit(args, "hb.json", sol.to_json(indent=2, sort_keys=True) + "\n", csv_like=False)
    sys.stdout.write(_json(summary))
    return EXIT_OK if sol.converged else EXIT_NUMERIC


def cmd_sweep(args) -> int:
    system = load(args)
    if args.natural:
        br = continuation.sweep_natural(system, args.sweep_param, args.start, args.stop, K=args.K,
                                        step=args.ds, tol=args.tol, omega=args.omega)
    else:
        br = continuation.sweep_arclength(system, args.sweep_param, args.start, args.stop, K=args.K,
                                          ds=args.ds or 0.05, ds_max=args.ds_max, tol=args.tol,
                                          omega=args.omega)
    if args.stability and br.points:
        continuation.tag_stability(br, system, rtol=args.rtol, atol=args.atol)
    emit(args, "branch.csv", br.to_csv())
    if args.out:
        emit(args, "branch.json", br.to_json() + "\n", csv_like=False)
    log.info("sweep %s: %d points, %d folds", br.status, len(br.points), len(br.folds))
    return EXIT_OK if br.status == "complete" else EXIT_NUMERIC


def cmd_floquet_map(args) -> int:
    params = parse_params(args.param)
    try:
        mp = floquet.MapParams(rtol=args.rtol, atol=args.atol, **params)
    except TypeError as exc:
        raise InputError(f"floquet-map: {exc}") from None
    m = floquet.stability_map(parse_range(args.a), parse_range(args.omega1), mp, jobs=args.jobs)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "stability_grid.csv").write_text(header(args) + m.grid_csv())
    (out / "stability_boundary.csv").write_text(header(args) + m.boundary_csv())
    sys.stdout.write(_json({"cells": int(m.max_modulus.size), "unstable": int((~m.stable).sum()),
                            "boundary_points": len(m.boundary), "out": str(out)}))
    return EXIT_OK


def cmd_repro(args) -> int:
    out = Path(args.out or "repro")
    try:
        checks = reproduce.run(args.subset, out, header(args), args.seed, jobs=args.jobs)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        print("failed: " + ", ".join(f"[{c.criterion}] {c.name}" for c in failed), file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(p, system: bool = True):
    p.add_argument("--out", help="output directory (default: stdout where applicable)")
    p.add_argument("--seed", type=int, default=0, help="seed for every randomized scan")
    p.add_argument("--rtol", type=float, default=floquet.RTOL, help="integrator relative tolerance")
    p.add_argument("--atol", type=float, default=floquet.ATOL, help="integrator absolute tolerance")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (env PERORBIT_JOBS)")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="override a builder default")
    if system:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--builtin", help=f"built-in system: {', '.join(sorted(BUILTINS))}")
        src.add_argument("--input", help="JSON system file")
        for name in SHORTCUTS:
            p.add_argument(f"--{name}", type=float, default=None, help=f"shortcut for --param {name}=VALUE")
        p.add_argument("--K", type=int, default=7, help="number of harmonics")
        p.add_argument("--omega", type=float, default=None, help="fundamental frequency (default: forcing)")
        p.add_argument("--tol", type=float, default=harmonic_balance.DEFAULT_TOL, help="residual tolerance")
        p.add_argument("--samples", type=int, default=None, help="AFT time samples per period")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="perorbit", description="Periodic orbits of forced mechanical systems.")
    parser.add_argument("--version", action="version", version=f"perorbit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="existence certificate as JSON")
    _common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("hb", help="harmonic-balance solve")
    _common(p)
    p.set_defaults(func=cmd_hb)

    p = sub.add_parser("sweep", help="continuation in Omega or the forcing scale f")
    _common(p)
    p.add_argument("--sweep-param", choices=continuation.PARAMS, default="Omega")
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--ds", type=float, default=None, help="initial step")
    p.add_argument("--ds-max", type=float, default=0.25, help="largest arclength step")
    p.add_argument("--natural", action="store_true", help="natural-parameter stepping instead of arclength")
    p.add_argument("--stability", action="store_true", help="tag points by Floquet multipliers")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("floquet-map", help="stability chart of the parametrically excited oscillator")
    _common(p, system=False)
    p.add_argument("--a", required=True, help="forcing amplitudes lo:step:hi")
    p.add_argument("--omega1", required=True, help="natural frequencies lo:step:hi")
    p.set_defaults(func=cmd_floquet_map)

    p = sub.add_parser("repro", help="regenerate reference artifacts and grade them")
    _common(p, system=False)
    p.add_argument("subset", nargs="?", default="all", choices=sorted(reproduce.SUBSETS) + ["all"])
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"perorbit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
