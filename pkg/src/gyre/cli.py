"""Command-line front end.

Subcommands
-----------
trace      solve along ``Re tau = r_min, r_min + step, ...`` and write the curve as CSV
solve      solve the period condition on one vertical line and print ``tau`` and ``theta``
intersect  estimate ``Im tau`` where the family meets its right edge (tD / rPD)
catenoid   twisted catenoid at ``theta = pi/2`` as OBJ
surface    ribbon (or fundamental unit) at a solved point as OBJ
flat       flat structures of the lower strip as SVG
validate   run self-check suites and print a pass/fail table

Exit status: 0 on success, 2 when a validation check fails, 1 on any error
(including usage errors).  Every flag can also be given in a JSON file passed
with ``--config``; flags on the command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass
from typing import Sequence

from . import __version__

EXIT_OK, EXIT_ERROR, EXIT_VALIDATION = 0, 1, 2

DEFAULT_RESIDUAL_TOL = 1e-10
DEFAULT_QUAD_TOL = 1e-12
DEFAULT_SEAM_TOL = 1e-5

_TAU_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?([+-](\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?i$")


class UsageError(Exception):
    """Bad command line or configuration."""


def parse_tau(text: str) -> complex:
    """Parse ``a+bi`` (or ``bi``) without spaces into a point of the upper half-plane."""
    text = str(text)
    if not _TAU_RE.match(text):
        raise argparse.ArgumentTypeError(f"tau must look like 'a+bi' without spaces, got {text!r}")
    tau = complex(text[:-1] + "j")
    if tau.imag <= 0:
        raise argparse.ArgumentTypeError(f"tau must have positive imaginary part, got {text!r}")
    return tau


def format_tau(tau: complex) -> str:
    return f"{tau.real:.12g}{tau.imag:+.12g}i"


@dataclass(frozen=True)
class JobConfig:
    """Validated settings shared by the subcommands."""

    family: str = "T"
    pitch: int = 1
    tau: complex | None = None
    r_min: float | None = None
    r_max: float | None = None
    step: float | None = None
    nu: int = 32
    nv: int = 12
    out: str | None = None
    residual_tol: float = DEFAULT_RESIDUAL_TOL
    quad_tol: float = DEFAULT_QUAD_TOL

    def __post_init__(self):
        if self.family not in ("T", "R"):
            raise UsageError(f"family must be T or R, got {self.family!r}")
        if self.pitch < 1:
            raise UsageError("pitch must be a positive integer")
        ranged = any(v is not None for v in (self.r_min, self.r_max, self.step))
        if self.tau is not None and ranged:
            raise UsageError("give either a single tau or a Re tau range, not both")
        if self.step is not None and self.step <= 0:
            raise UsageError("step must be positive")
        if self.residual_tol <= 0 or self.quad_tol <= 0:
            raise UsageError("tolerances must be positive")
        if self.nu < 3 or self.nv < 1:
            raise UsageError("need --nu >= 3 and --nv >= 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, tol: bool = True) -> None:
    p.add_argument("--family", choices=("T", "R"), default="T", help="T (tG) or R (rGL) family (default: T)")
    p.add_argument("--pitch", type=int, default=1, help="pitch ratio p (default: 1)")
    if tol:
        p.add_argument("--residual-tol", type=float, default=DEFAULT_RESIDUAL_TOL, help="accepted |theta_h - theta_v| (default: 1e-10)")
        p.add_argument("--quad-tol", type=float, default=DEFAULT_QUAD_TOL, help="quadrature tolerance (default: 1e-12)")


def _mesh_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nu", type=int, default=32, help="grid columns per strip period (default: 32)")
    p.add_argument("--nv", type=int, default=12, help="grid rows across the strip (default: 12)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gyre", description="tG / rGL minimal surfaces: period condition, family curves and meshes.")
    parser.add_argument("--version", action="version", version=f"gyre {__version__}")
    parser.add_argument("--config", help="JSON file with flag values (keys as flag names, '-' or '_')")
    sub = parser.add_subparsers(dest="command", metavar="{trace,solve,intersect,catenoid,surface,flat,validate}", parser_class=_Parser)

    p = sub.add_parser("trace", help="trace a family curve and write it as CSV")
    _common(p)
    p.add_argument("--r-min", type=float, default=-0.95, help="first Re tau (default: -0.95)")
    p.add_argument("--r-max", type=float, default=None, help="last Re tau (default: 0.95 for T, 0.45 for R)")
    p.add_argument("--step", type=float, default=0.05, help="Re tau step (default: 0.05)")
    p.add_argument("--out", default="-", help="CSV path, '-' for standard output (default: -)")

    p = sub.add_parser("solve", help="solve the period condition on one vertical line")
    _common(p)
    p.add_argument("--r", type=float, required=True, help="Re tau of the vertical line")
    p.add_argument("--t-min", type=float, default=0.05, help="lower end of the Im tau scan (default: 0.05)")
    p.add_argument("--t-max", type=float, default=20.0, help="upper end of the Im tau scan (default: 20)")

    p = sub.add_parser("intersect", help="Im tau where the family meets its right edge")
    _common(p, tol=False)
    p.add_argument("--k-min", type=int, default=4, help="closest approach 2^-k starts at k_min (default: 4)")
    p.add_argument("--k-max", type=int, default=9, help="... and ends at k_max (default: 9)")

    p = sub.add_parser("catenoid", help="twisted catenoid (theta = pi/2) as OBJ")
    _common(p, tol=False)
    p.add_argument("--tau", type=parse_tau, required=True, help="torus modulus as a+bi")
    _mesh_flags(p)
    p.add_argument("--out", required=True, help="OBJ path")

    p = sub.add_parser("surface", help="ribbon or fundamental unit at a solved point as OBJ")
    _common(p)
    p.add_argument("--r", type=float, required=True, help="Re tau of the solved point")
    p.add_argument("--turns", type=int, default=1, help="strip periods of the ribbon (default: 1)")
    p.add_argument("--unit", action="store_true", help="assemble the fundamental unit of two ribbons")
    p.add_argument("--seam-tol", type=float, default=DEFAULT_SEAM_TOL, help="seam tolerance relative to the diameter (default: 1e-5)")
    _mesh_flags(p)
    p.add_argument("--out", required=True, help="OBJ path")

    p = sub.add_parser("flat", help="flat structures of the lower strip as SVG")
    _common(p, tol=False)
    p.add_argument("--tau", type=parse_tau, required=True, help="torus modulus as a+bi")
    p.add_argument("--theta", type=float, default=0.0, help="associate angle (default: 0)")
    p.add_argument("--map", choices=("Phi1", "Phi2"), default="Phi1", help="developing map (default: Phi1)")
    p.add_argument("--samples", type=int, default=16, help="samples per edge (default: 16)")
    p.add_argument("--out", required=True, help="SVG path")

    p = sub.add_parser("validate", help="run self-check suites and print a pass/fail table")
    p.add_argument(
        "--suite",
        choices=("identities", "asymptotics", "closedform", "period-invariants", "all"),
        default="all",
        help="suite to run (default: all)",
    )
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as err:
        raise UsageError(f"cannot read config {path!r}: {err.strerror or err}") from err
    except json.JSONDecodeError as err:
        raise UsageError(f"config {path!r} is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise UsageError(f"config {path!r} must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in raw.items()}


_VALUE_FLAGS = ("--tau", "--r", "--r-min", "--r-max", "--theta")


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Attach values such as ``-0.5+1i`` to their flag so they are not taken for options."""
    out, i = [], 0
    argv = list(argv)
    while i < len(argv):
        w = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if w in _VALUE_FLAGS and re.match(r"^-[\d.]", nxt):
            out.append(f"{w}={nxt}")
            i += 2
        else:
            out.append(w)
            i += 1
    return out


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    """Parse ``argv``; values from ``--config`` become defaults of the chosen subcommand."""
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(_glue_values(argv))
    if known.config:
        conf = _load_config(known.config)
        words = [w for w in rest if not w.startswith("-")]
        subs = parser._subparsers._group_actions[0].choices
        command = next((w for w in words if w in subs), conf.pop("command", None))
        if command not in subs:
            raise UsageError("gyre: a subcommand is required (see --help)")
        if command not in rest:
            rest = [command] + rest
        conf.pop("command", None)
        sub = subs[command]
        actions = {a.dest: a for a in sub._actions if a.dest != "help"}
        unknown = sorted(set(conf) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
        for key, val in conf.items():
            action = actions[key]
            if action.type is not None and isinstance(val, str):
                try:
                    val = action.type(val)
                except (ValueError, argparse.ArgumentTypeError) as err:
                    raise UsageError(f"config value for {key!r}: {err}") from err
            if action.choices is not None and val not in action.choices:
                raise UsageError(f"config value for {key!r} must be one of {', '.join(map(str, action.choices))}")
            sub.set_defaults(**{key: val})
            action.required = False
    args = parser.parse_args(rest)
    if args.command is None:
        raise UsageError("gyre: a subcommand is required (see --help)")
    args.config = known.config
    return args


def _config(args, **extra) -> JobConfig:
    fields = {f: getattr(args, f) for f in ("family", "pitch", "nu", "nv", "out", "residual_tol", "quad_tol") if hasattr(args, f)}
    fields.update(extra)
    return JobConfig(**fields)


# -- commands ------------------------------------------------------------------------


def cmd_trace(args, out) -> int:
    from .geometry import export_csv_curve, format_csv_curve
    from .period import trace_family

    r_max = args.r_max if args.r_max is not None else (0.95 if args.family == "T" else 0.45)
    cfg = _config(args, r_min=args.r_min, r_max=r_max, step=args.step)
    curve = trace_family(cfg.family, cfg.pitch, cfg.r_min, cfg.r_max, cfg.step, tol=cfg.quad_tol, residual_tol=cfg.residual_tol)
    if cfg.out in (None, "-"):
        out.write(format_csv_curve(curve))
    else:
        export_csv_curve(curve, cfg.out)
        out.write(f"wrote {len(curve.points)} rows to {cfg.out}\n")
    return EXIT_OK


def cmd_solve(args, out) -> int:
    from .period import solve_on_vertical

    cfg = _config(args)
    pt = solve_on_vertical(args.r, cfg.family, cfg.pitch, t_min=args.t_min, t_max=args.t_max, tol=cfg.quad_tol, residual_tol=cfg.residual_tol)
    out.write(f"tau={format_tau(pt.tau)} theta={pt.theta:.12g} residual={pt.residual:.3g}\n")
    for t in pt.other_roots:
        out.write(f"other_root_im_tau={t:.12g}\n")
    return EXIT_OK


def cmd_intersect(args, out) -> int:
    from .period import locate_intersection

    _config(args)
    res = locate_intersection(args.family, k_min=args.k_min, k_max=args.k_max)
    out.write(f"im_tau={res.im_tau:.10f} error_estimate={res.error_estimate:.2g} cross_check={res.cross_check:.10f}\n")
    return EXIT_OK


def cmd_catenoid(args, out) -> int:
    from .geometry import catenoid_mesh, export_obj
    from .weierstrass import WeierstrassData

    cfg = _config(args, tau=args.tau)
    mesh = catenoid_mesh(WeierstrassData(cfg.family, cfg.tau, math.pi / 2), cfg.nu, cfg.nv)
    export_obj(mesh, cfg.out)
    out.write(f"wrote {len(mesh.vertices)} vertices, {len(mesh.quads)} quads to {cfg.out}\n")
    return EXIT_OK


def cmd_surface(args, out) -> int:
    from .geometry import export_obj, fundamental_unit, ribbon_mesh
    from .period import solve_on_vertical
    from .weierstrass import WeierstrassData

    cfg = _config(args)
    if args.turns < 1 or args.seam_tol <= 0:
        raise UsageError("need --turns >= 1 and a positive --seam-tol")
    pt = solve_on_vertical(args.r, cfg.family, cfg.pitch, tol=cfg.quad_tol, residual_tol=cfg.residual_tol)
    data = WeierstrassData(cfg.family, pt.tau, pt.theta)
    mesh = ribbon_mesh(data, cfg.nu, cfg.nv, args.turns, cfg.pitch)
    if args.unit:
        mesh = fundamental_unit(mesh, data, args.seam_tol)
    export_obj(mesh, cfg.out)
    out.write(f"tau={format_tau(pt.tau)} theta={pt.theta:.12g}: wrote {len(mesh.vertices)} vertices to {cfg.out}\n")
    if mesh.lattice_vectors is not None:
        for v in mesh.lattice_vectors:
            out.write("lattice " + " ".join(f"{c:.9g}" for c in v) + "\n")
    return EXIT_OK


def cmd_flat(args, out) -> int:
    from .geometry import export_svg_flat
    from .weierstrass import WeierstrassData, flat_structure

    cfg = _config(args, tau=args.tau)
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    lines = flat_structure(WeierstrassData(cfg.family, cfg.tau, args.theta), args.map, args.samples)
    export_svg_flat(lines, cfg.out)
    out.write(f"wrote {len(lines)} polylines to {cfg.out}\n")
    return EXIT_OK


def cmd_validate(args, out) -> int:
    from .validation import SUITES, run_suite

    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    out.write(f"{'suite':<18} {'check':<46} {'value':>10} {'bound':>10}  result\n")
    for name in names:
        for c in run_suite(name):
            ok &= c.passed
            out.write(f"{name:<18} {c.name:<46} {c.value:>10.3g} {c.bound:>10.3g}  {'PASS' if c.passed else 'FAIL'}\n")
    out.write("all checks passed\n" if ok else "some checks FAILED\n")
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "trace": cmd_trace,
    "solve": cmd_solve,
    "intersect": cmd_intersect,
    "catenoid": cmd_catenoid,
    "surface": cmd_surface,
    "flat": cmd_flat,
    "validate": cmd_validate,
}


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    """Run the CLI and return the exit status."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"{e}\n")
        return EXIT_ERROR
    except SystemExit as e:  # --help / --version
        return EXIT_OK if e.code in (0, None) else EXIT_ERROR
    except (ValueError, ArithmeticError, RuntimeError, OSError) as e:
        err.write(f"error: {type(e).__name__}: {e}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())
