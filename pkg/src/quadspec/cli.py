"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 mismatch
against the reference tables.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import golden
from .errors import InvalidArgument, InvalidParameter, NumericalError, QuadspecError
from .model import PhysicalParams, dimensionless_from_physical
from .output import emit_csv
from .precision import default_precision, parse_real, working_precision
from .ritz import ritz_table
from .rpm import DEFAULT_GRID, DEFAULT_STABILITY_TOL, rpm_converged, rpm_table
from .spectra import linear_grid, sweep
from .truncation import count_nodes, truncation_solutions

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2, 3
MIN_PRECISION_BITS = 64

FIGURE_DEFAULTS = {"s": "0", "amin": "-8", "amax": "8", "points": 81, "levels": 7, "overlay_nmax": 6}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass
class RunConfig:
    precision_bits: int
    output_format: str | None
    output_path: Path | None
    command: str
    params: dict = field(default_factory=dict)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--precision", type=int, default=None,
                   help="working precision in bits (default 256 or $QUADSPEC_PRECISION)")
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None)
    p.add_argument("--output", type=Path, default=None, help="write here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="quadspec", allow_abbrev=False,
                     description="Spectra of the radial Coulomb-plus-oscillator problem.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("map", parents=[common], allow_abbrev=False,
                       help="physical parameters to (gamma, s, alpha)")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--phi1", default="0")
    p.add_argument("--m", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--B0", required=True)
    p.add_argument("--omega", required=True)
    p.add_argument("--k", default="0")

    p = sub.add_parser("truncate", parents=[common], allow_abbrev=False,
                       help="polynomial solutions of degree n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", required=True)

    p = sub.add_parser("ritz", parents=[common], allow_abbrev=False,
                       help="variational eigenvalues for growing basis size")
    p.add_argument("--s", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--nmin", type=int, default=2)
    p.add_argument("--levels", type=int, default=4)

    p = sub.add_parser("rpm", parents=[common], allow_abbrev=False,
                       help="Riccati-Padé eigenvalues for growing determinant size")
    p.add_argument("--s", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--dmin", type=int, default=None, help="first row (default dmax-7)")
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--wmin", default="-5")
    p.add_argument("--wmax", default="20")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--tol", default=str(float(DEFAULT_STABILITY_TOL)))

    p = sub.add_parser("sweep", parents=[common], allow_abbrev=False,
                       help="spectral curves over an alpha grid")
    p.add_argument("--s", required=True)
    p.add_argument("--amin", required=True)
    p.add_argument("--amax", required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--overlay-nmax", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--prefix", default="sweep", help="output files PREFIX_curves.csv, PREFIX_points.csv")

    p = sub.add_parser("reproduce", parents=[common], allow_abbrev=False,
                       help="regenerate the reference tables or the curve data")
    p.add_argument("target", choices=("table1", "table2", "table3", "table4", "figure1", "all"))
    p.add_argument("--check", action="store_true", help="compare with the embedded reference values")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--prefix", default="figure1")
    return parser


def _real(text: str, name: str):
    try:
        return parse_real(text)
    except InvalidArgument as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _header(key: str, levels: int) -> list[str]:
    return [key] + [f"W_{j}" for j in range(levels)]


def _rows(table, levels: int) -> list[list]:
    return [[key] + [vals[j] if j < len(vals) else None for j in range(levels)] for key, vals in table]


def _table_rows(name: str) -> tuple[str, list[tuple[int, list]]]:
    root2 = parse_real("sqrt(2)")
    if name == "table1":
        return "N", [(N, v[:4]) for N, v in ritz_table(0, -root2, 10)]
    if name == "table2":
        return "N", [(N, v[:4]) for N, v in ritz_table(0, root2, 13)]
    alpha = -root2 if name == "table3" else root2
    return "D", rpm_table(rpm_converged(0, alpha, 15), range(8, 16))


def _write(cfg: RunConfig, data: bytes) -> None:
    if cfg.output_path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        cfg.output_path.write_bytes(data)


def _json(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode()


def _cmd_map(cfg: RunConfig, a) -> int:
    p = PhysicalParams(m=_real(a.m, "m"), omega=_real(a.omega, "omega"), M=_real(a.M, "M"),
                       B0=_real(a.B0, "B0"), k=_real(a.k, "k"), l=a.l, phi1=_real(a.phi1, "phi1"))
    prob = dimensionless_from_physical(p)
    if cfg.output_format == "csv":
        _write(cfg, emit_csv([[prob.gamma, prob.s, prob.alpha]], ["gamma", "s", "alpha"]))
    else:
        _write(cfg, _json({"gamma": float(prob.gamma), "s": float(prob.s), "alpha": float(prob.alpha)}))
    return EXIT_OK


def _cmd_truncate(cfg: RunConfig, a) -> int:
    if a.n < 0:
        raise UsageError("--n must be non-negative")
    sols = truncation_solutions(a.n, _real(a.s, "s"))
    if cfg.output_format == "csv":
        _write(cfg, emit_csv([[x.n, x.i, x.alpha_root, x.W] for x in sols], ["n", "i", "alpha", "W"]))
    else:
        _write(cfg, _json([{"n": x.n, "i": x.i, "s": float(x.s), "alpha": float(x.alpha_root),
                            "W": float(x.W), "nu": float(x.nu), "nodes": count_nodes(x),
                            "coeffs": [float(c) for c in x.coeffs]} for x in sols]))
    return EXIT_OK


def _cmd_ritz(cfg: RunConfig, a) -> int:
    if not 1 <= a.nmin <= a.nmax:
        raise UsageError("need 1 <= --nmin <= --nmax")
    if a.levels < 1:
        raise UsageError("--levels must be positive")
    table = ritz_table(_real(a.s, "s"), _real(a.alpha, "alpha"), a.nmax, a.nmin)
    _write(cfg, emit_csv(_rows(table, a.levels), _header("N", a.levels)))
    return EXIT_OK


def _cmd_rpm(cfg: RunConfig, a) -> int:
    if a.dmax < 3:
        raise UsageError("--dmax must be at least 3")
    dmin = max(2, a.dmax - 7) if a.dmin is None else a.dmin
    if not 2 <= dmin <= a.dmax:
        raise UsageError("need 2 <= --dmin <= --dmax")
    conv = rpm_converged(_real(a.s, "s"), _real(a.alpha, "alpha"), a.dmax, a.d,
                         (_real(a.wmin, "wmin"), _real(a.wmax, "wmax")),
                         grid_points=a.grid, tol=_real(a.tol, "tol"))
    table = rpm_table(conv, range(dmin, a.dmax + 1), a.levels)
    _write(cfg, emit_csv(_rows(table, a.levels), _header("D", a.levels)))
    return EXIT_OK


def _run_sweep(s, amin, amax, points, levels, overlay_nmax, workers, prefix) -> tuple[int, list[str]]:
    curves = sweep(s, linear_grid(amin, amax, points), levels, workers=workers, overlay_nmax=overlay_nmax)
    Path(f"{prefix}_curves.csv").write_bytes(
        emit_csv([[a] + vals for a, vals in curves.rows()], ["alpha"] + [f"W_{j}" for j in range(levels)]))
    Path(f"{prefix}_points.csv").write_bytes(
        emit_csv([[p.n, p.i, p.alpha, p.W, p.residual] for p in curves.truncation_points],
                 ["n", "i", "alpha", "W", "residual"]))
    notes = [f"flagged alpha={float(curves.alpha_grid[k]):.6g}: {why}" for k, why in curves.flagged]
    notes += list(curves.violations)
    notes += [f"overlay point n={p.n}, i={p.i} off its curve by {float(p.residual):.3e}"
              for p in curves.truncation_points if not p.ok]
    bad = bool(curves.violations) or any(not p.ok for p in curves.truncation_points)
    return (EXIT_MISMATCH if bad else EXIT_OK), notes


def _cmd_sweep(cfg: RunConfig, a) -> int:
    if a.points < 2 or a.levels < 1:
        raise UsageError("need --points >= 2 and --levels >= 1")
    status, notes = _run_sweep(_real(a.s, "s"), _real(a.amin, "amin"), _real(a.amax, "amax"),
                               a.points, a.levels, a.overlay_nmax, a.workers, a.prefix)
    for note in notes:
        print(note, file=sys.stderr)
    print(f"wrote {a.prefix}_curves.csv and {a.prefix}_points.csv", file=sys.stderr)
    return EXIT_OK if status == EXIT_OK else EXIT_NUMERICAL


def _cmd_reproduce(cfg: RunConfig, a) -> int:
    targets = golden.TABLES + ("figure1",) if a.target == "all" else (a.target,)
    chunks: list[bytes] = []
    problems: list[str] = []
    for name in targets:
        if name == "figure1":
            f = FIGURE_DEFAULTS
            status, notes = _run_sweep(parse_real(f["s"]), parse_real(f["amin"]), parse_real(f["amax"]),
                                       f["points"], f["levels"], f["overlay_nmax"], a.workers, a.prefix)
            for note in notes:
                print(note, file=sys.stderr)
            if a.check and status != EXIT_OK:
                problems.append("figure1: curve invariants or overlay residuals violated")
            print(f"wrote {a.prefix}_curves.csv and {a.prefix}_points.csv", file=sys.stderr)
            continue
        key, table = _table_rows(name)
        data = emit_csv(_rows(table, 4), _header(key, 4))
        chunks.append((f"# {name}\n".encode() + data) if len(targets) > 1 else data)
        if a.check:
            problems += golden.compare(golden.load_golden(name), table)
    if chunks:
        _write(cfg, b"\n".join(chunks))
    for msg in problems:
        print(msg, file=sys.stderr)
    return EXIT_MISMATCH if problems else EXIT_OK


COMMANDS = {"map": _cmd_map, "truncate": _cmd_truncate, "ritz": _cmd_ritz, "rpm": _cmd_rpm,
            "sweep": _cmd_sweep, "reproduce": _cmd_reproduce}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        bits = args.precision if args.precision is not None else default_precision()
        if bits < MIN_PRECISION_BITS:
            raise UsageError(f"--precision must be at least {MIN_PRECISION_BITS}")
        cfg = RunConfig(bits, args.output_format, args.output, args.command, vars(args))
        # scoped, so that calling run() in-process leaves the caller's precision alone
        with working_precision(bits):
            return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (InvalidArgument, InvalidParameter) as exc:
        print(f"quadspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, QuadspecError, ArithmeticError) as exc:
        print(f"quadspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())
