"""Command-line front end.

Exit codes: 0 success, 1 property violation, 2 parse or I/O error,
3 domain/precondition error, 4 inverse verification failure.
"""

from __future__ import annotations

import argparse
import sys
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from intervalexpm import fileformat
from intervalexpm.errors import (
    DomainError,
    IterationError,
    ParseError,
    ShapeError,
    SingularError,
    SizeError,
)
from intervalexpm.expm import EnclosureResult, ExpParams, Method, enclose
from intervalexpm.matrix import IntervalMatrix
from intervalexpm.oracle import (
    BilinearInstance,
    bilinear_exact_corner,
    bilinear_matrix,
    epsilon_sweep,
    example1_hull,
    MAX_BILINEAR_N,
    sweep_csv,
)
from intervalexpm.precondition import preconditioned_exp, preconditioned_params, schur_basis
from intervalexpm.verify import run_all

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_SINGULAR = 4

_METHODS = {"taylor": Method.TAYLOR, "horner": Method.HORNER, "ss": Method.SCALING_SQUARING}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- rendering -------------------------------------------------------------

def _outward_decimal(x: float, digits: int, down: bool) -> str:
    if not np.isfinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    ctx = Context(prec=digits, rounding=ROUND_FLOOR if down else ROUND_CEILING)
    d = ctx.plus(Decimal(x))  # Decimal(x) is exact
    return f"{d:g}" if abs(d.adjusted()) > 4 else format(d, "f")


def render_text_matrix(M: IntervalMatrix, digits: int = 4) -> str:
    """Human rendering, bounds rounded outward to ``digits`` significant digits."""
    cells = [[f"[{_outward_decimal(M.lower[i, j], digits, True)}, "
              f"{_outward_decimal(M.upper[i, j], digits, False)}]"
              for j in range(M.cols)] for i in range(M.rows)]
    width = max(len(c) for row in cells for c in row)
    return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


def _meta(result: EnclosureResult, preconditioned: bool) -> dict:
    return {
        "method": result.method.value,
        "K": result.params.K,
        "L": result.params.L,
        "preconditioned": preconditioned,
        "width_norm": fileformat.format_float(result.width_norm),
    }


def render_result(result: EnclosureResult, fmt: str, preconditioned: bool = False) -> str:
    meta = _meta(result, preconditioned)
    M = result.enclosure
    if fmt == "json":
        extra = dict(meta)
        extra["width_norm"] = fileformat._RawNumber(result.width_norm)
        return fileformat.dumps(M, extra) + "\n"
    if fmt == "csv":
        lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items()), "row,col,lower,upper"]
        for i in range(M.rows):
            for j in range(M.cols):
                lines.append(f"{i},{j},{fileformat.format_float(M.lower[i, j])},"
                             f"{fileformat.format_float(M.upper[i, j])}")
        return "\n".join(lines) + "\n"
    head = (f"method: {meta['method']}  K={meta['K']}  L={meta['L']}"
            + ("  (Schur preconditioned)" if preconditioned else ""))
    return f"{head}\n{render_text_matrix(M)}\nwidth_norm: {meta['width_norm']}\n"


# -- commands --------------------------------------------------------------

def _read(path: str) -> IntervalMatrix:
    try:
        return fileformat.read_matrix(path)
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc.strerror or exc}") from exc
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from exc


def cmd_expm(args, out: TextIO) -> int:
    A = _read(args.file)
    method = _METHODS[args.method]
    try:
        if A.rows != A.cols:
            raise DomainError(f"matrix must be square, got {A.rows}x{A.cols}")
        if args.precondition:
            if method is not Method.SCALING_SQUARING:
                raise DomainError("--precondition is only available with --method ss")
            basis = schur_basis(A.midpoint())
            auto = preconditioned_params(A, basis)
            K = auto.K if args.K is None else args.K
            L = auto.L if args.L is None else args.L
            result = preconditioned_exp(A, basis, L, K)
        else:
            if method is not Method.SCALING_SQUARING and args.L not in (None, 0):
                raise DomainError("--L is only meaningful with --method ss")
            result = enclose(A, method, args.K, args.L if method is Method.SCALING_SQUARING else None)
    except (DomainError, ShapeError) as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from exc
    except (SingularError, IterationError) as exc:
        raise CliError(EXIT_SINGULAR, str(exc)) from exc
    out.write(render_result(result, args.format, args.precondition))
    return EXIT_OK


def cmd_hull2x2(args, out: TextIO) -> int:
    try:
        H = example1_hull(args.t_lo, args.t_hi)
    except DomainError as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from exc
    if args.format == "json":
        out.write(fileformat.dumps(H) + "\n")
    else:
        out.write(render_text_matrix(H, digits=6) + "\n")
    return EXIT_OK


def _eps_grid(lo: float, hi: float, count: int) -> list[float]:
    if count < 1:
        raise CliError(EXIT_DOMAIN, "--eps-count must be at least 1")
    if count == 1 or lo == hi:
        return [lo] * count
    if lo <= 0 or hi < lo:
        raise CliError(EXIT_DOMAIN, "log-spaced grid needs 0 < eps-min <= eps-max")
    return [float(e) for e in np.logspace(np.log10(lo), np.log10(hi), count)]


def cmd_sweep(args, out: TextIO) -> int:
    try:
        A0 = fileformat.read_point_matrix(args.file)
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {args.file}: {exc.strerror or exc}") from exc
    except (ParseError, KeyError, TypeError) as exc:
        raise CliError(EXIT_PARSE, f"{args.file}: {exc}") from exc
    grid = _eps_grid(args.eps_min, args.eps_max, args.eps_count)
    try:
        rows = epsilon_sweep(A0, grid, args.K_horner, ExpParams(args.K, args.L), args.seed)
    except (DomainError, ShapeError) as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from exc
    out.write(sweep_csv(rows))
    return EXIT_OK


def cmd_verify(args, out: TextIO) -> int:
    matrix = _read(args.file) if args.file else None
    if matrix is not None and matrix.rows != matrix.cols:
        raise CliError(EXIT_DOMAIN, "matrix must be square")
    try:
        reports = run_all(args.samples, args.seed, matrix, inject_fault=args.inject_fault)
    except (DomainError, ShapeError) as exc:
        raise CliError(EXIT_DOMAIN, str(exc)) from exc
    for rep in reports:
        out.write(rep.line() + "\n")
    ok = all(r.passed for r in reports)
    out.write(("all properties hold" if ok else "PROPERTY VIOLATION") + "\n")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_gen_bilinear(args, out: TextIO) -> int:
    if not 1 <= args.n <= MAX_BILINEAR_N:
        raise CliError(EXIT_DOMAIN, f"SizeError: n must be in 1..{MAX_BILINEAR_N}, got {args.n}")
    inst = BilinearInstance.random(args.n, np.random.default_rng(args.seed))
    try:
        corner = bilinear_exact_corner(inst)
    except SizeError as exc:
        raise CliError(EXIT_DOMAIN, f"SizeError: {exc}") from exc
    A = bilinear_matrix(inst)
    target = Path(args.out)
    sidecar = target.with_name(target.name + ".corner.json")
    i, j = inst.corner
    record = {
        "n": inst.n,
        "seed": args.seed,
        "row": i,
        "col": j,
        "lower": fileformat._RawNumber(corner.lo),
        "upper": fileformat._RawNumber(corner.hi),
        "B": [[fileformat._RawNumber(v) for v in r] for r in inst.B.tolist()],
    }
    try:
        fileformat.write_matrix(A, target)
        sidecar.write_text(fileformat._encode(record) + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot write {target}: {exc.strerror or exc}") from exc
    out.write(f"wrote {target} and {sidecar}\n")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intervalexpm",
                                description="Guaranteed enclosures of interval matrix exponentials.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("expm", help="enclose exp([A]) for a matrix file")
    e.add_argument("--method", choices=sorted(_METHODS), default="ss")
    e.add_argument("--K", type=int, default=None, help="truncation order (auto if omitted)")
    e.add_argument("--L", type=int, default=None, help="scaling exponent (auto if omitted)")
    e.add_argument("--precondition", action="store_true",
                   help="Schur similarity preconditioning (ss only)")
    e.add_argument("--format", choices=("text", "json", "csv"), default="text")
    e.add_argument("file")
    e.set_defaults(func=cmd_expm)

    h = sub.add_parser("hull2x2", help="optimal hull of exp([[0,1],[0,t]]) over a t interval")
    h.add_argument("--t-lo", type=float, required=True)
    h.add_argument("--t-hi", type=float, required=True)
    h.add_argument("--format", choices=("text", "json"), default="text")
    h.set_defaults(func=cmd_hull2x2)

    s = sub.add_parser("sweep", help="width norms over A + [-eps, eps] (CSV)")
    s.add_argument("--eps-min", type=float, required=True)
    s.add_argument("--eps-max", type=float, required=True)
    s.add_argument("--eps-count", type=int, required=True)
    s.add_argument("--K-horner", type=int, default=170)
    s.add_argument("--L", type=int, default=10)
    s.add_argument("--K", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("file")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the containment property suites")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    v.add_argument("file", nargs="?")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen-bilinear", help="write a random nilpotent bilinear instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("out")
    g.set_defaults(func=cmd_gen_bilinear)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except CliError as exc:
        err.write(f"intervalexpm {args.command}: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
