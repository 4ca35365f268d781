"""Command-line interface: CSV density tables and JSON reports.

Exit codes: 0 ok, 2 usage, 3 computation.  On failure the error class name
is the first token written to standard error.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
from typing import Sequence

import numpy as np

from .convpow import convpow_density_table, make_convpow
from .errors import FreeConvError
from .freeid import (
    DEFAULT_ZERO_RADIUS,
    DensityTable,
    FreeIdLaw,
    atom_report,
    density_table,
    make_law,
    make_stable,
    pair_law,
    stable_dilation_error,
)
from .measures import make_discrete, parse_nodes
from .superconv import FreeCLT, FreePoisson, run, target_of

EXIT_USAGE = 2
EXIT_COMPUTE = 3

# flags taking one value that may start with '-'
_VALUE_FLAGS = {"--grid", "--exclude", "--atoms", "--k", "--n", "--p", "--lambda", "--jump", "--base"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _preprocess(argv: Sequence[str]) -> list[str]:
    # "--grid -2:2:101" would be read as two flags; glue the value on
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            val = next(it, None)
            out.append(tok if val is None else f"{tok}={val}")
        else:
            out.append(tok)
    return out


def _keyvals(tokens: Sequence[str], keys: Sequence[str], flag: str) -> dict:
    out = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep or key not in keys:
            raise UsageError(f"{flag}: expected {' '.join(k + '=...' for k in keys)}, got {tok!r}")
        if key in out:
            raise UsageError(f"{flag}: {key} given twice")
        out[key] = val
    missing = [k for k in keys if k not in out]
    if missing:
        raise UsageError(f"{flag}: missing {', '.join(missing)}")
    return out


def _real(text: str, what: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise UsageError(f"{what}: {text!r} is not a real number") from None
    if not math.isfinite(val):
        raise UsageError(f"{what}: {text!r} is not finite")
    return val


def _b_value(text: str) -> complex:
    # real decimal, or polar "modulus:angle" in radians
    if ":" in text:
        m, _, theta = text.partition(":")
        return cmath.rect(_real(m, "b modulus"), _real(theta, "b angle"))
    return complex(_real(text, "b"))


def _grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--grid: expected lo:hi:n, got {text!r}")
    lo, hi = _real(parts[0], "--grid lo"), _real(parts[1], "--grid hi")
    try:
        n = int(parts[2])
    except ValueError:
        raise UsageError(f"--grid: n must be an integer, got {parts[2]!r}") from None
    if n < 2 or not lo < hi:
        raise UsageError("--grid: need lo < hi and n >= 2")
    return np.linspace(lo, hi, n)


def _interval(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"--exclude: expected lo:hi, got {text!r}")
    lo, hi = _real(parts[0], "--exclude lo"), _real(parts[1], "--exclude hi")
    if not lo < hi:
        raise UsageError("--exclude: need lo < hi")
    return (lo, hi)


def _int_list(text: str, flag: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag}: expected a comma-separated list of integers") from None
    return vals


def _real_list(text: str, flag: str) -> list[float]:
    return [_real(v, flag) for v in text.split(",")]


def _measure(text: str, flag: str):
    try:
        atoms = parse_nodes(text)
    except ValueError as err:
        raise UsageError(f"{flag}: {err}") from None
    if not atoms:
        raise UsageError(f"{flag}: no atoms given")
    return make_discrete(atoms)


def _law(args) -> FreeIdLaw:
    if (args.pair is None) == (args.stable is None):
        raise UsageError("give exactly one of --pair and --stable")
    if args.pair is not None:
        kv = _keyvals(args.pair, ("gamma", "sigma"), "--pair")
        try:
            nodes = parse_nodes(kv["sigma"])
        except ValueError as err:
            raise UsageError(f"--pair: {err}") from None
        if not nodes:
            raise UsageError("--pair: sigma must have at least one node")
        return pair_law(_real(kv["gamma"], "gamma"), nodes)
    kv = _keyvals(args.stable, ("alpha", "b"), "--stable")
    return make_law(make_stable(_real(kv["alpha"], "alpha"), _b_value(kv["b"])))


def _num(x: float) -> str:
    return "%.17g" % x


def _csv(table: DensityTable) -> str:
    lines = ["t,density"]
    for t, s in zip(table.grid, table.values):
        if not np.isnan(s):
            lines.append(f"{_num(t)},{_num(s)}")
    if table.atom is not None:
        loc, mass = table.atom
        lines.append(f"# atom,{_num(loc)},{_num(mass)}")
    return "\n".join(lines) + "\n"


def _gnuplot(csv_text: str, title: str) -> str:
    rows = [ln.replace(",", " ") for ln in csv_text.splitlines()[1:] if not ln.startswith("#")]
    return "\n".join(
        [
            "$density << EOD",
            *rows,
            "EOD",
            f'set title "{title}"',
            'set xlabel "t"',
            'set ylabel "density"',
            "plot $density using 1:2 with lines notitle",
            "",
        ]
    )


def _finite_or_null(x: float):
    return x if math.isfinite(x) else None


def _json(obj) -> str:
    return json.dumps(obj, allow_nan=False) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="freeconv", description="Densities of free convolutions and limit laws.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def law_flags(p):
        p.add_argument("--pair", nargs="+", metavar="KEY=VALUE", help="gamma=<r> sigma=<t:w,...>")
        p.add_argument("--stable", nargs="+", metavar="KEY=VALUE", help="alpha=<r> b=<r or m:theta>")

    def out_flags(p, gnuplot=True):
        p.add_argument("-o", "--output", help="output file (default: standard output)")
        if gnuplot:
            p.add_argument("--gnuplot", metavar="PATH", help="also write a gnuplot script to PATH")

    p = sub.add_parser("density", help="density table of a freely infinitely divisible law")
    law_flags(p)
    p.add_argument("--grid", required=True, help="lo:hi:n")
    p.add_argument("--exclude", help="lo:hi (default: around the real zero of F, if any)")
    out_flags(p)

    p = sub.add_parser("atoms", help="real zero of F and atom mass")
    law_flags(p)
    out_flags(p, gnuplot=False)

    p = sub.add_parser("convpow", help="density table of a free convolution power")
    p.add_argument("--atoms", required=True, help="t:w,... (the base measure)")
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--grid", required=True, help="lo:hi:n")
    p.add_argument("--exclude", help="lo:hi (default: around the real zero of F, if any)")
    out_flags(p)

    p = sub.add_parser("superconv", help="convergence report for a triangular array")
    p.add_argument("--scheme", required=True, choices=("clt", "poisson"))
    p.add_argument("--base", default="-1:0.5,1:0.5", help="t:w,... centred unit-variance base (clt)")
    p.add_argument("--lambda", dest="lam", default="1", help="rate (poisson)")
    p.add_argument("--jump", default="1:1", help="t:w,... jump law (poisson)")
    p.add_argument("--n", required=True, help="comma-separated row indices")
    p.add_argument("--grid", required=True, help="lo:hi:n")
    p.add_argument("--exclude", help="lo:hi")
    p.add_argument("--p", default="2", help="comma-separated exponents > 1")
    out_flags(p, gnuplot=False)

    p = sub.add_parser("stable-check", help="dilation identity of a freely stable law")
    p.add_argument("--stable", nargs="+", required=True, metavar="KEY=VALUE")
    p.add_argument("--grid", help="lo:hi:n (default -4:4:401)")
    out_flags(p, gnuplot=False)
    return parser


def _prepare(args):
    """Validate flags and return a zero-argument job producing ``(text, gnuplot_title)``."""
    cmd = args.command
    if cmd == "density":
        law = _law(args)
        grid = _grid(args.grid)
        exc = _interval(args.exclude) if args.exclude else "auto"
        return lambda: (_csv(density_table(law, grid, exc)), "density")
    if cmd == "atoms":
        law = _law(args)

        def job():
            rep = atom_report(law)
            return _json({"L": _finite_or_null(rep.L), "t_nu": rep.t_nu, "mass": rep.atom_mass}), None

        return job
    if cmd == "convpow":
        mu = _measure(args.atoms, "--atoms")
        if args.k < 2:
            raise UsageError("--k must be at least 2")
        grid = _grid(args.grid)
        exc = _interval(args.exclude) if args.exclude else "auto"
        return lambda: (_csv(convpow_density_table(make_convpow(mu, args.k), grid, exc)), f"k = {args.k}")
    if cmd == "superconv":
        if args.scheme == "clt":
            scheme = FreeCLT(_measure(args.base, "--base"))
        else:
            scheme = FreePoisson(_real(args.lam, "--lambda"), _measure(args.jump, "--jump"))
        n_list = _int_list(args.n, "--n")
        grid = _grid(args.grid)
        p_list = _real_list(args.p, "--p")
        if any(not p > 1 for p in p_list):
            raise UsageError("--p: every exponent must exceed 1")
        if any(n < 1 for n in n_list):
            raise UsageError("--n: row indices must be positive")
        U = _interval(args.exclude) if args.exclude else None

        def job():
            target = target_of(scheme)
            U_run = U
            if U_run is None:
                rep = atom_report(target)
                if rep.has_zero:
                    U_run = (rep.t_nu - DEFAULT_ZERO_RADIUS, rep.t_nu + DEFAULT_ZERO_RADIUS)
            return _json(run(scheme, target, n_list, grid, U_run, p_list).to_dict()), None

        return job
    if cmd == "stable-check":
        kv = _keyvals(args.stable, ("alpha", "b"), "--stable")
        alpha, b = _real(kv["alpha"], "alpha"), _b_value(kv["b"])
        spec = make_stable(alpha, b)
        grid = _grid(args.grid) if args.grid else None

        def job():
            err = stable_dilation_error(spec.alpha, spec.b, grid)
            bb = complex(spec.b)
            return _json({"alpha": spec.alpha, "b": [bb.real, bb.imag], "max_dilation_error": err}), None

        return job
    raise UsageError(f"unknown command {cmd!r}")


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(_preprocess(argv))
        job = _prepare(args)
    except UsageError as err:
        print(f"UsageError: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (FreeConvError, ValueError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text, title = job()
    except (FreeConvError, ArithmeticError, ValueError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_COMPUTE
    _write(args.output, text)
    if getattr(args, "gnuplot", None) and title is not None:
        _write(args.gnuplot, _gnuplot(text, title))
    return 0


if __name__ == "__main__":
    sys.exit(main())
