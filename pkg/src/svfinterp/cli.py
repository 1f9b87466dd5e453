"""svfinterp command line.

Exit codes: 0 success, 1 invalid input or usage, 2 reconstruction failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

from ._io import atomic_write_text
from .bench import run_one, sweep
from .chains import build_chain_forest
from .errors import ClassificationError, ReconstructionError, SvfError
from .reconstruct import DEFAULT_K, DEFAULT_R, METHODS, reconstruct, write_approximant
from .svf_model import builtin, builtin_names, read_sample_file, sample_model, write_sample_file

log = logging.getLogger("svfinterp")

EXIT_OK, EXIT_INVALID, EXIT_RECONSTRUCTION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _n_list(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of integers: {text!r}")
    if not values or values != sorted(values):
        raise argparse.ArgumentTypeError("--n-list must be a nonempty ascending list")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="svfinterp", description="Reconstruct set-valued functions from samples.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="sample a built-in model to JSON")
    s.add_argument("--model", required=True, choices=builtin_names())
    s.add_argument("--nodes", required=True, choices=["chebyshev", "uniform"])
    s.add_argument("--n", required=True, type=int, help="number of subintervals (N + 1 nodes)")
    s.add_argument("--out", required=True)

    r = sub.add_parser("reconstruct", help="reconstruct from a sample file")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--method", required=True, choices=METHODS)
    r.add_argument("--k", type=int, default=DEFAULT_K)
    r.add_argument("--r", type=int, default=DEFAULT_R)
    r.add_argument("--out", required=True)

    for name, hlp in (("sweep", "max Hausdorff error per N as CSV"),
                      ("pct-error", "PCT location error per N as CSV")):
        w = sub.add_parser(name, help=hlp)
        w.add_argument("--model", required=True, choices=builtin_names())
        w.add_argument("--method", required=True, choices=METHODS)
        w.add_argument("--n-list", required=True, type=_n_list)
        w.add_argument("--nodes", choices=["chebyshev", "uniform"], default=None,
                       help="partition (default: chebyshev for metric-poly, uniform otherwise)")
        w.add_argument("--grid", type=int, default=400)
        w.add_argument("--k", type=int, default=DEFAULT_K)
        w.add_argument("--r", type=int, default=DEFAULT_R)
        w.add_argument("--out", default=None, help="CSV path (default: stdout)")

    d = sub.add_parser("dump-chains", help="text dump of the chain forest")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--out", default=None)
    return p


def _emit(text: str, path: str | None) -> None:
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _cmd_sample(args) -> int:
    S = sample_model(args.model, args.nodes, args.n)
    write_sample_file(args.out, S)
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    S = read_sample_file(args.inp)
    try:
        A = reconstruct(S, args.method, args.k, args.r)
    except (ReconstructionError, ClassificationError) as exc:
        print(f"svfinterp: reconstruction failed: {exc}", file=sys.stderr)
        return EXIT_RECONSTRUCTION
    write_approximant(args.out, A)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if args.grid < 2:
        raise SvfError("--grid must be at least 2")
    rep = sweep(args.model, args.method, args.n_list, args.grid, args.nodes, args.k, args.r)
    _emit(rep.to_csv(), args.out)
    return EXIT_OK


def _cmd_pct_error(args) -> int:
    F = builtin(args.model)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "model", "N", "delta", "pct_error_left", "pct_error_right"])
    for N in args.n_list:
        try:
            rec, _ = run_one(F, args.method, N, args.nodes, 2, args.k, args.r)
        except (ReconstructionError, ClassificationError) as exc:
            log.warning("N=%d failed: %s", N, exc)
            w.writerow([args.method, F.name, N, "nan", "nan", "nan"])
            continue
        w.writerow([args.method, F.name, N, repr(rec.delta), repr(rec.pct_error_left),
                    repr(rec.pct_error_right)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_dump_chains(args) -> int:
    S = read_sample_file(args.inp)
    _emit(build_chain_forest(S).dump(), args.out)
    return EXIT_OK


_COMMANDS = {"sample": _cmd_sample, "reconstruct": _cmd_reconstruct, "sweep": _cmd_sweep,
             "pct-error": _cmd_pct_error, "dump-chains": _cmd_dump_chains}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"svfinterp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"svfinterp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
