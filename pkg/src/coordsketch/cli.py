"""Command-line interface.

Exit codes: 0 success, 2 usage or parameter error, 3 coordination error
(sketches with different seeds or kinds), 4 I/O or parse error.
"""
import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import (
    CoordinationError,
    DimensionError,
    MatrixParseError,
    ParameterError,
    SketchFormatError,
)
from .experiments import (
    SynthSpec,
    gen_regression_instance,
    gen_synthetic,
    load_sweep_config,
    product_error,
    regression_error,
    run_config,
    write_records_csv,
)
from .io import load_matrix, load_sketch, save_matrix, save_sketch, write_dense_csv
from .linear import LINEAR_KINDS, LinearSketch, linear_estimate, linear_sketch
from .matrix import SparseMatrix, exact_product
from .regression import (
    EXACT,
    SINGLE,
    RegressionSketch,
    least_squares,
    regression_residual,
    sketch_matrix_for_regression,
    solve_regression,
)
from .sampling import SampleSketch, estimate_product, priority_sample, threshold_sample

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_COORDINATION = 3
EXIT_IO = 4

METHODS = ("priority", "threshold") + LINEAR_KINDS + ("regression",)


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coordsketch",
        description="Coordinated-sampling sketches for matrix products and regression.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate synthetic matrices")
    g.add_argument("--task", choices=("product", "regression"), default="product")
    g.add_argument("--n", type=_positive_int, default=10000)
    g.add_argument("--d", type=_positive_int, default=100)
    g.add_argument("--m", type=_positive_int, default=100)
    g.add_argument("--sparsity", type=float, default=1.0)
    g.add_argument("--outlier-frac", type=float, default=0.1)
    g.add_argument("--outlier-scale", type=float, default=10.0)
    g.add_argument("--noise-sigma", type=float, default=1.0, help="regression task only")
    g.add_argument("--seed", type=_u64, default=0)
    g.add_argument("--out-a", required=True, help="output for A (.mtx or .csv)")
    g.add_argument("--out-b", required=True, help="output for B, or b for regression")
    g.add_argument("--out-x", help="regression task: write x_true as CSV")

    s = sub.add_parser("sketch", help="sketch a matrix file")
    s.add_argument("input", help="matrix file (.mtx or .csv)")
    s.add_argument("--method", choices=METHODS, required=True)
    s.add_argument("--k", type=_positive_int, required=True)
    s.add_argument("--seed", type=_u64, required=True)
    s.add_argument("--gram", choices=(EXACT, SINGLE), default=EXACT,
                   help="Gram information stored by --method regression")
    s.add_argument("--format", choices=("mm", "csv"), help="input format (default: by extension)")
    s.add_argument("--out", required=True, help="sketch file to write")

    e = sub.add_parser("estimate", help="estimate A^T B from two sketch files")
    e.add_argument("sketch_a")
    e.add_argument("sketch_b")
    e.add_argument("--out", default="-", help="CSV for W (default: stdout)")
    e.add_argument("--truth-a", help="matrix file of A, to report the error")
    e.add_argument("--truth-b", help="matrix file of B, to report the error")

    r = sub.add_parser("regress", help="solve sketched least squares")
    r.add_argument("sketch_a", help="sketch written with --method regression")
    r.add_argument("sketch_b", help="priority sketch of the response vector")
    r.add_argument("--out", default="-", help="CSV for x (default: stdout)")
    r.add_argument("--truth-a", help="matrix file of A, to report residuals")
    r.add_argument("--truth-b", help="matrix file of b, to report residuals")

    b = sub.add_parser("bench", help="run an error-vs-storage sweep")
    b.add_argument("config", help="JSON sweep configuration")
    b.add_argument("--out", default="-", help="records CSV (default: stdout)")
    b.add_argument("--workers", type=_positive_int, default=None)
    b.add_argument("--timing", action="store_true",
                   help="record wall times (output is then not byte-reproducible)")
    return parser


def _emit_csv(array, dest):
    if dest == "-":
        write_dense_csv(array, sys.stdout)
    else:
        write_dense_csv(array, dest)


def _report(metrics, to_stdout):
    line = json.dumps(metrics, sort_keys=True)
    print(line, file=sys.stdout if to_stdout else sys.stderr)


def _cmd_gen(args):
    if args.task == "product":
        spec = SynthSpec(args.n, args.d, args.m, args.sparsity, args.outlier_frac,
                         args.outlier_scale, args.seed)
        A, B = gen_synthetic(spec)
        save_matrix(A, args.out_a)
        save_matrix(B, args.out_b)
    else:
        inst = gen_regression_instance(
            args.n, args.d, args.sparsity, args.noise_sigma, args.seed,
            outlier_frac=args.outlier_frac, outlier_scale=args.outlier_scale,
        )
        save_matrix(inst.A, args.out_a)
        save_matrix(SparseMatrix.from_dense(inst.b[:, None]), args.out_b)
        if args.out_x:
            write_dense_csv(inst.x_true, args.out_x)
    return EXIT_OK


def _cmd_sketch(args):
    A = load_matrix(args.input, args.format)
    if args.method == "priority":
        sk = priority_sample(A, args.k, args.seed)
    elif args.method == "threshold":
        sk = threshold_sample(A, args.k, args.seed)
    elif args.method == "regression":
        sk = sketch_matrix_for_regression(A, args.k, args.seed, args.gram)
    else:
        sk = linear_sketch(A, args.k, args.seed, args.method)
    save_sketch(sk, args.out)
    return EXIT_OK


def _cmd_estimate(args):
    SA, SB = load_sketch(args.sketch_a), load_sketch(args.sketch_b)
    if isinstance(SA, SampleSketch) and isinstance(SB, SampleSketch):
        W = estimate_product(SA, SB)
    elif isinstance(SA, LinearSketch) and isinstance(SB, LinearSketch):
        W = linear_estimate(SA, SB)
    else:
        raise CoordinationError(
            f"cannot combine {type(SA).__name__} with {type(SB).__name__}"
        )
    _emit_csv(W, args.out)
    if args.truth_a or args.truth_b:
        if not (args.truth_a and args.truth_b):
            raise ParameterError("--truth-a and --truth-b must be given together")
        A, B = load_matrix(args.truth_a), load_matrix(args.truth_b)
        _report({"product_error": product_error(W, A, B)}, to_stdout=args.out != "-")
    return EXIT_OK


def _cmd_regress(args):
    RA, Sb = load_sketch(args.sketch_a), load_sketch(args.sketch_b)
    if not isinstance(RA, RegressionSketch) or not isinstance(Sb, SampleSketch):
        raise CoordinationError("regress needs a regression sketch and a sample sketch of b")
    x = solve_regression(RA, Sb)
    _emit_csv(x, args.out)
    if args.truth_a or args.truth_b:
        if not (args.truth_a and args.truth_b):
            raise ParameterError("--truth-a and --truth-b must be given together")
        A = load_matrix(args.truth_a)
        b = load_matrix(args.truth_b)
        if b.n_cols != 1:
            raise DimensionError("--truth-b must be a single column")
        bv = b.to_dense()[:, 0]
        x_star = least_squares(A, bv)
        metrics = {
            "residual": regression_residual(A, bv, x),
            "optimal_residual": regression_residual(A, bv, x_star),
            "b_norm_sq": float(bv @ bv),
            "additive_error": regression_error(A, bv, x, x_star, "additive"),
            "distance_error": regression_error(A, bv, x, x_star, "distance"),
        }
        _report(metrics, to_stdout=args.out != "-")
    return EXIT_OK


def _cmd_bench(args):
    config = load_sweep_config(args.config)
    records = run_config(config, workers=args.workers, timing=args.timing or None)
    if args.out == "-":
        from .experiments import records_to_csv

        sys.stdout.write(records_to_csv(records))
    else:
        write_records_csv(records, args.out)
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "sketch": _cmd_sketch,
    "estimate": _cmd_estimate,
    "regress": _cmd_regress,
    "bench": _cmd_bench,
}


def cli_dispatch(argv=None):
    """Run the CLI and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except CoordinationError as exc:
        print(f"coordsketch: coordination error: {exc}", file=sys.stderr)
        return EXIT_COORDINATION
    except (MatrixParseError, SketchFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"coordsketch: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ParameterError, DimensionError, ValueError, KeyError, TypeError) as exc:
        print(f"coordsketch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(cli_dispatch(argv))


if __name__ == "__main__":
    main()
