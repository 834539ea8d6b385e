"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--n 20000] [--d 100] [--repeat 5]

Each row reports the best-of-``repeat`` wall time per backend and the
speedup of the compiled extension.
"""
import argparse
import timeit

import numpy as np

from coordsketch import (
    SynthSpec,
    available_backends,
    estimate_product,
    gen_synthetic,
    linear_sketch,
    priority_sample,
    using_backend,
)
from coordsketch.hashing import hash_units
from coordsketch.matrix import exact_product, row_sq_norms


def cases(A, B, k):
    idx = np.arange(A.n_rows, dtype=np.int64)
    SA, SB = priority_sample(A, k, 1), priority_sample(B, k, 1)
    return {
        "hash_units": lambda: hash_units(7, idx),
        "row_sq_norms": lambda: row_sq_norms(A),
        "priority_sample": lambda: priority_sample(A, k, 3),
        "estimate_product": lambda: estimate_product(SA, SB),
        "exact_product": lambda: exact_product(A, B),
        "gaussian_sketch": lambda: linear_sketch(A, 64, 5, "gaussian"),
        "sign_sketch": lambda: linear_sketch(A, 64, 5, "sign"),
        "countsketch": lambda: linear_sketch(A, 512, 5, "countsketch"),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20000)
    parser.add_argument("--d", type=int, default=100)
    parser.add_argument("--sparsity", type=float, default=0.1)
    parser.add_argument("--k", type=int, default=500)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    A, B = gen_synthetic(SynthSpec(args.n, args.d, args.d, args.sparsity, seed=0))
    backends = available_backends()
    times = {}
    for name in backends:
        with using_backend(name):
            for label, fn in cases(A, B, args.k).items():
                fn()  # warm up
                times[label, name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    print(f"n={args.n} d={args.d} sparsity={args.sparsity} nnz={A.nnz} k={args.k}")
    header = f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends)
    if "compiled" in backends:
        header += f"{'speedup':>10}"
    print(header)
    for label in cases(A, B, args.k):
        line = f"{label:<18}" + "".join(f"{times[label, b] * 1e3:>10.2f}ms" for b in backends)
        if "compiled" in backends:
            line += f"{times[label, 'python'] / times[label, 'compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
