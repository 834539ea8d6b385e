"""Synthetic data, error metrics and equal-storage Monte-Carlo sweeps.

Every method in a sweep is given the same storage budget, measured in
stored items (scalars plus indices). Linear sketches spend it on a dense
``k x d`` block; sampling sketches spend it on row indices, the threshold,
and the sampled rows. All randomness derives from one base seed:
``derive_seed(seed, "trial", t, method)`` for the sketches of trial ``t``,
``derive_seed(seed, "calibration", method, c)`` for budget calibration, and
``derive_seed(data_seed, "synthetic", role)`` for generated matrices.
"""
import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ParameterError
from .hashing import check_seed, derive_seed, hash_units
from .linear import LINEAR_KINDS, linear_estimate, linear_items, linear_sketch
from .matrix import SparseMatrix, exact_product, frob_sq_norm, row_sq_norms
from .regression import (
    EXACT,
    SINGLE,
    least_squares,
    leverage_scores,
    regression_items,
    regression_residual,
    sketch_matrix_for_regression,
    sketch_vector_for_regression,
    solve_regression,
)
from .sampling import (
    AUTO,
    DENSE_ROWS,
    PRIORITY,
    SPARSE_PAIRS,
    THRESHOLD,
    estimate_product,
    priority_sample,
    sketch_items,
    threshold_sample,
)

__all__ = [
    "SynthSpec",
    "RegressionInstance",
    "ExperimentRecord",
    "PRODUCT_METHODS",
    "REGRESSION_METHODS",
    "gen_synthetic",
    "gen_regression_instance",
    "product_error",
    "regression_error",
    "budget_to_k",
    "threshold_expected_items",
    "run_sweep",
    "write_records_csv",
    "records_to_csv",
    "load_sweep_config",
    "run_config",
    "median_errors",
]

PRODUCT_METHODS = (PRIORITY, THRESHOLD) + LINEAR_KINDS
REGRESSION_METHODS = ("priority_exact", "priority_single") + LINEAR_KINDS

CSV_HEADER = ("method", "budget_items", "trial", "error", "wall_time_s")

# dry runs used to calibrate k for priority methods
CALIBRATION_SEEDS = 16


def round_half_up(x):
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SynthSpec:
    n: int = 10000
    d: int = 100
    m: int = 100
    sparsity: float = 1.0
    outlier_frac: float = 0.1
    outlier_scale: float = 10.0
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "d", "m"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be a positive integer")
        if not 0 < self.sparsity <= 1:
            raise ParameterError(f"sparsity must lie in (0, 1], got {self.sparsity}")
        if not 0 <= self.outlier_frac <= 1:
            raise ParameterError(f"outlier_frac must lie in [0, 1], got {self.outlier_frac}")
        if not self.outlier_scale >= 1:
            raise ParameterError(f"outlier_scale must be >= 1, got {self.outlier_scale}")
        check_seed(self.seed)


class RegressionInstance(NamedTuple):
    A: SparseMatrix
    b: np.ndarray
    x_true: np.ndarray


@dataclass(frozen=True)
class ExperimentRecord:
    method: str
    budget_items: int
    trial: int
    error: float
    wall_time: float = 0.0
    items: int = 0


def _synthetic_block(rng, n, d, sparsity, outlier_frac, outlier_scale):
    """Dense Gaussian block with exact-count outlier and sparsity masks.

    Returns the values and the boolean outlier mask (before sparsification).
    """
    values = rng.standard_normal((n, d))
    size = n * d
    outliers = np.zeros(size, dtype=bool)
    n_out = round_half_up(outlier_frac * size)
    if n_out:
        outliers[rng.choice(size, n_out, replace=False)] = True
    values.ravel()[outliers] *= outlier_scale
    n_keep = round_half_up(sparsity * size)
    keep = np.zeros(size, dtype=bool)
    keep[rng.choice(size, n_keep, replace=False)] = True
    values.ravel()[~keep] = 0.0
    return values, outliers.reshape(n, d)


def gen_synthetic(spec):
    """Matrices ``A`` (n x d) and ``B`` (n x m) with Gaussian entries,
    a fraction of them scaled up as outliers, then sparsified."""
    out = []
    for role, cols in (("A", spec.d), ("B", spec.m)):
        rng = np.random.default_rng(derive_seed(spec.seed, "synthetic", role))
        values, _ = _synthetic_block(
            rng, spec.n, cols, spec.sparsity, spec.outlier_frac, spec.outlier_scale
        )
        out.append(SparseMatrix.from_dense(values))
    return tuple(out)


def gen_regression_instance(n, d, sparsity, noise_sigma, seed, *,
                            outlier_frac=0.1, outlier_scale=10.0, x_true=None):
    """Synthetic regression problem ``b = A x_true + noise``."""
    if not n > d >= 1:
        raise ParameterError(f"need n > d >= 1, got n={n}, d={d}")
    if noise_sigma < 0:
        raise ParameterError("noise_sigma must be nonnegative")
    A, _ = gen_synthetic(SynthSpec(n, d, 1, sparsity, outlier_frac, outlier_scale, seed))
    if x_true is None:
        x_true = np.random.default_rng(derive_seed(seed, "regression", "x")).standard_normal(d)
    x_true = np.asarray(x_true, dtype=np.float64)
    noise = np.random.default_rng(derive_seed(seed, "regression", "noise")).standard_normal(n)
    b = A.to_scipy() @ x_true + noise_sigma * noise
    return RegressionInstance(A, b, x_true)


def product_error(W, A, B, exact=None):
    """``|W - A^T B|_F / (|A|_F |B|_F)``."""
    if exact is None:
        exact = exact_product(A, B)
    W = np.asarray(W, dtype=np.float64)
    if W.shape != exact.shape:
        raise ParameterError(f"estimate shape {W.shape} does not match {exact.shape}")
    num = float(np.linalg.norm(W - exact))
    den = math.sqrt(frob_sq_norm(A) * frob_sq_norm(B))
    if den == 0:
        if num == 0:
            return 0.0
        raise RuntimeError("nonzero estimate for a product of zero matrices")
    return num / den


def regression_error(A, b, x, x_star=None, metric="additive"):
    """Regression error normalized by ``b``.

    ``additive``: ``(|Ax - b|^2 - |Ax* - b|^2) / |b|^2``.
    ``distance``: ``|Ax - Ax*| / |b|``.
    """
    if x_star is None:
        x_star = least_squares(A, b)
    bv = np.asarray(b, dtype=np.float64).ravel()
    b_sq = float(bv @ bv)
    if metric == "additive":
        num = regression_residual(A, bv, x) - regression_residual(A, bv, x_star)
        num = max(num, 0.0)
        return num / b_sq if b_sq else 0.0
    if metric == "distance":
        diff = A.to_scipy() @ (np.asarray(x) - x_star)
        num = float(np.linalg.norm(diff))
        return num / math.sqrt(b_sq) if b_sq else 0.0
    raise ParameterError(f"unknown regression error metric {metric!r}")


# -- budget inversion -------------------------------------------------------


def _row_costs(M):
    """Per-row stored items (index excluded) under sparse and dense layouts."""
    nnz = M.row_nnz().astype(np.int64)
    return 2 * nnz, np.full(M.n_rows, M.n_cols, dtype=np.int64)


def _prefix_items(M, ranks_rows, ranks, counting, extra_per_row=0):
    """Items of a priority sketch of ``M`` for every k = 1..len(ranks).

    ``ranks_rows`` are the candidate rows with ``ranks``; the sketch of size
    k holds the k smallest ranks (ties by row index), so items are prefix
    sums over that order.
    """
    order = np.lexsort((ranks_rows, ranks))
    rows = ranks_rows[order]
    sparse_c, dense_c = _row_costs(M)
    k = np.arange(1, rows.size + 1)
    base = k + 1 + extra_per_row * k
    sparse = base + np.cumsum(sparse_c[rows])
    dense = base + np.cumsum(dense_c[rows])
    if counting == SPARSE_PAIRS:
        return sparse
    if counting == DENSE_ROWS:
        return dense
    return np.minimum(sparse, dense)


def _full_prefix(prefix, n_max):
    """Extend prefix item counts to k = 1..n_max (sketch saturates)."""
    if prefix.size >= n_max:
        return prefix[:n_max]
    last = prefix[-1] if prefix.size else 1
    return np.concatenate([prefix, np.full(n_max - prefix.size, last)])


def _largest_k(items_by_k, budget):
    """Largest k (1-based) whose item count fits the budget, else 0."""
    ok = np.flatnonzero(items_by_k <= budget)
    return int(ok[-1] + 1) if ok.size else 0


def _priority_items_curve(mats, weights, seed, counting, extras):
    n_max = max(M.n_rows for M in mats)
    total = np.zeros(n_max, dtype=np.int64)
    for M, w, extra in zip(mats, weights, extras):
        cand = M.nonzero_rows()
        if cand.size == 0:
            total += 1
            continue
        ranks = hash_units(seed, cand) / w[cand]
        total += _full_prefix(_prefix_items(M, cand, ranks, counting, extra), n_max)
    return total


def threshold_expected_items(mats, k, counting=AUTO):
    """Expected stored items of Threshold sketches of ``mats`` with parameter k."""
    total = 0.0
    for M in mats:
        w = row_sq_norms(M)
        norm = w.sum()
        if norm == 0:
            total += 1
            continue
        p = np.minimum(1.0, k * w / norm)
        sparse_c, dense_c = _row_costs(M)
        sparse = 1 + float(p @ (sparse_c + 1))
        dense = 1 + float(p @ (dense_c + 1))
        if counting == SPARSE_PAIRS:
            total += sparse
        elif counting == DENSE_ROWS:
            total += dense
        else:
            total += min(sparse, dense)
    return total


def budget_to_k(method, budget, mats, *, seed=0, counting=AUTO, gram_items=0, scores=None):
    """Sketch size ``k`` for ``method`` so that stored items fit ``budget``.

    ``mats`` are the matrices sketched together (``(A, B)`` for products,
    ``(A, b)`` for regression). Priority methods are calibrated on dry runs
    with ``CALIBRATION_SEEDS`` seeds (k is the largest value whose item
    count fits in every dry run); Threshold Sampling, whose size is random,
    uses the largest k whose expected item count fits; linear sketches use
    ``k * sum(n_cols)``. Raises ``ParameterError`` if even ``k = 1``
    does not fit.
    """
    budget = int(budget)
    if method in LINEAR_KINDS:
        k = budget // sum(M.n_cols for M in mats)
    elif method == THRESHOLD:
        lo, hi = 0, max(M.n_rows for M in mats)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if threshold_expected_items(mats, mid, counting) <= budget:
                lo = mid
            else:
                hi = mid - 1
        k = lo
    elif method in (PRIORITY, "priority_exact", "priority_single"):
        if method == PRIORITY:
            weights = [row_sq_norms(M) for M in mats]
            extras = [0] * len(mats)
        else:
            A, b = mats
            lev = scores if scores is not None else leverage_scores(A).scores
            weights = [lev, row_sq_norms(b)]
            extras = [1, 0]
        curve = None
        for c in range(CALIBRATION_SEEDS):
            cs = derive_seed(seed, "calibration", method, c)
            items = _priority_items_curve(mats, weights, cs, counting, extras) + gram_items
            curve = items if curve is None else np.maximum(curve, items)
        k = _largest_k(curve, budget)
    else:
        raise ParameterError(f"unknown method {method!r}")
    if k < 1:
        raise ParameterError(f"budget {budget} is too small for method {method!r}")
    return int(k)


# -- sweeps -----------------------------------------------------------------


def _product_trial(method, k, A, B, seed, counting):
    if method == PRIORITY:
        SA, SB = priority_sample(A, k, seed), priority_sample(B, k, seed)
        return estimate_product(SA, SB), sketch_items(SA, counting) + sketch_items(SB, counting)
    if method == THRESHOLD:
        SA, SB = threshold_sample(A, k, seed), threshold_sample(B, k, seed)
        return estimate_product(SA, SB), sketch_items(SA, counting) + sketch_items(SB, counting)
    SA, SB = linear_sketch(A, k, seed, method), linear_sketch(B, k, seed, method)
    return linear_estimate(SA, SB), linear_items(SA) + linear_items(SB)


def _regression_trial(method, k, A, b, seed, counting, scores):
    if method in ("priority_exact", "priority_single"):
        mode = EXACT if method == "priority_exact" else SINGLE
        RA = sketch_matrix_for_regression(A, k, seed, mode, scores=scores)
        Sb = sketch_vector_for_regression(b, k, seed)
        return solve_regression(RA, Sb), regression_items(RA, Sb, counting)
    bcol = SparseMatrix.from_dense(np.asarray(b)[:, None])
    SA, Sb = linear_sketch(A, k, seed, method), linear_sketch(bcol, k, seed, method)
    x, *_ = np.linalg.lstsq(SA.data, Sb.data[:, 0], rcond=None)
    return x, linear_items(SA) + linear_items(Sb)


@dataclass(frozen=True)
class _Task:
    kind: str
    mats: tuple
    exact: object
    scores: object = None
    x_star: object = None
    metric: str = "additive"
    b: object = None


def _run_cell(task, method, budget, trials, seed, counting, timing):
    gram_items = 0
    if method == "priority_exact":
        gram_items = task.mats[0].n_cols ** 2
    k = budget_to_k(method, budget, task.mats, seed=seed, counting=counting,
                    gram_items=gram_items, scores=task.scores)
    records = []
    for t in range(trials):
        ts = derive_seed(seed, "trial", t, method)
        start = time.perf_counter()
        if task.kind == "product":
            A, B = task.mats
            W, items = _product_trial(method, k, A, B, ts, counting)
            elapsed = time.perf_counter() - start
            err = product_error(W, A, B, exact=task.exact)
        else:
            A, b = task.mats
            x, items = _regression_trial(method, k, A, task.b, ts, counting, task.scores)
            elapsed = time.perf_counter() - start
            err = regression_error(A, task.b, x, task.x_star, task.metric)
        records.append(
            ExperimentRecord(method, int(budget), t, float(err), elapsed if timing else 0.0, int(items))
        )
    return records


def _run_cell_star(args):
    return _run_cell(*args)


def _make_task(instance, error_metric):
    if isinstance(instance, SynthSpec):
        instance = gen_synthetic(instance)
    if isinstance(instance, RegressionInstance):
        A, b = instance.A, np.asarray(instance.b, dtype=np.float64)
        bcol = SparseMatrix.from_dense(b[:, None])
        return _Task("regression", (A, bcol), None, leverage_scores(A).scores,
                     least_squares(A, b), error_metric, b)
    A, B = instance
    return _Task("product", (A, B), exact_product(A, B))


def run_sweep(methods, budgets, trials, instance, *, seed=0, counting=AUTO,
              error_metric="additive", workers=1, timing=False):
    """Run every (method, budget) cell for ``trials`` seeds.

    ``instance`` is a :class:`SynthSpec` or a pair ``(A, B)`` for the
    product task, or a :class:`RegressionInstance` for regression. Records
    come back sorted by (method, budget, trial), independent of ``workers``.
    Wall time is recorded only when ``timing`` is true, so that default
    output is reproducible byte for byte.
    """
    seed = check_seed(seed)
    task = _make_task(instance, error_metric)
    allowed = PRODUCT_METHODS if task.kind == "product" else REGRESSION_METHODS
    for m in methods:
        if m not in allowed:
            raise ParameterError(f"unknown {task.kind} method {m!r}; choose from {allowed}")
    if int(trials) < 1:
        raise ParameterError("trials must be >= 1")
    cells = [(task, m, int(bud), int(trials), seed, counting, timing)
             for m in methods for bud in budgets]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_cell_star, cells))
    else:
        chunks = [_run_cell(*c) for c in cells]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.method, r.budget_items, r.trial))
    return records


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.method, r.budget_items, r.trial, repr(float(r.error)), repr(float(r.wall_time))])
    return buf.getvalue()


def write_records_csv(records, path):
    text = records_to_csv(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def median_errors(records):
    """``{(method, budget): median error}``."""
    groups = {}
    for r in records:
        groups.setdefault((r.method, r.budget_items), []).append(r.error)
    return {key: float(np.median(v)) for key, v in groups.items()}


# -- config files -----------------------------------------------------------


def load_sweep_config(path):
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    config.setdefault("_base_dir", str(Path(path).resolve().parent))
    return config


def _instance_from_config(config):
    task = config.get("task", "product")
    base = Path(config.get("_base_dir", "."))
    inputs = config.get("inputs")
    if inputs:
        from .io import load_matrix

        A = load_matrix(base / inputs["a"])
        B = load_matrix(base / inputs["b"])
        if task == "product":
            return (A, B)
        b = B.to_dense()[:, 0]
        return RegressionInstance(A, b, None)
    if task == "product":
        return SynthSpec(**config.get("synthetic", {}))
    if task == "regression":
        params = dict(config.get("regression", {}))
        return gen_regression_instance(
            params.pop("n", 2000), params.pop("d", 10), params.pop("sparsity", 0.2),
            params.pop("noise_sigma", 1.0), params.pop("seed", 0), **params,
        )
    raise ParameterError(f"unknown task {task!r}")


def run_config(config, *, workers=None, timing=None):
    """Run the sweep described by a config dictionary (see README)."""
    task = config.get("task", "product")
    default_methods = PRODUCT_METHODS if task == "product" else REGRESSION_METHODS
    try:
        budgets = config["budgets"]
    except KeyError:
        raise ParameterError("config needs a 'budgets' list") from None
    return run_sweep(
        config.get("methods", list(default_methods)),
        budgets,
        config.get("trials", 10),
        _instance_from_config(config),
        seed=config.get("seed", 0),
        counting=config.get("counting", AUTO),
        error_metric=config.get("error_metric", "additive"),
        workers=workers if workers is not None else config.get("workers", 1),
        timing=timing if timing is not None else config.get("timing", False),
    )
