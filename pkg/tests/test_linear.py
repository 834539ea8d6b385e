import numpy as np
import pytest

from coordsketch import (
    CoordinationError,
    LinearSketch,
    ParameterError,
    SparseMatrix,
    exact_product,
    frob_sq_norm,
    linear_estimate,
    linear_items,
    linear_sketch,
)
from coordsketch.linear import LINEAR_KINDS, apply_countsketch

from conftest import random_sparse


@pytest.mark.parametrize("kind", LINEAR_KINDS)
def test_zero_matrix(kind):
    S = linear_sketch(SparseMatrix.zeros(7, 3), 4, 1, kind)
    assert S.data.shape == (4, 3)
    assert not S.data.any()


def test_countsketch_identity_permutation(rng):
    A = random_sparse(rng, 9, 4)
    signs = np.where(rng.random(9) < 0.5, -1.0, 1.0)
    PiA = apply_countsketch(A, np.arange(9), signs, 9)
    assert np.array_equal(PiA, signs[:, None] * A.to_dense())


def test_orthonormal_stub_is_exact(rng):
    A, B = random_sparse(rng, 12, 4), random_sparse(rng, 12, 3)
    Q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    SA = LinearSketch("gaussian", 12, 0, Q @ A.to_dense(), 12)
    SB = LinearSketch("gaussian", 12, 0, Q @ B.to_dense(), 12)
    np.testing.assert_allclose(linear_estimate(SA, SB), exact_product(A, B), atol=1e-12)


@pytest.mark.parametrize("kind", LINEAR_KINDS)
def test_zero_factor_gives_zero(kind, rng):
    A = random_sparse(rng, 10, 3)
    SA = linear_sketch(A, 5, 2, kind)
    SB = linear_sketch(SparseMatrix.zeros(10, 2), 5, 2, kind)
    assert not linear_estimate(SA, SB).any()


def test_gaussian_gram_unbiased(rng, backend):
    A = random_sparse(rng, 10, 3, density=0.8)
    trials, k = 20000, 5
    grams = np.empty((trials, 3, 3))
    for s in range(trials):
        D = linear_sketch(A, k, s, "gaussian").data
        grams[s] = D.T @ D
    se = grams.std(axis=0, ddof=1) / np.sqrt(trials)
    assert np.all(np.abs(grams.mean(axis=0) - exact_product(A, A)) <= 4 * se)


@pytest.mark.parametrize("kind", ["sign", "countsketch"])
def test_unbiased(kind, rng):
    A, B = random_sparse(rng, 10, 3, 0.8), random_sparse(rng, 10, 2, 0.8)
    trials = 5000
    est = np.array([linear_estimate(linear_sketch(A, 4, s, kind), linear_sketch(B, 4, s, kind)) for s in range(trials)])
    se = est.std(axis=0, ddof=1) / np.sqrt(trials)
    assert np.all(np.abs(est.mean(axis=0) - exact_product(A, B)) <= 4 * se + 1e-12)


def test_gaussian_error_rate():
    rng = np.random.default_rng(3)
    A = SparseMatrix.from_dense(rng.standard_normal((40, 8)))
    B = SparseMatrix.from_dense(rng.standard_normal((40, 6)))
    exact = exact_product(A, B)
    bound = 0.5 * np.sqrt(frob_sq_norm(A) * frob_sq_norm(B))
    ok = sum(
        np.linalg.norm(linear_estimate(linear_sketch(A, 200, s, "gaussian"), linear_sketch(B, 200, s, "gaussian")) - exact)
        <= bound
        for s in range(1000)
    )
    assert ok >= 950


@pytest.mark.parametrize("kind", LINEAR_KINDS)
def test_countsketch_and_projection_entries(kind):
    # Pi applied to a standard basis vector is one column of Pi
    n, k = 30, 8
    for j in (0, 13, 29):
        e = SparseMatrix.from_coo(n, 1, [j], [0], [1.0])
        col = linear_sketch(e, k, 5, kind).data[:, 0]
        if kind == "countsketch":
            assert np.count_nonzero(col) == 1 and np.abs(col).max() == 1.0
        elif kind == "sign":
            assert np.allclose(np.abs(col), 1 / np.sqrt(k))
        else:
            assert np.count_nonzero(col) == k


def test_pi_independent_of_other_rows(rng):
    # same (seed, kind, k) applies the same Pi: column j of Pi is the sketch of e_j
    A = random_sparse(rng, 6, 2)
    for kind in LINEAR_KINDS:
        cols = np.column_stack([
            linear_sketch(SparseMatrix.from_coo(6, 1, [j], [0], [1.0]), 4, 9, kind).data[:, 0] for j in range(6)
        ])
        np.testing.assert_allclose(linear_sketch(A, 4, 9, kind).data, cols @ A.to_dense(), atol=1e-12)


@pytest.mark.parametrize("kind", LINEAR_KINDS)
def test_deterministic(kind, rng):
    A = random_sparse(rng, 15, 4)
    assert linear_sketch(A, 6, 3, kind) == linear_sketch(A, 6, 3, kind)


def test_backends_agree(rng):
    from coordsketch import available_backends, using_backend

    A = random_sparse(rng, 50, 6)
    out = {}
    for name in available_backends():
        with using_backend(name):
            out[name] = [linear_sketch(A, 7, 2, kind).data for kind in LINEAR_KINDS]
    ref = out["python"]
    for datas in out.values():
        for a, b in zip(datas, ref):
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


def test_items():
    assert linear_items(LinearSketch("sign", 3, 0, np.zeros((3, 5)))) == 15
    assert linear_items(LinearSketch("sign", 1, 0, np.zeros((1, 1)))) == 1


@pytest.mark.parametrize(
    "other",
    [("sign", 4, 1), ("gaussian", 4, 2), ("gaussian", 5, 1)],
)
def test_mismatch_rejected(other, rng):
    A = random_sparse(rng, 10, 3)
    SA = linear_sketch(A, 4, 1, "gaussian")
    with pytest.raises(CoordinationError):
        linear_estimate(SA, linear_sketch(A, other[1], other[2], other[0]))


def test_bad_parameters(rng):
    A = random_sparse(rng, 5, 2)
    with pytest.raises(ParameterError):
        linear_sketch(A, 0, 1, "gaussian")
    with pytest.raises(ParameterError):
        linear_sketch(A, 2, 1, "fourier")
