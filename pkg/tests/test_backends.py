"""The compiled kernels must agree with the NumPy fallback."""
import numpy as np
import pytest

from coordsketch import _pykernels, available_backends, backend_name, use_backend, using_backend

pytestmark = pytest.mark.skipif("compiled" not in available_backends(), reason="extension not built")


@pytest.fixture(scope="module")
def ck():
    from coordsketch import _ckernels

    return _ckernels


def csr(rng, n, d, density=0.4):
    dense = rng.standard_normal((n, d))
    dense[rng.random((n, d)) >= density] = 0
    indptr = np.concatenate([[0], np.cumsum(np.count_nonzero(dense, axis=1))]).astype(np.int64)
    rows, cols = np.nonzero(dense)
    return indptr, cols.astype(np.int64), dense[rows, cols]


def test_default_is_compiled():
    assert backend_name() == "compiled"


def test_switching():
    with using_backend("python"):
        assert backend_name() == "python"
    assert backend_name() == "compiled"
    with pytest.raises(ValueError):
        use_backend("fortran")


def test_hash_units(ck):
    idx = np.array([0, 1, 5, 2**40, 2**62], dtype=np.int64)
    for seed in (0, 1, 2**64 - 1):
        assert ck.hash_units(seed, idx).tobytes() == _pykernels.hash_units(seed, idx).tobytes()


def test_row_sq_norms(ck, rng):
    indptr, _, data = csr(rng, 50, 7)
    np.testing.assert_allclose(ck.row_sq_norms(indptr, data), _pykernels.row_sq_norms(indptr, data), rtol=1e-14)
    assert ck.row_sq_norms(np.zeros(1, dtype=np.int64), np.zeros(0)).size == 0


@pytest.mark.parametrize("k", [1, 3, 10, 49, 50, 80])
def test_select_priority(ck, rng, k):
    ranks = rng.random(50)
    ranks[[4, 9, 30]] = ranks[7]  # ties are filled by position
    pos_c, tau_c = ck.select_priority(ranks, k)
    pos_p, tau_p = _pykernels.select_priority(ranks, k)
    assert np.array_equal(np.sort(pos_c), np.sort(pos_p))
    assert tau_c == tau_p


def test_project_rows(ck, rng):
    indptr, indices, data = csr(rng, 40, 6)
    seeds = [3, 2**63, 17]
    for kind in (0, 1):
        np.testing.assert_allclose(
            ck.project_rows(kind, seeds, indptr, indices, data, 6),
            _pykernels.project_rows(kind, seeds, indptr, indices, data, 6),
            rtol=1e-13, atol=1e-14,
        )


def test_countsketch_and_outer(ck, rng):
    indptr, indices, data = csr(rng, 30, 5)
    buckets = rng.integers(0, 4, 30)
    signs = np.where(rng.random(30) < 0.5, -1.0, 1.0)
    np.testing.assert_allclose(
        ck.countsketch_apply(buckets, signs, indptr, indices, data, 4, 5),
        _pykernels.countsketch_apply(buckets, signs, indptr, indices, data, 4, 5),
        atol=1e-13,
    )
    b_indptr, b_indices, b_data = csr(rng, 30, 3)
    pos = np.array([0, 4, 9, 29], dtype=np.int64)
    scale = rng.random(4) + 0.5
    args = (indptr, indices, data, pos, b_indptr, b_indices, b_data, pos, scale, 5, 3)
    np.testing.assert_allclose(ck.weighted_outer(*args), _pykernels.weighted_outer(*args), atol=1e-13)


def test_intersect(ck, rng):
    for _ in range(50):
        a = np.unique(rng.integers(0, 60, 25))
        b = np.unique(rng.integers(0, 60, 25))
        for x, y in zip(ck.intersect_sorted(a, b), _pykernels.intersect_sorted(a, b)):
            assert np.array_equal(x, y)
