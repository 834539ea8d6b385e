import numpy as np
import pytest

from coordsketch import (
    LinearSketch,
    MatrixParseError,
    SketchFormatError,
    SparseMatrix,
    linear_sketch,
    priority_sample,
    sketch_matrix_for_regression,
    sketch_vector_for_regression,
    threshold_sample,
)
from coordsketch.io import (
    MAGIC,
    dumps_sketch,
    load_matrix,
    load_sketch,
    loads_sketch,
    parse_dense_csv,
    parse_matrix_market,
    read_dense_csv,
    save_matrix,
    save_sketch,
    write_dense_csv,
)
from coordsketch.linear import LINEAR_KINDS
from coordsketch.regression import EXACT, SINGLE

from conftest import random_sparse


class TestMatrixMarket:
    def test_identity(self):
        text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n"
        assert parse_matrix_market(text) == SparseMatrix.from_dense(np.eye(2))

    def test_comments_duplicates_and_zeros(self):
        text = (
            "%%MatrixMarket matrix coordinate real general\n% a comment\n\n"
            "3 2 4\n1 2 1.5\n1 2 2.5\n3 1 0\n2 1 -1\n"
        )
        A = parse_matrix_market(text)
        assert A.to_dense().tolist() == [[0, 4.0], [-1.0, 0], [0, 0]]
        assert A.nnz == 2

    def test_symmetric_and_pattern(self):
        sym = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2\n2 1 3\n"
        assert parse_matrix_market(sym).to_dense().tolist() == [[2, 3], [3, 0]]
        pat = "%%MatrixMarket matrix coordinate pattern general\n2 3 1\n2 3\n"
        assert parse_matrix_market(pat).to_dense().tolist() == [[0, 0, 0], [0, 0, 1]]

    def test_array_layout(self):
        text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"
        assert parse_matrix_market(text).to_dense().tolist() == [[1, 3], [2, 4]]

    @pytest.mark.parametrize(
        "text, line",
        [
            ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1\n", 1),
            ("not a header\n", 1),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", 3),
            ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2),
        ],
    )
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(MatrixParseError) as info:
            parse_matrix_market(text, path="m.mtx")
        assert info.value.lineno == line


class TestCsv:
    def test_all_zero(self):
        A = parse_dense_csv("0,0\n0,0\n")
        assert A.shape == (2, 2) and A.nnz == 0

    def test_ragged(self):
        with pytest.raises(MatrixParseError) as info:
            parse_dense_csv("1,2\n3\n")
        assert info.value.lineno == 2

    def test_bad_number(self):
        with pytest.raises(MatrixParseError):
            parse_dense_csv("1,abc\n")

    def test_dense_csv_round_trip(self, tmp_path, rng):
        W = rng.standard_normal((4, 3))
        write_dense_csv(W, tmp_path / "w.csv")
        assert np.array_equal(read_dense_csv(tmp_path / "w.csv"), W)


@pytest.mark.parametrize("name", ["a.mtx", "a.csv"])
def test_matrix_round_trip(name, tmp_path, rng):
    A = random_sparse(rng, 17, 6, zero_rows=(4,))
    save_matrix(A, tmp_path / name)
    assert load_matrix(tmp_path / name) == A


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_matrix(tmp_path / "nope.mtx")


def _all_sketches(rng):
    A = random_sparse(rng, 30, 5, zero_rows=(2,))
    b = rng.standard_normal(30)
    yield priority_sample(A, 8, 3)
    yield priority_sample(A, 40, 3)  # tau = inf
    yield threshold_sample(A, 6, 2**64 - 1)
    yield priority_sample(SparseMatrix.zeros(5, 3), 2, 0)  # empty
    yield priority_sample(A, 4, 1, weights=np.ones(30))
    for kind in LINEAR_KINDS:
        yield linear_sketch(A, 7, 11, kind)
    yield sketch_matrix_for_regression(A, 9, 5, EXACT)
    yield sketch_matrix_for_regression(A, 9, 5, SINGLE)
    yield sketch_matrix_for_regression(A, 30, 5, SINGLE)
    yield sketch_vector_for_regression(b, 6, 5)


def test_sketch_round_trips(rng, tmp_path):
    for i, S in enumerate(_all_sketches(rng)):
        back = loads_sketch(dumps_sketch(S))
        assert type(back) is type(S)
        assert back == S
        path = tmp_path / f"s{i}.sk"
        save_sketch(S, path)
        assert load_sketch(path) == S
        assert dumps_sketch(back) == dumps_sketch(S)


def test_infinite_tau_preserved(rng):
    S = priority_sample(random_sparse(rng, 5, 2), 10, 0)
    assert loads_sketch(dumps_sketch(S)).tau == np.inf


def test_bad_magic(rng):
    data = dumps_sketch(priority_sample(random_sparse(rng, 5, 2), 2, 0))
    with pytest.raises(SketchFormatError):
        loads_sketch(b"XXXXXXXX" + data[8:])


def test_bad_version(rng):
    data = bytearray(dumps_sketch(priority_sample(random_sparse(rng, 5, 2), 2, 0)))
    data[8] = 99
    with pytest.raises(SketchFormatError):
        loads_sketch(bytes(data))


def test_truncated_and_trailing(rng):
    data = dumps_sketch(linear_sketch(random_sparse(rng, 5, 2), 3, 0, "sign"))
    assert data.startswith(MAGIC)
    for cut in (4, 12, len(data) - 1):
        with pytest.raises(SketchFormatError):
            loads_sketch(data[:cut])
    with pytest.raises(SketchFormatError):
        loads_sketch(data + b"\0")


def test_unknown_record_type(rng):
    data = bytearray(dumps_sketch(LinearSketch("sign", 1, 0, np.ones((1, 1)))))
    data[12] = 77
    with pytest.raises(SketchFormatError):
        loads_sketch(bytes(data))
