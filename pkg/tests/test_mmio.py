"""MatrixMarket and vector-file round trips."""

import numpy as np
import pytest
import scipy.sparse as sp

from relaxkt import (DimensionMismatch, MatrixHandle, ParamError, read_matrix,
                     read_vector, write_matrix, write_vector)


def test_dense_matrix_round_trip_exact(tmp_path):
    rng = np.random.default_rng(0)
    dense = rng.standard_normal((6, 4)) * np.exp(rng.uniform(-20, 20, (6, 4)))
    path = tmp_path / "a.mtx"
    write_matrix(path, MatrixHandle(dense))
    back = read_matrix(path)
    assert not back.is_sparse
    assert np.array_equal(back.to_dense(), dense)


def test_sparse_matrix_round_trip_exact(tmp_path):
    rng = np.random.default_rng(1)
    dense = rng.standard_normal((8, 5))
    dense[rng.random((8, 5)) < 0.6] = 0.0
    dense[0, 0] = 1.0  # keep every row nonzero enough to construct
    path = tmp_path / "a.mtx"
    write_matrix(path, MatrixHandle(sp.csr_matrix(dense)))
    back = read_matrix(path)
    assert back.is_sparse
    assert np.array_equal(back.to_dense(), dense)


def test_read_matrix_missing_or_garbage(tmp_path):
    with pytest.raises((ParamError, OSError)):
        read_matrix(tmp_path / "missing.mtx")
    bad = tmp_path / "bad.mtx"
    bad.write_text("this is not a matrix\n")
    with pytest.raises(ParamError):
        read_matrix(bad)


def test_vector_round_trip_exact(tmp_path):
    values = np.array([0.1, -0.0, 1e-300, 1e300, 12345678901234.5,
                       np.pi, -7.25])
    path = tmp_path / "v.txt"
    write_vector(path, values)
    back = read_vector(path)
    assert np.array_equal(back, values)


def test_vector_comments_and_blanks(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("# header comment\n\n1.5\n  2.5  # trailing note\n\n-3.0\n")
    np.testing.assert_array_equal(read_vector(path), [1.5, 2.5, -3.0])


def test_vector_errors(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("1.0\nnot-a-number\n")
    with pytest.raises(ParamError):
        read_vector(path)
    path.write_text("1.0\n2.0\n")
    with pytest.raises(DimensionMismatch):
        read_vector(path, n=3)
