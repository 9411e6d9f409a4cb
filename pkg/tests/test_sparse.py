import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from lpipm import SparseMatrix, form_normal_matrix


class TestSparseMatrix:
    def test_from_dense_round_trip(self):
        A = np.array([[1.0, 0.0, 2.0], [0.0, 3.0, 0.0]])
        S = SparseMatrix.from_dense(A)
        assert S.shape == (2, 3)
        assert S.nnz == 3
        assert_array_equal(S.to_dense(), A)

    def test_canonical_invariants(self):
        rng = np.random.default_rng(0)
        A = rng.standard_normal((7, 11))
        A[rng.random((7, 11)) > 0.4] = 0.0
        S = SparseMatrix.from_dense(A)
        assert S.col_ptr[0] == 0 and S.col_ptr[-1] == S.nnz
        assert np.all(np.diff(S.col_ptr) >= 0)
        for j in range(S.ncols):
            rows = S.row_idx[S.col_ptr[j]:S.col_ptr[j + 1]]
            assert np.all(np.diff(rows) > 0)
        assert not np.any(S.values == 0.0)

    def test_duplicates_summed_and_zeros_dropped(self):
        S = SparseMatrix.from_coo(2, 2, [0, 0, 1], [0, 0, 1], [1.0, 2.0, 0.0])
        assert S.nnz == 1
        assert S.to_dense()[0, 0] == 3.0

    def test_rejects_bad_col_ptr(self):
        with pytest.raises(ValueError):
            SparseMatrix(2, 2, np.array([0, 2, 1]), np.array([0, 1]), np.array([1.0, 1.0]))

    def test_rejects_unsorted_rows(self):
        with pytest.raises(ValueError):
            SparseMatrix(3, 1, np.array([0, 2]), np.array([2, 1]), np.array([1.0, 1.0]))

    def test_matvec_and_transpose(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((4, 6))
        S = SparseMatrix.from_dense(A)
        v = rng.standard_normal(6)
        w = rng.standard_normal(4)
        assert_allclose(S.matvec(v), A @ v)
        assert_allclose(S.rmatvec(w), A.T @ w)
        assert_array_equal(S.transpose().to_dense(), A.T)

    def test_arrays_read_only(self):
        S = SparseMatrix.identity(3)
        with pytest.raises(ValueError):
            S.values[0] = 5.0


class TestFormNormalMatrix:
    def test_identity_case(self):
        A = SparseMatrix.identity(2)
        M = form_normal_matrix(A, np.ones(2))
        assert_array_equal(M.to_dense(), np.eye(2))

    def test_row_vector_by_hand(self):
        A = SparseMatrix.from_dense([[1.0, 1.0]])
        M = form_normal_matrix(A, np.array([1.0, 2.0]))
        assert_array_equal(M.to_dense(), [[5.0]])

    def test_shift_by_hand(self):
        A = SparseMatrix.from_dense([[1.0, 1.0]])
        M = form_normal_matrix(A, np.array([1.0, 1.0]), shift=np.array([3.0]))
        assert_array_equal(M.to_dense(), [[5.0]])

    def test_matches_dense_formula(self):
        rng = np.random.default_rng(2)
        A = rng.standard_normal((5, 9))
        d = rng.uniform(0.1, 3.0, 9)
        shift = rng.uniform(0.0, 1.0, 5)
        M = form_normal_matrix(SparseMatrix.from_dense(A), d, shift)
        assert_allclose(M.to_dense(), A @ np.diag(d**2) @ A.T + np.diag(shift),
                        rtol=1e-13, atol=1e-13)

    def test_bitwise_symmetric_storage(self):
        rng = np.random.default_rng(3)
        for trial in range(20):
            A = rng.standard_normal((8, 15))
            A[rng.random((8, 15)) > 0.5] = 0.0
            d = rng.uniform(0.01, 100.0, 15)
            M = form_normal_matrix(SparseMatrix.from_dense(A), d)
            D = M.to_dense()
            # not just close: the two triangles must be identical bitwise
            assert np.array_equal(D, D.T)

    def test_dimension_and_sign_errors(self):
        A = SparseMatrix.from_dense([[1.0, 1.0]])
        with pytest.raises(ValueError):
            form_normal_matrix(A, np.ones(3))
        with pytest.raises(ValueError):
            form_normal_matrix(A, np.array([1.0, -1.0]))
        with pytest.raises(ValueError):
            form_normal_matrix(A, np.ones(2), shift=np.ones(2))
