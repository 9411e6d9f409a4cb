"""Compressed sparse column storage and normal-matrix assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable CSC matrix of 64-bit floats.

    Canonical form is enforced on construction: ``col_ptr`` is
    nondecreasing with ``col_ptr[0] == 0`` and ``col_ptr[-1] == nnz``,
    row indices are strictly increasing within each column, and no
    explicit zeros are stored.
    """

    nrows: int
    ncols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray
    _csc: sps.csc_matrix = field(init=False, repr=False, compare=False)
    _csc_T: sps.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        col_ptr = np.ascontiguousarray(self.col_ptr, dtype=np.int64)
        row_idx = np.ascontiguousarray(self.row_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if col_ptr.shape != (self.ncols + 1,):
            raise ValueError("col_ptr must have length ncols + 1")
        if col_ptr[0] != 0 or col_ptr[-1] != row_idx.size:
            raise ValueError("col_ptr endpoints do not match nnz")
        if np.any(np.diff(col_ptr) < 0):
            raise ValueError("col_ptr must be nondecreasing")
        if row_idx.size != values.size:
            raise ValueError("row_idx and values length mismatch")
        if row_idx.size:
            if row_idx.min() < 0 or row_idx.max() >= self.nrows:
                raise ValueError("row index out of range")
            # strictly increasing rows within each column (vectorized:
            # adjacent pairs that do not straddle a column boundary)
            if row_idx.size > 1:
                starts = np.zeros(row_idx.size, dtype=bool)
                inner = col_ptr[1:-1]
                starts[inner[inner < row_idx.size]] = True
                within = ~starts[1:]
                if np.any((np.diff(row_idx) <= 0) & within):
                    raise ValueError("rows not strictly increasing within a column")
        if np.any(values == 0.0):
            raise ValueError("explicit zeros are not allowed after canonicalization")
        for arr in (col_ptr, row_idx, values):
            arr.flags.writeable = False
        object.__setattr__(self, "col_ptr", col_ptr)
        object.__setattr__(self, "row_idx", row_idx)
        object.__setattr__(self, "values", values)
        csc = sps.csc_matrix(
            (values, row_idx, col_ptr), shape=(self.nrows, self.ncols), copy=False
        )
        object.__setattr__(self, "_csc", csc)
        object.__setattr__(self, "_csc_T", csc.T)  # csr view, built once

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_scipy(mat) -> "SparseMatrix":
        csc = sps.csc_matrix(mat, dtype=np.float64, copy=True)
        return SparseMatrix._from_owned_csc(csc)

    @staticmethod
    def _from_owned_csc(csc) -> "SparseMatrix":
        """Canonicalize in place; the caller must not reuse ``csc``."""
        csc.sum_duplicates()
        csc.sort_indices()
        csc.eliminate_zeros()
        return SparseMatrix(
            csc.shape[0],
            csc.shape[1],
            csc.indptr.astype(np.int64),
            csc.indices.astype(np.int64),
            csc.data.astype(np.float64),
        )

    @staticmethod
    def from_dense(arr) -> "SparseMatrix":
        return SparseMatrix.from_scipy(sps.csc_matrix(np.asarray(arr, dtype=np.float64)))

    @staticmethod
    def from_coo(nrows, ncols, rows, cols, vals) -> "SparseMatrix":
        coo = sps.coo_matrix(
            (np.asarray(vals, dtype=np.float64), (rows, cols)), shape=(nrows, ncols)
        )
        return SparseMatrix.from_scipy(coo)

    @staticmethod
    def identity(n) -> "SparseMatrix":
        return SparseMatrix.from_scipy(sps.identity(n, format="csc"))

    # -- queries ------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def to_scipy(self) -> sps.csc_matrix:
        return self._csc

    def to_dense(self) -> np.ndarray:
        return self._csc.toarray()

    def matvec(self, v) -> np.ndarray:
        return self._csc.dot(np.asarray(v, dtype=np.float64))

    def rmatvec(self, v) -> np.ndarray:
        """Transpose product ``A.T @ v``."""
        return self._csc_T.dot(np.asarray(v, dtype=np.float64))

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_scipy(self._csc.T)

    def scale_columns(self, d) -> "SparseMatrix":
        d = np.asarray(d, dtype=np.float64)
        if d.shape != (self.ncols,):
            raise ValueError("column scaling length mismatch")
        scaled = self._csc.multiply(d[np.newaxis, :]).tocsc()
        return SparseMatrix.from_scipy(scaled)


def form_normal_matrix(A: SparseMatrix, d, shift=None) -> SparseMatrix:
    """Assemble ``A @ diag(d**2) @ A.T`` plus an optional diagonal shift.

    Both triangles are stored and are bitwise identical: each entry pair
    is replaced by ``(m_ij + m_ji) * 0.5``, which IEEE addition makes
    exactly equal on both sides (and exactly ``m_ij`` where the matmul
    already agreed).
    """
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (A.ncols,):
        raise ValueError(f"scaling vector has length {d.size}, expected {A.ncols}")
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise ValueError("scaling entries must be strictly positive and finite")
    if shift is not None:
        shift = np.asarray(shift, dtype=np.float64)
        if shift.shape != (A.nrows,):
            raise ValueError(f"shift has length {shift.size}, expected {A.nrows}")

    # column scaling on the raw CSC arrays avoids sparse-object churn
    csc = A.to_scipy()
    col_of_entry = np.repeat(np.arange(A.ncols), np.diff(A.col_ptr))
    B = sps.csc_matrix(
        (A.values * d[col_of_entry], A.row_idx, A.col_ptr),
        shape=A.shape, copy=False,
    )
    del csc
    M = (B @ B.T).tocsc()
    sym = ((M + M.T) * 0.5).tocsc()
    if shift is not None:
        sym = (sym + sps.diags(shift, format="csc")).tocsc()
    return SparseMatrix._from_owned_csc(sym)
