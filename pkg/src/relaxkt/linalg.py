"""Matrix/vector plumbing: row access, norms, and small dense decompositions.

The solver operates on rows of A, so ``MatrixHandle`` caches per-row squared
norms and exposes row-level products for both dense and CSR storage. The
null-space routines are dense desk-scale oracles used by tests and the
analysis module, never by the iteration itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NonFiniteError, SizeError, ZeroRowError

# Dense oracles (null space, min-norm solution, A_S assembly) refuse inputs
# beyond this many matrix entries.
DESK_SCALE_ENTRIES = 10_000

# Relative singular-value cutoff for rank decisions in the dense oracles.
RANK_CUTOFF = 1e-10


def as_vector(x, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Validate and return ``x`` as a 1-D float64 array with finite entries."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return v


class MatrixHandle:
    """The system matrix with cached row geometry.

    Wraps either a dense row-major array or a ``scipy.sparse`` CSR matrix and
    precomputes ``row_norms_sq[i] = ||a_i||_2^2``. Rows with zero norm are
    detected at construction (``has_zero_rows``); the row-action methods
    assume there are none, and builders either guard or raise on them.

    All operations are pure; instances are treated as immutable.
    """

    def __init__(self, values):
        if sp.issparse(values):
            mat = sp.csr_matrix(values).astype(np.float64)
            if mat.nnz and not np.all(np.isfinite(mat.data)):
                raise NonFiniteError("matrix contains NaN or Inf")
            self._sparse: sp.csr_matrix | None = mat
            self._dense: np.ndarray | None = None
            norms = np.asarray(mat.multiply(mat).sum(axis=1)).ravel()
        else:
            arr = np.ascontiguousarray(values, dtype=np.float64)
            if arr.ndim != 2:
                raise DimensionMismatch(f"matrix must be 2-D, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError("matrix contains NaN or Inf")
            self._sparse = None
            self._dense = arr
            norms = np.einsum("ij,ij->i", arr, arr)
        self._row_norms_sq = norms
        self.has_zero_rows = bool(np.any(norms == 0.0))

    # -- shape ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        m = self._sparse if self._sparse is not None else self._dense
        return m.shape  # type: ignore[union-attr]

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def is_sparse(self) -> bool:
        return self._sparse is not None

    @property
    def row_norms_sq(self) -> np.ndarray:
        return self._row_norms_sq

    def recompute_row_norms_sq(self) -> np.ndarray:
        """Recompute ||a_i||^2 from storage (invariant check helper)."""
        if self._sparse is not None:
            return np.asarray(self._sparse.multiply(self._sparse).sum(axis=1)).ravel()
        return np.einsum("ij,ij->i", self._dense, self._dense)

    # -- row-level products ----------------------------------------------------

    def _check_row(self, i: int) -> None:
        if not 0 <= i < self.rows:
            raise DimensionMismatch(f"row index {i} out of range for m={self.rows}")

    def row(self, i: int) -> np.ndarray:
        """Row i as a dense 1-D array."""
        self._check_row(i)
        if self._sparse is not None:
            return self._sparse.getrow(i).toarray().ravel()
        return self._dense[i].copy()

    def row_dot(self, i: int, x: np.ndarray) -> float:
        """a_i^T x."""
        self._check_row(i)
        if self._sparse is not None:
            s = self._sparse
            lo, hi = s.indptr[i], s.indptr[i + 1]
            return float(s.data[lo:hi] @ x[s.indices[lo:hi]])
        return float(self._dense[i] @ x)

    def add_scaled_row(self, x: np.ndarray, i: int, coeff: float) -> np.ndarray:
        """x + coeff * a_i as a new array."""
        self._check_row(i)
        if self._sparse is not None:
            s = self._sparse
            lo, hi = s.indptr[i], s.indptr[i + 1]
            out = x.copy()
            out[s.indices[lo:hi]] += coeff * s.data[lo:hi]
            return out
        return x + coeff * self._dense[i]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """A @ x."""
        if self._sparse is not None:
            return self._sparse @ x
        return self._dense @ x

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """A^T @ y."""
        if self._sparse is not None:
            return self._sparse.T @ y
        return self._dense.T @ y

    def gram(self) -> np.ndarray:
        """Dense m-by-m matrix of row inner products a_i^T a_j."""
        if self._sparse is not None:
            return (self._sparse @ self._sparse.T).toarray()
        return self._dense @ self._dense.T

    def to_dense(self) -> np.ndarray:
        if self._sparse is not None:
            return self._sparse.toarray()
        return self._dense.copy()

    def raw(self):
        """Underlying storage (ndarray or csr_matrix), for I/O."""
        return self._sparse if self._sparse is not None else self._dense


def row_inner(A: MatrixHandle, j: int, i: int) -> float:
    """Normalized row inner product h[j, i] = a_j^T a_i / ||a_i||^2.

    The denominator belongs to the second index; the value is not symmetric
    in (j, i). Indices are 0-based. Raises ZeroRowError when row i has zero
    norm.
    """
    A._check_row(j)
    A._check_row(i)
    nrm = A.row_norms_sq[i]
    if nrm == 0.0:
        raise ZeroRowError(f"row {i} has zero norm")
    return float(np.dot(A.row(j), A.row(i))) / nrm


@dataclass(frozen=True)
class NullspaceInfo:
    """Orthonormal basis of N(A) with the induced orthogonal projectors."""

    basis: np.ndarray            # n x k, orthonormal columns spanning N(A)
    rank: int
    projector_null: np.ndarray   # B B^T
    projector_rowspace: np.ndarray  # I - B B^T, projects onto R(A^T)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def _check_desk_scale(A: MatrixHandle, what: str) -> None:
    if A.rows * A.cols > DESK_SCALE_ENTRIES:
        raise SizeError(
            f"{what} is a desk-scale dense oracle; "
            f"{A.rows}x{A.cols} exceeds {DESK_SCALE_ENTRIES} entries"
        )


def nullspace_basis(A: MatrixHandle) -> NullspaceInfo:
    """Orthonormal basis of N(A) via a dense SVD (desk-scale oracle).

    Rank is decided with a relative cutoff of ``RANK_CUTOFF`` times the
    largest singular value. Also returns the projectors B B^T onto N(A) and
    I - B B^T onto R(A^T).
    """
    _check_desk_scale(A, "nullspace_basis")
    dense = A.to_dense()
    n = A.cols
    _, svals, vt = np.linalg.svd(dense, full_matrices=True)
    if svals.size and svals[0] > 0.0:
        rank = int(np.sum(svals > RANK_CUTOFF * svals[0]))
    else:
        rank = 0
    basis = vt[rank:].T.copy()  # n x (n - rank)
    proj_null = basis @ basis.T
    proj_row = np.eye(n) - proj_null
    return NullspaceInfo(basis=basis, rank=rank,
                         projector_null=proj_null, projector_rowspace=proj_row)


def min_norm_solution(A: MatrixHandle, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution via dense SVD (desk-scale oracle).

    Uses the same rank cutoff as ``nullspace_basis`` so the two oracles agree
    on which directions belong to N(A).
    """
    _check_desk_scale(A, "min_norm_solution")
    b = as_vector(b, A.rows, "b")
    u, svals, vt = np.linalg.svd(A.to_dense(), full_matrices=False)
    if svals.size and svals[0] > 0.0:
        keep = svals > RANK_CUTOFF * svals[0]
    else:
        keep = np.zeros_like(svals, dtype=bool)
    coeffs = np.zeros_like(svals)
    proj = u.T @ b
    coeffs[keep] = proj[keep] / svals[keep]
    return vt.T @ coeffs
