"""Standard form of the relaxed sweep iteration.

A full sweep of relaxed row projections can be written as one matrix-vector
update

    y <- y + A^T C(u)^T Lambda M (b - A y)

where M = diag(1/||a_i||^2), Lambda = diag(mu_1..mu_m), and C(u) is a unit
upper triangular compatibility factor depending on the rows of A and the
relaxation schedule u. Row i of C(u) holds the coefficients that express the
i-th swept row of A in terms of rows i..m of A.

Three independent constructions of C(u) live here:

* ``build_C_algorithm1``: the in-place triple loop (production default),
* ``build_C_hproduct``: accumulated product of elementary row operations,
* ``build_C_index_formula``: brute-force signed sum over increasing index
  chains; exponential cost, desk-scale oracle only.

All three must agree; the tests hold them to that.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, NonFiniteError, ParamError, SizeError,
                     ZeroRowError)
from .kaczmarz import RelaxationSchedule, apply_row_projector, sweep
from .linalg import MatrixHandle, as_vector, _check_desk_scale

# Chain enumeration in build_C_index_formula is exponential in m.
INDEX_FORMULA_MAX_M = 14

# A run is declared diverged once the residual exceeds this multiple of its
# starting value.
DIVERGENCE_FACTOR = 1e12


def _packed_start(m: int, i: int) -> int:
    # start of row i's segment in row-major packed upper-triangular storage
    return i * m - (i * (i - 1)) // 2


class TriangularFactor:
    """Unit upper triangular factor C(u), packed row-major.

    Stores the m(m+1)/2 entries on and above the diagonal; row i's segment
    covers columns i..m-1 and always starts with the unit diagonal entry.
    ``provenance`` records which construction produced it.
    """

    def __init__(self, order: int, data: np.ndarray, provenance: str):
        expected = order * (order + 1) // 2
        data = np.asarray(data, dtype=np.float64)
        if data.shape != (expected,):
            raise DimensionMismatch(
                f"packed data has length {data.shape[0]}, expected {expected}"
            )
        for i in range(order):
            if data[_packed_start(order, i)] != 1.0:
                raise ParamError(f"diagonal entry {i} is not exactly 1")
        self.order = order
        self.data = data
        self.provenance = provenance

    @classmethod
    def from_dense(cls, dense: np.ndarray, provenance: str) -> "TriangularFactor":
        dense = np.asarray(dense, dtype=np.float64)
        m = dense.shape[0]
        if dense.shape != (m, m):
            raise DimensionMismatch(f"expected square matrix, got {dense.shape}")
        if m > 1 and np.any(dense[np.tril_indices(m, -1)] != 0.0):
            raise ParamError("strictly lower triangle is not zero")
        return cls(m, dense[np.triu_indices(m)], provenance)

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.order and 0 <= j < self.order):
            raise DimensionMismatch(f"index ({i},{j}) out of range for m={self.order}")
        if j < i:
            return 0.0
        return float(self.data[_packed_start(self.order, i) + (j - i)])

    def row(self, i: int) -> np.ndarray:
        """Row i as a full-length vector: (0,..,0,1,d_{i,i+1},..,d_{i,m})."""
        out = np.zeros(self.order)
        s = _packed_start(self.order, i)
        out[i:] = self.data[s:s + (self.order - i)]
        return out

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.order, self.order))
        out[np.triu_indices(self.order)] = self.data
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """C @ x."""
        x = as_vector(x, self.order, "x")
        out = np.empty(self.order)
        for i in range(self.order):
            s = _packed_start(self.order, i)
            out[i] = self.data[s:s + (self.order - i)] @ x[i:]
        return out

    def transpose_matvec(self, x: np.ndarray) -> np.ndarray:
        """C^T @ x."""
        x = as_vector(x, self.order, "x")
        out = np.zeros(self.order)
        for i in range(self.order):
            s = _packed_start(self.order, i)
            out[i:] += self.data[s:s + (self.order - i)] * x[i]
        return out


class UpperFactorTu:
    """Upper triangular factor T_u with Lambda C(u) = T_u M.

    Diagonal entry (i,i) is mu_i ||a_i||^2; same packed layout as
    TriangularFactor but without the unit-diagonal constraint.
    """

    def __init__(self, order: int, data: np.ndarray):
        expected = order * (order + 1) // 2
        data = np.asarray(data, dtype=np.float64)
        if data.shape != (expected,):
            raise DimensionMismatch(
                f"packed data has length {data.shape[0]}, expected {expected}"
            )
        self.order = order
        self.data = data

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.order and 0 <= j < self.order):
            raise DimensionMismatch(f"index ({i},{j}) out of range for m={self.order}")
        if j < i:
            return 0.0
        return float(self.data[_packed_start(self.order, i) + (j - i)])

    @property
    def diagonal(self) -> np.ndarray:
        return np.array([self.data[_packed_start(self.order, i)]
                         for i in range(self.order)])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.order, self.order))
        out[np.triu_indices(self.order)] = self.data
        return out


def _normalized_gram(A: MatrixHandle) -> np.ndarray:
    """h[j, i] = a_j^T a_i / ||a_i||^2 for all pairs; raises on zero rows."""
    if A.has_zero_rows:
        raise ZeroRowError("matrix has a zero row; h is undefined")
    return A.gram() / A.row_norms_sq[np.newaxis, :]


def build_C_algorithm1(A: MatrixHandle, u: RelaxationSchedule) -> TriangularFactor:
    """Compatibility factor via the in-place triple loop.

    Starts from the identity and, sweeping k from the last row down to the
    second, folds row k's coupling into every earlier row:

        C[i-1, j] += mu_k * (-a_{i-1}^T a_k / a_k^T a_k) * C[k, j]

    for j = k..m. Rows with a_k^T a_k = 0 are skipped, which leaves their
    couplings at zero. The inner updates for a fixed k are independent, so
    the j loop is vectorized.
    """
    m = A.rows
    u.check_length(m)
    mu = u.mu
    gram = A.gram()
    norms = A.row_norms_sq
    C = np.eye(m)
    for k in range(m - 1, 0, -1):
        nrm = norms[k]
        if nrm == 0.0:
            continue
        for i in range(k, 0, -1):
            scale = -mu[k] * gram[i - 1, k] / nrm
            if scale != 0.0:
                C[i - 1, k:] += scale * C[k, k:]
    return TriangularFactor.from_dense(C, "algorithm1")


def build_C_hproduct(A: MatrixHandle, u: RelaxationSchedule) -> TriangularFactor:
    """Compatibility factor as a product of elementary row operations.

    The factor is H_1 H_2 ... H_m where H_i adds -mu_i h_{j,i} times row i
    of the identity to each earlier row j < i. Multiplying the running
    product by H_i on the right only changes column i:

        C[:i, i] += C[:i, :i] @ (-mu_i * h[:i, i])

    so nothing larger than the running factor is ever materialized. The
    column updates must proceed in ascending i.
    """
    m = A.rows
    u.check_length(m)
    h = _normalized_gram(A)
    mu = u.mu
    C = np.eye(m)
    for i in range(1, m):
        coeffs = -mu[i] * h[:i, i]
        C[:i, i] += C[:i, :i] @ coeffs
    return TriangularFactor.from_dense(C, "h-product")


def build_C_index_formula(A: MatrixHandle, u: RelaxationSchedule) -> TriangularFactor:
    """Compatibility factor by brute-force chain enumeration.

    Entry (i, j) above the diagonal is a signed sum over all strictly
    increasing index chains i = t_0 < t_1 < ... < t_{v-1} = j:

        d_{i,j} = sum_v (-1)^(v-1) sum_chains prod_s mu_{t_{s+1}} h_{t_s, t_{s+1}}

    Enumeration is exponential in j - i, so this is capped at m <= 14 and
    used as the independent oracle for the other two builders.
    """
    m = A.rows
    u.check_length(m)
    if m > INDEX_FORMULA_MAX_M:
        raise SizeError(
            f"chain enumeration is exponential; m={m} exceeds {INDEX_FORMULA_MAX_M}"
        )
    h = _normalized_gram(A)
    mu = u.mu
    C = np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            total = 0.0
            for v in range(2, j - i + 2):
                sign = (-1.0) ** (v - 1)
                for interior in itertools.combinations(range(i + 1, j), v - 2):
                    chain = (i, *interior, j)
                    term = 1.0
                    for s in range(v - 1):
                        term *= mu[chain[s + 1]] * h[chain[s], chain[s + 1]]
                    total += sign * term
            C[i, j] = total
    return TriangularFactor.from_dense(C, "index-formula")


def assemble_AS_oracle(A: MatrixHandle, u: RelaxationSchedule) -> np.ndarray:
    """Swept rows of A, built directly from projector compositions.

    Row j of the result is a_j pushed through the trailing projectors
    P_{j+1}(mu_{j+1}), ..., P_m(mu_m) in that order. Dense desk-scale
    construction; tests compare it against C(u) @ A.
    """
    _check_desk_scale(A, "assemble_AS_oracle")
    m = A.rows
    u.check_length(m)
    mu = u.mu
    out = np.empty((m, A.cols))
    for j in range(m):
        v = A.row(j)
        for t in range(j + 1, m):
            v = apply_row_projector(A, t, float(mu[t]), v)
        out[j] = v
    return out


def extract_Tu(C: TriangularFactor, A: MatrixHandle,
               u: RelaxationSchedule) -> UpperFactorTu:
    """Rescale C(u) into T_u, the factor with Lambda C(u) = T_u M.

    Entrywise T_u(i, j) = mu_i * C(i, j) * ||a_j||^2, so the diagonal is
    mu_i ||a_i||^2. Needs every row norm nonzero (M must be invertible).
    """
    m = C.order
    u.check_length(m)
    if A.rows != m:
        raise DimensionMismatch(f"factor order {m} vs matrix rows {A.rows}")
    if A.has_zero_rows:
        raise ZeroRowError("matrix has a zero row; M is singular")
    norms = A.row_norms_sq
    mu = u.mu
    data = np.empty_like(C.data)
    for i in range(m):
        s = _packed_start(m, i)
        data[s:s + (m - i)] = mu[i] * C.data[s:s + (m - i)] * norms[i:]
    return UpperFactorTu(m, data)


def kt_iterate(A: MatrixHandle, C: TriangularFactor, u: RelaxationSchedule,
               b: np.ndarray, y: np.ndarray) -> np.ndarray:
    """One standard-form iteration: y + A^T C^T Lambda M (b - A y).

    Applies the diagonal scalings before the triangular transpose; the two
    do not commute. Rows with zero norm contribute nothing (their M entry
    is treated as 0). Cost is one A product, one A^T product, and one
    triangular-transpose product; the m x m sweep operator is never formed.
    """
    m, n = A.shape
    if C.order != m:
        raise DimensionMismatch(f"factor order {C.order} vs matrix rows {m}")
    u.check_length(m)
    b = as_vector(b, m, "b")
    y = as_vector(y, n, "y")
    r = b - A.matvec(y)
    norms = A.row_norms_sq
    s = np.divide(r, norms, out=np.zeros_like(r), where=norms > 0.0)
    s *= u.mu
    s = C.transpose_matvec(s)
    return y + A.rmatvec(s)


@dataclass(frozen=True)
class SolveConfig:
    """Knobs for the solver loop."""

    x0: np.ndarray | None = None
    tol: float = 1e-10
    max_iters: int = 1000
    builder: str = "algorithm1"
    engine: str = "standard_form"
    reference: np.ndarray | None = None  # vector to measure error against


@dataclass
class SolveRun:
    """Outcome of a solver run with per-iteration history."""

    x: np.ndarray
    converged: bool
    termination: str  # converged | max_iters | diverged
    iterations: int
    residuals: np.ndarray          # relative residuals, index 0 = start
    errors: np.ndarray | None      # ||y_k - reference||, same indexing
    times_ms: np.ndarray           # cumulative wall time, same indexing
    C: TriangularFactor | None
    schedule_warning: bool


_BUILDERS = {
    "algorithm1": build_C_algorithm1,
    "h-product": build_C_hproduct,
    "index-formula": build_C_index_formula,
}


def solve(A: MatrixHandle, b: np.ndarray, u: RelaxationSchedule,
          config: SolveConfig | None = None) -> SolveRun:
    """Iterate the standard form until the relative residual meets tol.

    The compatibility factor is built once up front (builder selectable;
    the triple-loop construction is the default). ``engine`` picks between
    the matrix-form update and the equivalent row-by-row sweep. Assumes a
    consistent system; on inconsistent data the residual stalls above tol
    and the run ends at max_iters.

    A run whose residual grows past DIVERGENCE_FACTOR times its starting
    value, or stops being finite, is cut off and flagged diverged rather
    than raising. That is the expected exit when some mu_i lies outside
    (0, 2).
    """
    cfg = config if config is not None else SolveConfig()
    m, n = A.shape
    u.check_length(m)
    if A.has_zero_rows:
        raise ZeroRowError("matrix has a zero row; drop it before solving")
    b = as_vector(b, m, "b")
    y = (np.zeros(n) if cfg.x0 is None else as_vector(cfg.x0, n, "x0")).copy()
    if cfg.engine not in ("standard_form", "row_action"):
        raise ParamError(f"unknown engine {cfg.engine!r}")
    if cfg.max_iters < 0:
        raise ParamError(f"max_iters must be >= 0, got {cfg.max_iters}")

    C: TriangularFactor | None = None
    if cfg.engine == "standard_form":
        try:
            builder = _BUILDERS[cfg.builder]
        except KeyError:
            raise ParamError(f"unknown builder {cfg.builder!r}") from None
        C = builder(A, u)

    b_norm = float(np.linalg.norm(b))
    scale = b_norm if b_norm > 0.0 else 1.0

    def rel_residual(vec: np.ndarray) -> float:
        return float(np.linalg.norm(b - A.matvec(vec))) / scale

    reference = None
    if cfg.reference is not None:
        reference = as_vector(cfg.reference, n, "reference")

    start = time.perf_counter()
    residuals = [rel_residual(y)]
    errors = [float(np.linalg.norm(y - reference))] if reference is not None else None
    times = [0.0]

    converged = residuals[0] <= cfg.tol
    termination = "converged" if converged else "max_iters"
    k = 0
    if not converged:
        initial = residuals[0]
        for k in range(1, cfg.max_iters + 1):
            if cfg.engine == "standard_form":
                y = kt_iterate(A, C, u, b, y)
            else:
                y = sweep(A, b, u, y)
            res = rel_residual(y)
            residuals.append(res)
            if errors is not None:
                errors.append(float(np.linalg.norm(y - reference)))
            times.append((time.perf_counter() - start) * 1e3)
            if not np.isfinite(res) or (initial > 0.0
                                        and res > DIVERGENCE_FACTOR * initial):
                termination = "diverged"
                break
            if res <= cfg.tol:
                converged = True
                termination = "converged"
                break
        else:
            k = cfg.max_iters

    return SolveRun(
        x=y,
        converged=converged,
        termination=termination,
        iterations=k,
        residuals=np.asarray(residuals),
        errors=np.asarray(errors) if errors is not None else None,
        times_ms=np.asarray(times),
        C=C,
        schedule_warning=u.warning,
    )
