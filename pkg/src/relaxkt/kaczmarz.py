"""Relaxed row projections and sequential sweeps.

One step moves the iterate toward the hyperplane of row i:

    x <- x + mu_i * (b_i - <a_i, x>) / ||a_i||^2 * a_i

With mu_i = 1 this is the classic Kaczmarz update (exact projection); a full
sweep applies the steps for i = 1..m in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ParamError, ZeroRowError
from .linalg import MatrixHandle, as_vector


@dataclass(frozen=True)
class RelaxationSchedule:
    """Per-row relaxation parameters mu_1..mu_m.

    Convergence of the sweep iteration is guaranteed only for
    0 < mu_i < 2; schedules outside that range are constructible but carry
    ``warning = True``.
    """

    mu: np.ndarray
    mode: str = "per-row"
    seed: int | None = None

    def __post_init__(self):
        vec = as_vector(self.mu, name="mu")
        if vec.shape[0] == 0:
            raise ParamError("relaxation schedule must have at least one entry")
        object.__setattr__(self, "mu", vec)

    @classmethod
    def constant(cls, value: float, m: int) -> "RelaxationSchedule":
        """All rows share one relaxation value."""
        if m < 1:
            raise ParamError(f"m must be >= 1, got {m}")
        return cls(mu=np.full(m, float(value)), mode="constant")

    @classmethod
    def per_row(cls, values) -> "RelaxationSchedule":
        return cls(mu=np.asarray(values, dtype=np.float64), mode="per-row")

    @classmethod
    def random(cls, m: int, lo: float, hi: float, seed: int) -> "RelaxationSchedule":
        """Uniform draws from [lo, hi); same seed gives identical mu."""
        if m < 1:
            raise ParamError(f"m must be >= 1, got {m}")
        if not lo < hi:
            raise ParamError(f"need lo < hi, got [{lo}, {hi})")
        rng = np.random.default_rng(seed)
        return cls(mu=rng.uniform(lo, hi, size=m), mode="random", seed=seed)

    def __len__(self) -> int:
        return self.mu.shape[0]

    @property
    def convergent_regime(self) -> bool:
        """True when every mu_i lies strictly inside (0, 2)."""
        return bool(np.all((self.mu > 0.0) & (self.mu < 2.0)))

    @property
    def warning(self) -> bool:
        return not self.convergent_regime

    def check_length(self, m: int) -> None:
        if len(self) != m:
            raise DimensionMismatch(
                f"schedule has {len(self)} entries, matrix has {m} rows"
            )


def apply_row_projector(A: MatrixHandle, i: int, mu: float, x: np.ndarray) -> np.ndarray:
    """P_i(mu) x = x - mu * (a_i^T x / ||a_i||^2) * a_i, matrix-free."""
    nrm = A.row_norms_sq[i] if 0 <= i < A.rows else None
    if nrm is None:
        raise DimensionMismatch(f"row index {i} out of range for m={A.rows}")
    if nrm == 0.0:
        raise ZeroRowError(f"row {i} has zero norm")
    coeff = -mu * A.row_dot(i, x) / nrm
    return A.add_scaled_row(x, i, coeff)


def kaczmarz_step(A: MatrixHandle, b: np.ndarray, i: int, mu: float,
                  x: np.ndarray) -> np.ndarray:
    """One relaxed Kaczmarz update against row i; mu=1 is the classic step."""
    if not 0 <= i < A.rows:
        raise DimensionMismatch(f"row index {i} out of range for m={A.rows}")
    nrm = A.row_norms_sq[i]
    if nrm == 0.0:
        raise ZeroRowError(f"row {i} has zero norm")
    coeff = mu * (b[i] - A.row_dot(i, x)) / nrm
    return A.add_scaled_row(x, i, coeff)


def sweep(A: MatrixHandle, b: np.ndarray, u: RelaxationSchedule, x: np.ndarray,
          skip_zero_rows: bool = False) -> np.ndarray:
    """One full pass of kaczmarz_step over rows i = 1..m in order.

    Equals one standard-form iteration of the same system (the sequential
    composition P_m(mu_m)...P_1(mu_1) plus data terms). Zero rows raise
    ZeroRowError unless ``skip_zero_rows`` is set, in which case the row is
    ignored for the pass.
    """
    u.check_length(A.rows)
    b = as_vector(b, A.rows, "b")
    x = as_vector(x, A.cols, "x")
    mu = u.mu
    for i in range(A.rows):
        if skip_zero_rows and A.row_norms_sq[i] == 0.0:
            continue
        x = kaczmarz_step(A, b, i, float(mu[i]), x)
    return x
