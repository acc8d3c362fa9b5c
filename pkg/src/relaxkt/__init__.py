"""Row-action solvers for consistent linear systems Ax = b.

Relaxed Kaczmarz sweeps, their single matrix-vector standard form built on
the unit upper triangular compatibility factor C(u), and spectral tools
that bound the per-sweep convergence rate.
"""

from .errors import (DimensionMismatch, NonFiniteError, ParamError,
                     RelaxKTError, SizeError, ZeroRowError)
from .linalg import (MatrixHandle, NullspaceInfo, as_vector, min_norm_solution,
                     nullspace_basis, row_inner)
from .kaczmarz import (RelaxationSchedule, apply_row_projector, kaczmarz_step,
                       sweep)
from .tanabe import (SolveConfig, SolveRun, TriangularFactor, UpperFactorTu,
                     assemble_AS_oracle, build_C_algorithm1, build_C_hproduct,
                     build_C_index_formula, extract_Tu, kt_iterate, solve)
from .analysis import (CheckResult, InvariantReport, IterationOperator,
                       RateReport, assemble_Q, restricted_rate,
                       run_invariant_suite)
from .problems import ProblemSpec, generate, tomo_matrix
from .mmio import read_matrix, read_vector, write_matrix, write_vector

__version__ = "0.1.0"

__all__ = [
    "DimensionMismatch", "NonFiniteError", "ParamError", "RelaxKTError",
    "SizeError", "ZeroRowError",
    "MatrixHandle", "NullspaceInfo", "as_vector", "min_norm_solution",
    "nullspace_basis", "row_inner",
    "RelaxationSchedule", "apply_row_projector", "kaczmarz_step", "sweep",
    "SolveConfig", "SolveRun", "TriangularFactor", "UpperFactorTu",
    "assemble_AS_oracle", "build_C_algorithm1", "build_C_hproduct",
    "build_C_index_formula", "extract_Tu", "kt_iterate", "solve",
    "CheckResult", "InvariantReport", "IterationOperator", "RateReport",
    "assemble_Q", "restricted_rate", "run_invariant_suite",
    "ProblemSpec", "generate", "tomo_matrix",
    "read_matrix", "read_vector", "write_matrix", "write_vector",
    "__version__",
]
