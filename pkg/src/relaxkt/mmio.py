"""File formats: MatrixMarket matrices and plain-text vectors.

Matrices travel as MatrixMarket (.mtx) files, dense ``array`` or sparse
``coordinate`` variants, delegated to ``scipy.io``. Writing uses 17
significant digits so float64 values round-trip exactly. Vectors travel as
one-value-per-line text files; blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import DimensionMismatch, ParamError
from .linalg import MatrixHandle, as_vector


def read_matrix(path) -> MatrixHandle:
    """Read a MatrixMarket file into a MatrixHandle.

    Coordinate files come back as CSR, array files as dense. Symmetric
    storage is expanded on read.
    """
    try:
        mat = scipy.io.mmread(path)
    except (ValueError, OSError) as exc:
        raise ParamError(f"cannot read MatrixMarket file {path}: {exc}") from exc
    if sp.issparse(mat):
        return MatrixHandle(mat.tocsr())
    return MatrixHandle(np.asarray(mat, dtype=np.float64))


def write_matrix(path, A: MatrixHandle) -> None:
    """Write a MatrixHandle as MatrixMarket, keeping its storage kind."""
    scipy.io.mmwrite(path, A.raw(), precision=17)


def read_vector(path, n: int | None = None) -> np.ndarray:
    """Read a vector from a text file, one value per line.

    Blank lines and lines starting with ``#`` are skipped; a trailing
    ``#`` comment on a value line is also allowed.
    """
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError as exc:
                raise ParamError(
                    f"{path}: line {lineno} is not a number: {text!r}"
                ) from exc
    vec = np.asarray(values, dtype=np.float64)
    if n is not None and vec.shape[0] != n:
        raise DimensionMismatch(
            f"{path}: expected {n} values, found {vec.shape[0]}"
        )
    return as_vector(vec, name=str(path))


def write_vector(path, x) -> None:
    """Write a vector as one repr-formatted value per line."""
    vec = as_vector(x, name="vector")
    with open(path, "w", encoding="utf-8") as fh:
        for value in vec:
            fh.write(repr(float(value)))
            fh.write("\n")
