"""Reproducible consistent test systems.

Every generator draws from ``numpy.random.default_rng(seed)`` and builds
b = A @ x_true, so the system is consistent to rounding and the same spec
reproduces bit-identical output. Kinds:

* ``random``: dense Gaussian rows, m >= n,
* ``rank_deficient``: r independent rows, the rest random combinations,
* ``orthogonal``: pairwise orthogonal rows with random scales,
* ``coherent``: rows crowded within a small angle of one direction,
* ``tomo``: parallel-beam line-intersection system on a square pixel grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ParamError
from .linalg import MatrixHandle

KINDS = ("random", "rank_deficient", "orthogonal", "coherent", "tomo")


@dataclass(frozen=True)
class ProblemSpec:
    """Description of one generated system.

    For ``tomo`` the sizes come from the geometry: ``grid`` is the pixel
    grid side (n = grid^2) and ``rays`` the number of measurement lines
    (m = rays); m and n fields are ignored. Other kinds use m and n
    directly. ``rank`` applies to rank_deficient, ``angle`` (radians) to
    coherent.
    """

    kind: str
    m: int = 0
    n: int = 0
    seed: int = 0
    rank: int | None = None
    angle: float | None = None
    grid: int | None = None
    rays: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParamError(f"unknown problem kind {self.kind!r}; "
                             f"choose from {', '.join(KINDS)}")


def _check_overdetermined(spec: ProblemSpec) -> tuple[int, int]:
    m, n = spec.m, spec.n
    if n < 1 or m < n:
        raise ParamError(f"{spec.kind} needs m >= n >= 1, got m={m}, n={n}")
    return m, n


def _gen_random(spec: ProblemSpec, rng):
    m, n = _check_overdetermined(spec)
    A = rng.standard_normal((m, n))
    return A


def _gen_rank_deficient(spec: ProblemSpec, rng):
    m, n = _check_overdetermined(spec)
    r = spec.rank if spec.rank is not None else max(1, n // 2)
    if not 1 <= r < min(m, n):
        raise ParamError(f"rank must be in [1, {min(m, n) - 1}], got {r}")
    base = rng.standard_normal((r, n))
    coeffs = rng.standard_normal((m - r, r))
    A = np.vstack([base, coeffs @ base])
    return A


def _gen_orthogonal(spec: ProblemSpec, rng):
    m, n = spec.m, spec.n
    if n < 1 or m < 1 or m > n:
        raise ParamError(f"orthogonal rows need 1 <= m <= n, got m={m}, n={n}")
    raw = rng.standard_normal((n, m))
    q, _ = np.linalg.qr(raw)  # n x m, orthonormal columns
    scales = rng.uniform(0.5, 2.0, size=m)
    return (q * scales).T


def _gen_coherent(spec: ProblemSpec, rng):
    m, n = _check_overdetermined(spec)
    if n < 2:
        raise ParamError("coherent needs n >= 2")
    angle = spec.angle if spec.angle is not None else 0.1
    if not 0.0 < angle < math.pi / 2:
        raise ParamError(f"angle must be in (0, pi/2), got {angle}")
    center = rng.standard_normal(n)
    center /= np.linalg.norm(center)
    rows = np.empty((m, n))
    for i in range(m):
        w = rng.standard_normal(n)
        w -= (w @ center) * center
        w /= np.linalg.norm(w)
        t = rng.uniform(0.0, angle)
        rows[i] = math.cos(t) * center + math.sin(t) * w
    return rows


def _ray_crossings(origin: np.ndarray, direction: np.ndarray,
                   g: int) -> np.ndarray:
    """Sorted parameters where the line origin + s*direction meets the
    grid lines of [0, g]^2, clipped to the segment inside the square."""
    s_lo, s_hi = -np.inf, np.inf
    for axis in range(2):
        o, d = origin[axis], direction[axis]
        if abs(d) > 1e-12:
            s0, s1 = (0.0 - o) / d, (g - o) / d
            s_lo = max(s_lo, min(s0, s1))
            s_hi = min(s_hi, max(s0, s1))
        elif not 0.0 < o < g:
            return np.empty(0)
    if not s_lo < s_hi:
        return np.empty(0)
    params = [s_lo, s_hi]
    for axis in range(2):
        o, d = origin[axis], direction[axis]
        if abs(d) > 1e-12:
            ks = np.arange(1, g)
            ss = (ks - o) / d
            params.extend(ss[(ss > s_lo) & (ss < s_hi)])
    return np.unique(np.asarray(params))


def tomo_matrix(grid: int, rays: int) -> sp.csr_matrix:
    """Parallel-beam intersection-length matrix on a grid x grid image.

    Rays arrive in fans of ``grid`` parallel lines per angle, angles
    equally spaced in [0, pi); the first ``rays`` lines in angle-major
    order are kept. Detector offsets are centered so every kept ray
    crosses the pixel square, which rules out zero rows. Entry (ray, p)
    is the length of the ray segment inside pixel p; pixel (ix, iy) maps
    to column iy*grid + ix.
    """
    if grid < 1 or rays < 1:
        raise ParamError(f"need grid >= 1 and rays >= 1, got {grid}, {rays}")
    g = grid
    n_det = g
    n_angles = math.ceil(rays / n_det)
    center = np.array([g / 2.0, g / 2.0])
    data, rows_idx, cols_idx = [], [], []
    for a in range(n_angles):
        theta = a * math.pi / n_angles
        direction = np.array([math.cos(theta), math.sin(theta)])
        perp = np.array([-math.sin(theta), math.cos(theta)])
        for j in range(n_det):
            ray = a * n_det + j
            if ray >= rays:
                break
            offset = (j + 0.5) - g / 2.0
            origin = center + offset * perp
            params = _ray_crossings(origin, direction, g)
            for s0, s1 in zip(params[:-1], params[1:]):
                length = s1 - s0
                if length <= 1e-12:
                    continue
                mid = origin + 0.5 * (s0 + s1) * direction
                ix = min(max(int(mid[0]), 0), g - 1)
                iy = min(max(int(mid[1]), 0), g - 1)
                data.append(length)
                rows_idx.append(ray)
                cols_idx.append(iy * g + ix)
    return sp.csr_matrix((data, (rows_idx, cols_idx)), shape=(rays, g * g))


def _tomo_phantom(grid: int, rng) -> np.ndarray:
    """Blocky test image with values in [0, 1]."""
    img = np.zeros((grid, grid))
    blocks = max(2, grid // 3)
    for _ in range(blocks):
        x0, y0 = rng.integers(0, grid, size=2)
        w = int(rng.integers(1, max(2, grid // 2)))
        h = int(rng.integers(1, max(2, grid // 2)))
        img[y0:y0 + h, x0:x0 + w] += rng.uniform(0.2, 0.8)
    return np.clip(img, 0.0, 1.0).ravel()


def generate(spec: ProblemSpec) -> tuple[MatrixHandle, np.ndarray, np.ndarray]:
    """Build (A, b, x_true) for a ProblemSpec; deterministic per (params, seed)."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "tomo":
        if spec.grid is None or spec.rays is None:
            raise ParamError("tomo needs grid and rays")
        A = MatrixHandle(tomo_matrix(spec.grid, spec.rays))
        x_true = _tomo_phantom(spec.grid, rng)
    else:
        builders = {
            "random": _gen_random,
            "rank_deficient": _gen_rank_deficient,
            "orthogonal": _gen_orthogonal,
            "coherent": _gen_coherent,
        }
        A = MatrixHandle(builders[spec.kind](spec, rng))
        x_true = rng.uniform(-1.0, 1.0, size=spec.n)
    b = A.matvec(x_true)
    return A, b, x_true
