"""Spectral analysis of the sweep operator and the package invariant suite.

One relaxed sweep acts on the error as multiplication by

    Q(u) = P_m(mu_m) ... P_1(mu_1) = I - A^T C(u)^T Lambda M A.

``assemble_Q`` builds the dense operator both ways; ``restricted_rate``
takes its singular values on the orthogonal complement of N(A), where the
error actually lives, and turns the largest one below 1 into a per-sweep
contraction bound. ``run_invariant_suite`` re-checks every structural
identity the package relies on against a concrete (A, b, u) instance.

Everything here is dense and desk-scale by design; the solver never calls
into this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeError, ZeroRowError
from .kaczmarz import RelaxationSchedule, apply_row_projector, sweep
from .linalg import MatrixHandle, min_norm_solution, nullspace_basis
from .tanabe import (SolveConfig, TriangularFactor, assemble_AS_oracle,
                     build_C_algorithm1, build_C_hproduct,
                     build_C_index_formula, extract_Tu, kt_iterate, solve,
                     INDEX_FORMULA_MAX_M)

# assemble_Q forms dense n x n operators.
MAX_OPERATOR_ORDER = 500

# Singular values of the restricted operator at or above this are treated
# as the unit values belonging to N(A) and excluded from the rate.
UNIT_SIGMA_CUTOFF = 1.0 - 1e-10

# Restricted singular values at or below this are rounding dust from the
# SVD of an operator that annihilates the row space (orthogonal rows);
# report the rate as an exact 0 instead of noise near machine epsilon.
ZERO_SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class IterationOperator:
    """Dense sweep operator Q(u) with optional trailing partial products.

    ``partials[j]`` is the product of the projectors for rows j+1..m (so
    ``partials[m-1]`` is the identity): the operator that row j's swept
    direction still passes through after its own projection.
    """

    order: int
    values: np.ndarray
    method: str
    partials: list[np.ndarray] | None = None


@dataclass(frozen=True)
class RateReport:
    """Restricted singular spectrum of Q(u) and the rate bound it implies."""

    sigma_max_restricted: float
    spectrum: np.ndarray       # singular values of Q restricted to N(A)^perp
    bound_curve: np.ndarray    # sigma_max_restricted**k for k = 1..K

    def to_json(self) -> dict:
        return {
            "sigma_max_restricted": float(self.sigma_max_restricted),
            "spectrum": [float(s) for s in self.spectrum],
            "bound_curve": [float(v) for v in self.bound_curve],
        }


def _check_operator_scale(A: MatrixHandle) -> None:
    if A.cols > MAX_OPERATOR_ORDER:
        raise SizeError(
            f"assemble_Q forms dense {A.cols}x{A.cols} operators; "
            f"n exceeds {MAX_OPERATOR_ORDER}"
        )


def assemble_Q(A: MatrixHandle, u: RelaxationSchedule, method: str = "identity",
               with_partials: bool = False) -> IterationOperator:
    """Dense sweep operator, by either of its two equivalent forms.

    ``identity`` evaluates I - A^T C(u)^T Lambda M A with the production
    C(u) builder; ``product`` multiplies the m relaxed projectors in sweep
    order. The two agree to rounding and tests enforce that.
    """
    _check_operator_scale(A)
    m, n = A.shape
    u.check_length(m)
    if A.has_zero_rows:
        raise ZeroRowError("matrix has a zero row")
    dense = A.to_dense()
    norms = A.row_norms_sq
    mu = u.mu

    partials: list[np.ndarray] | None = None
    if with_partials or method == "product":
        # partials[j] = P_m ... P_{j+2} P_{j+1}; descending j appends the
        # next projector on the right: partials[j] = partials[j+1] @ P_{j+1}
        partials = [np.eye(n)] * m
        acc = partials[m - 1]
        for j in range(m - 2, -1, -1):
            i = j + 1
            acc = acc - (mu[i] / norms[i]) * np.outer(acc @ dense[i], dense[i])
            partials[j] = acc

    if method == "identity":
        C = build_C_algorithm1(A, u)
        weights = mu / norms
        scaled = C.to_dense().T * weights[np.newaxis, :]  # C^T Lambda M
        values = np.eye(n) - dense.T @ (scaled @ dense)
    elif method == "product":
        q = partials[0]
        values = q - (mu[0] / norms[0]) * np.outer(q @ dense[0], dense[0])
    else:
        raise ValueError(f"unknown method {method!r}")

    if not with_partials:
        partials = None
    return IterationOperator(order=n, values=values, method=method,
                             partials=partials)


def restricted_rate(Q: IterationOperator, A: MatrixHandle,
                    bound_k: int = 50) -> RateReport:
    """Singular spectrum of Q(u) restricted to the row space of A.

    Multiplies Q by the projector onto N(A)^perp so the unit singular
    values carried by null-space directions drop out, then reports the
    largest remaining value below ``UNIT_SIGMA_CUTOFF`` (0 when none) and
    its powers as the predicted error-bound curve.
    """
    info = nullspace_basis(A)
    restricted = Q.values @ info.projector_rowspace
    spectrum = np.linalg.svd(restricted, compute_uv=False)
    below = spectrum[spectrum < UNIT_SIGMA_CUTOFF]
    sigma = float(below.max()) if below.size else 0.0
    if sigma <= ZERO_SIGMA_FLOOR:
        sigma = 0.0
    ks = np.arange(1, bound_k + 1)
    return RateReport(sigma_max_restricted=sigma, spectrum=spectrum,
                      bound_curve=sigma ** ks)


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    name: str
    status: str  # pass | fail | skipped
    max_violation: float
    note: str = ""


@dataclass(frozen=True)
class InvariantReport:
    """All checks from one run_invariant_suite call."""

    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "status": c.status,
                 "max_violation": float(c.max_violation), "note": c.note}
                for c in self.checks
            ],
        }

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            msg = f"[{c.status:>7}] {c.name}: max violation {c.max_violation:.3e}"
            if c.note:
                msg += f" ({c.note})"
            out.append(msg)
        return out


def _result(name: str, violation: float, tol: float, note: str = "") -> CheckResult:
    status = "pass" if violation <= tol else "fail"
    return CheckResult(name=name, status=status,
                       max_violation=float(violation), note=note)


def run_invariant_suite(A: MatrixHandle, b: np.ndarray, u: RelaxationSchedule,
                        trials: int = 100, seed: int = 0) -> InvariantReport:
    """Re-verify the structural identities on one concrete instance.

    Covers the row-projector laws (nonexpansion, fixed points, the norm
    identity), the error-space invariant, the three-way C(u) builder
    agreement, the decomposition C(u) A = swept rows, sweep equivalence of
    the standard form, the two Q constructions, the T_u rescaling identity,
    forward sequential compatibility, nonexpansion of Q, and the spectral
    rate bound. Convergence-dependent checks are skipped (not failed) when
    the schedule leaves the (0, 2) regime, where no guarantee exists.

    Assumes a consistent system at desk scale. Returns a report; failures
    never raise.
    """
    rng = np.random.default_rng(seed)
    m, n = A.shape
    u.check_length(m)
    norms = A.row_norms_sq
    dense = A.to_dense()
    checks: list[CheckResult] = []
    regime = u.convergent_regime

    # row-projector laws over random vectors and rows
    worst_expand = 0.0
    worst_fixed = 0.0
    worst_pyth = 0.0
    pyth_mus = (-0.5, 0.0, 0.7, 1.0, 1.3, 2.0, 2.5)
    for _ in range(max(1, trials)):
        i = int(rng.integers(m))
        if norms[i] == 0.0:
            continue
        x = rng.standard_normal(n)
        nx = np.linalg.norm(x)
        mu_i = float(u.mu[i]) if regime else 1.0
        px = apply_row_projector(A, i, mu_i, x)
        worst_expand = max(worst_expand, np.linalg.norm(px) - nx)
        # vectors orthogonal to the row must be fixed for any mu
        a = A.row(i)
        x_perp = x - (a @ x) / norms[i] * a
        for any_mu in (-1.5, 0.0, 0.9, 2.0, 3.7):
            moved = apply_row_projector(A, i, any_mu, x_perp)
            denom = max(np.linalg.norm(x_perp), 1.0)
            worst_fixed = max(worst_fixed,
                              np.linalg.norm(moved - x_perp) / denom)
        for mu_t in pyth_mus:
            lhs = np.linalg.norm(apply_row_projector(A, i, mu_t, x)) ** 2
            rhs = nx ** 2 - mu_t * (2.0 - mu_t) * (a @ x) ** 2 / norms[i]
            worst_pyth = max(worst_pyth, abs(lhs - rhs) / max(nx ** 2, 1.0))
    checks.append(_result("projector_nonexpansion", worst_expand, 1e-12,
                          "mu inside (0,2)" if regime else "checked at mu=1"))
    checks.append(_result("projector_fixed_point", worst_fixed, 1e-12,
                          "rows fixed for any mu"))
    checks.append(_result("pythagorean_identity", worst_pyth, 1e-12))

    # oracle pieces shared below
    info = nullspace_basis(A)
    x_dagger = min_norm_solution(A, b)

    # error-space invariant: null-space component of e_k never moves,
    # whatever the schedule does; a few sweeps are enough to see drift
    x0 = rng.standard_normal(n)
    target = info.projector_null @ x0 + x_dagger
    xk = x0.copy()
    worst_null = float(np.linalg.norm(info.projector_null @ (xk - target)))
    for _ in range(10):
        xk = sweep(A, b, u, xk, skip_zero_rows=True)
        drift = info.projector_null @ (xk - target)
        worst_null = max(worst_null, float(np.linalg.norm(drift)))
    checks.append(_result("error_space_invariant", worst_null, 1e-10,
                          "any mu schedule"))

    # convergence and monotone error decay hold only inside (0,2); the
    # standard-form engine is used because slow spectra (sigma near 1, as
    # in tomography systems) need tens of thousands of sweeps
    if regime and not A.has_zero_rows:
        cfg = SolveConfig(x0=np.zeros(n), tol=1e-12, max_iters=30000,
                          reference=x_dagger, engine="standard_form")
        run = solve(A, b, u, cfg)
        final_err = float(run.errors[-1])
        checks.append(_result("sweep_convergence", final_err, 1e-8,
                              f"{run.iterations} sweeps"))
        growth = float(np.max(np.diff(run.errors))) if len(run.errors) > 1 else 0.0
        checks.append(_result("error_norm_nonincreasing", growth, 1e-12))
    else:
        note = "mu outside (0,2): not guaranteed" if not regime else "zero rows"
        checks.append(CheckResult("sweep_convergence", "skipped", 0.0, note))
        checks.append(CheckResult("error_norm_nonincreasing", "skipped", 0.0, note))

    if A.has_zero_rows:
        skipnote = "zero rows present"
        for name in ("builder_agreement", "decomposition_identity",
                     "sweep_equivalence", "q_identity", "tu_identity",
                     "forward_compatibility", "q_nonexpansion",
                     "rate_contraction", "spectrum_bound"):
            checks.append(CheckResult(name, "skipped", 0.0, skipnote))
        return InvariantReport(checks=tuple(checks))

    # three-way builder agreement
    c_alg = build_C_algorithm1(A, u)
    c_h = build_C_hproduct(A, u)
    diff = float(np.max(np.abs(c_alg.data - c_h.data)))
    note = "two builders"
    if m <= INDEX_FORMULA_MAX_M:
        c_idx = build_C_index_formula(A, u)
        diff = max(diff, float(np.max(np.abs(c_alg.data - c_idx.data))))
        note = "three builders"
    checks.append(_result("builder_agreement", diff, 1e-10, note))

    # decomposition: C(u) A equals the directly swept rows
    as_direct = assemble_AS_oracle(A, u)
    as_from_c = c_alg.to_dense() @ dense
    checks.append(_result("decomposition_identity",
                          float(np.max(np.abs(as_from_c - as_direct))), 1e-10))

    # one standard-form step equals one sweep
    worst_sweep = 0.0
    for _ in range(min(trials, 25)):
        y = rng.standard_normal(n)
        via_kt = kt_iterate(A, c_alg, u, b, y)
        via_sweep = sweep(A, b, u, y)
        scale = max(float(np.linalg.norm(via_sweep)), 1.0)
        worst_sweep = max(worst_sweep,
                          float(np.linalg.norm(via_kt - via_sweep)) / scale)
    checks.append(_result("sweep_equivalence", worst_sweep, 1e-12))

    # dense operator: identity form vs explicit projector product
    q_id = assemble_Q(A, u, method="identity")
    q_pr = assemble_Q(A, u, method="product", with_partials=True)
    checks.append(_result("q_identity",
                          float(np.max(np.abs(q_id.values - q_pr.values))),
                          1e-11))

    # Lambda C(u) = T_u M, elementwise
    t_u = extract_Tu(c_alg, A, u)
    lhs = u.mu[:, np.newaxis] * c_alg.to_dense()
    rhs = t_u.to_dense() / norms[np.newaxis, :]
    checks.append(_result("tu_identity", float(np.max(np.abs(lhs - rhs))),
                          1e-12))

    # every partially swept row must stay inside the row space of A
    worst_fwd = 0.0
    for j in range(m):
        pj = q_pr.partials[j]
        for i in range(j + 1):
            v = pj @ dense[i]
            outside = info.projector_null @ v
            worst_fwd = max(worst_fwd, float(np.linalg.norm(outside)))
    checks.append(_result("forward_compatibility", worst_fwd, 1e-10))

    # Q is nonexpansive inside the regime, fixes N(A), contracts off it
    if regime:
        worst_qexp = 0.0
        min_gap = np.inf
        for _ in range(max(1, trials)):
            x = rng.standard_normal(n)
            nx = float(np.linalg.norm(x))
            qn = float(np.linalg.norm(q_pr.values @ x))
            worst_qexp = max(worst_qexp, qn - nx)
            xr = info.projector_rowspace @ x
            nr = float(np.linalg.norm(xr))
            if nr > 1e-8:
                min_gap = min(min_gap,
                              nr - float(np.linalg.norm(q_pr.values @ xr)))
        for col in range(info.basis.shape[1]):
            z = info.basis[:, col]
            worst_qexp = max(worst_qexp,
                             float(np.linalg.norm(q_pr.values @ z - z)))
        ok_gap = (min_gap > 0.0) if np.isfinite(min_gap) else True
        status = "pass" if (worst_qexp <= 1e-12 and ok_gap) else "fail"
        checks.append(CheckResult("q_nonexpansion", status,
                                  float(max(worst_qexp, 0.0)),
                                  f"strict contraction gap {min_gap:.3e}"
                                  if np.isfinite(min_gap) else ""))
    else:
        checks.append(CheckResult("q_nonexpansion", "skipped", 0.0,
                                  "mu outside (0,2)"))

    # spectral rate: per-sweep error contraction never beats the bound
    report = restricted_rate(q_pr, A, bound_k=10)
    if regime:
        sigma = report.sigma_max_restricted
        e = info.projector_rowspace @ rng.standard_normal(n)
        worst_contract = 0.0
        for _ in range(15):
            e_next = q_pr.values @ e
            worst_contract = max(
                worst_contract,
                float(np.linalg.norm(e_next))
                - sigma * float(np.linalg.norm(e)),
            )
            e = e_next
            if np.linalg.norm(e) < 1e-13:
                break
        checks.append(_result("rate_contraction", worst_contract, 1e-9,
                              f"sigma={sigma:.6f}"))
        over_unit = float(np.max(report.spectrum) - 1.0) if report.spectrum.size else 0.0
        sig_ok = report.sigma_max_restricted < 1.0
        status = "pass" if (over_unit <= 1e-12 and sig_ok) else "fail"
        checks.append(CheckResult("spectrum_bound", status, max(over_unit, 0.0),
                                  "all sigma <= 1, restricted max < 1"))
    else:
        checks.append(CheckResult("rate_contraction", "skipped", 0.0,
                                  "mu outside (0,2)"))
        checks.append(CheckResult("spectrum_bound", "skipped", 0.0,
                                  "mu outside (0,2)"))

    return InvariantReport(checks=tuple(checks))
