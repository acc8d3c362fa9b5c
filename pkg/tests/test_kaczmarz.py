"""Row projector laws, single steps, sweeps, and the relaxation schedule."""

import numpy as np
import pytest
from hypothesis import given, seed
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from relaxkt import (DimensionMismatch, MatrixHandle, ParamError,
                     RelaxationSchedule, ZeroRowError, apply_row_projector,
                     kaczmarz_step, min_norm_solution, sweep)

A22 = MatrixHandle(np.array([[1.0, 0.0], [1.0, 1.0]]))
B22 = np.array([1.0, 2.0])


# -- schedule ---------------------------------------------------------------

def test_schedule_modes():
    u = RelaxationSchedule.constant(1.2, 4)
    assert u.mode == "constant" and len(u) == 4
    np.testing.assert_array_equal(u.mu, np.full(4, 1.2))

    u = RelaxationSchedule.per_row([0.5, 1.5])
    assert u.mode == "per-row" and len(u) == 2

    u1 = RelaxationSchedule.random(6, 0.2, 1.8, seed=9)
    u2 = RelaxationSchedule.random(6, 0.2, 1.8, seed=9)
    assert u1.mode == "random"
    assert np.array_equal(u1.mu, u2.mu)
    assert not np.array_equal(u1.mu, RelaxationSchedule.random(6, 0.2, 1.8,
                                                               seed=10).mu)
    assert np.all((u1.mu >= 0.2) & (u1.mu < 1.8))


def test_schedule_regime_flags():
    assert RelaxationSchedule.constant(1.0, 3).convergent_regime
    assert not RelaxationSchedule.constant(1.0, 3).warning
    # the interval is open at both ends
    for bad in (0.0, 2.0, -0.1, 2.5):
        u = RelaxationSchedule.constant(bad, 3)
        assert not u.convergent_regime and u.warning
    mixed = RelaxationSchedule.per_row([0.5, 2.1])
    assert mixed.warning


def test_schedule_validation():
    with pytest.raises(ParamError):
        RelaxationSchedule.constant(1.0, 0)
    with pytest.raises(ParamError):
        RelaxationSchedule.random(3, 1.5, 0.5, seed=1)
    with pytest.raises(ParamError):
        RelaxationSchedule.per_row([])
    with pytest.raises(DimensionMismatch):
        RelaxationSchedule.constant(1.0, 3).check_length(4)


# -- single projector -------------------------------------------------------

def test_projector_exact_projection():
    out = apply_row_projector(A22, 0, 1.0, np.array([3.0, 4.0]))
    np.testing.assert_array_equal(out, [0.0, 4.0])


def test_projector_reflection_preserves_norm():
    out = apply_row_projector(A22, 0, 2.0, np.array([3.0, 4.0]))
    np.testing.assert_array_equal(out, [-3.0, 4.0])
    assert np.linalg.norm(out) == 5.0


def test_projector_half_step():
    out = apply_row_projector(A22, 0, 0.5, np.array([3.0, 4.0]))
    np.testing.assert_array_equal(out, [1.5, 4.0])


def test_projector_zero_row():
    A = MatrixHandle(np.array([[0.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ZeroRowError):
        apply_row_projector(A, 0, 1.0, np.ones(2))


@seed(2)
@given(
    x=arrays(np.float64, (5,),
             elements=st.floats(min_value=-100, max_value=100)),
    mu=st.floats(min_value=1e-6, max_value=2.0, exclude_max=True),
    row=st.integers(min_value=0, max_value=3),
)
def test_projector_nonexpansion_property(x, mu, row):
    rng = np.random.default_rng(42)
    A = MatrixHandle(rng.standard_normal((4, 5)))
    out = apply_row_projector(A, row, mu, x)
    assert np.linalg.norm(out) <= np.linalg.norm(x) + 1e-12


@seed(3)
@given(
    x=arrays(np.float64, (4,),
             elements=st.floats(min_value=-10, max_value=10)),
    mu=st.floats(min_value=-3.0, max_value=3.0),
)
def test_projector_pythagorean_property(x, mu):
    rng = np.random.default_rng(43)
    A = MatrixHandle(rng.standard_normal((3, 4)))
    i = 1
    a = A.row(i)
    lhs = np.linalg.norm(apply_row_projector(A, i, mu, x)) ** 2
    rhs = np.linalg.norm(x) ** 2 - mu * (2 - mu) * (a @ x) ** 2 / (a @ a)
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


@seed(4)
@given(
    x=arrays(np.float64, (4,),
             elements=st.floats(min_value=-10, max_value=10)),
    mu=st.floats(min_value=-5.0, max_value=5.0),
)
def test_projector_fixed_point_property(x, mu):
    # vectors orthogonal to the row are fixed whatever mu is
    rng = np.random.default_rng(44)
    A = MatrixHandle(rng.standard_normal((3, 4)))
    i = 2
    a = A.row(i)
    x_perp = x - (a @ x) / (a @ a) * a
    out = apply_row_projector(A, i, mu, x_perp)
    assert np.linalg.norm(out - x_perp) <= 1e-14 * max(np.linalg.norm(x_perp),
                                                       1.0)


# -- steps and sweeps -------------------------------------------------------

def test_step_lands_on_hyperplane():
    x = kaczmarz_step(A22, B22, 0, 1.0, np.zeros(2))
    np.testing.assert_array_equal(x, [1.0, 0.0])
    x = kaczmarz_step(A22, B22, 1, 1.0, x)
    np.testing.assert_array_equal(x, [1.5, 0.5])


def test_step_zero_residual_fixed():
    x = np.array([1.0, 7.5])  # already satisfies row 0
    out = kaczmarz_step(A22, B22, 0, 1.0, x)
    np.testing.assert_array_equal(out, x)


def test_step_index_and_zero_row_errors():
    with pytest.raises(DimensionMismatch):
        kaczmarz_step(A22, B22, 2, 1.0, np.zeros(2))
    A = MatrixHandle(np.array([[0.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ZeroRowError):
        kaczmarz_step(A, B22, 0, 1.0, np.zeros(2))


def test_sweep_composes_steps():
    u = RelaxationSchedule.constant(1.0, 2)
    out = sweep(A22, B22, u, np.zeros(2))
    np.testing.assert_array_equal(out, [1.5, 0.5])


def test_sweep_identity_matrix_converges_in_one_pass():
    A = MatrixHandle(np.eye(2))
    u = RelaxationSchedule.per_row([1.0, 1.0])
    out = sweep(A, np.array([3.0, -2.0]), u, np.zeros(2))
    np.testing.assert_array_equal(out, [3.0, -2.0])


def test_sweep_zero_schedule_is_identity():
    u = RelaxationSchedule.constant(0.0, 2)
    x = np.array([0.3, -0.7])
    np.testing.assert_array_equal(sweep(A22, B22, u, x), x)


def test_sweep_zero_row_policy():
    A = MatrixHandle(np.array([[1.0, 0.0], [0.0, 0.0], [1.0, 1.0]]))
    b = np.array([1.0, 0.0, 2.0])
    u = RelaxationSchedule.constant(1.0, 3)
    with pytest.raises(ZeroRowError):
        sweep(A, b, u, np.zeros(2))
    out = sweep(A, b, u, np.zeros(2), skip_zero_rows=True)
    np.testing.assert_array_equal(out, [1.5, 0.5])


def test_sweep_length_checks():
    with pytest.raises(DimensionMismatch):
        sweep(A22, B22, RelaxationSchedule.constant(1.0, 3), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        sweep(A22, np.zeros(3), RelaxationSchedule.constant(1.0, 2),
              np.zeros(2))


def test_sweeps_converge_with_nonincreasing_error():
    rng = np.random.default_rng(7)
    dense = rng.standard_normal((10, 4))
    A = MatrixHandle(dense)
    x_true = rng.standard_normal(4)
    b = dense @ x_true
    u = RelaxationSchedule.random(10, 0.3, 1.7, seed=5)
    x_dagger = min_norm_solution(A, b)
    x = np.zeros(4)
    errs = [np.linalg.norm(x - x_dagger)]
    for _ in range(2000):
        x = sweep(A, b, u, x)
        errs.append(np.linalg.norm(x - x_dagger))
        if errs[-1] < 1e-9:
            break
    assert errs[-1] < 1e-8
    assert np.all(np.diff(errs) <= 1e-12)
